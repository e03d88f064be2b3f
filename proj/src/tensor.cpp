#include "mhd2d/tensor.hpp"

#include "mhd2d/errors.hpp"

namespace mhd2d {

TensorField::TensorField(int r, Domain d, Eigen::Index rows, Eigen::Index cols) : rank(r), domain(d) {
  if (r < 0) throw Error(ErrorKind::shape_error, "negative tensor rank");
  comp.assign(std::size_t{1} << r, Field::Zero(rows, cols));
}

TensorField TensorField::scalar(Field f, Domain d) {
  TensorField t;
  t.rank = 0;
  t.domain = d;
  t.comp.push_back(std::move(f));
  return t;
}

TensorField TensorField::vector(Field f1, Field f2, Domain d) {
  TensorField t;
  t.rank = 1;
  t.domain = d;
  t.comp.push_back(std::move(f1));
  t.comp.push_back(std::move(f2));
  return t;
}

std::vector<int> TensorField::indices(int flat) const {
  std::vector<int> idx(rank);
  for (int k = rank - 1; k >= 0; --k) {
    idx[k] = flat & 1;
    flat >>= 1;
  }
  return idx;
}

int TensorField::flat_index(std::initializer_list<int> idx) const {
  return flat_index(std::vector<int>(idx));
}

int TensorField::flat_index(const std::vector<int>& idx) const {
  if (static_cast<int>(idx.size()) != rank) throw Error(ErrorKind::shape_error, "index count does not match rank");
  int flat = 0;
  for (int a : idx) flat = 2 * flat + a;
  return flat;
}

void TensorField::check_shape(Eigen::Index r, Eigen::Index c) const {
  if (size() != (1 << rank)) throw Error(ErrorKind::shape_error, "component count does not match rank");
  for (const auto& f : comp)
    if (f.rows() != r || f.cols() != c) throw Error(ErrorKind::shape_error, "tensor component has wrong shape");
}

bool TensorField::all_finite() const {
  for (const auto& f : comp)
    if (!f.allFinite()) return false;
  return true;
}

double TensorField::max_abs() const {
  double m = 0.0;
  for (const auto& f : comp) m = std::max(m, f.abs().maxCoeff());
  return m;
}

namespace {
void check_compatible(const TensorField& a, const TensorField& b) {
  if (a.rank != b.rank || a.size() != b.size()) throw Error(ErrorKind::shape_error, "tensor ranks differ");
  b.check_shape(a.rows(), a.cols());
}
}  // namespace

TensorField operator+(const TensorField& a, const TensorField& b) {
  check_compatible(a, b);
  TensorField c = a;
  for (int k = 0; k < c.size(); ++k) c[k] += b[k];
  return c;
}

TensorField operator-(const TensorField& a, const TensorField& b) {
  check_compatible(a, b);
  TensorField c = a;
  for (int k = 0; k < c.size(); ++k) c[k] -= b[k];
  return c;
}

TensorField operator*(double s, const TensorField& a) {
  TensorField c = a;
  for (auto& f : c.comp) f *= s;
  return c;
}

}  // namespace mhd2d
