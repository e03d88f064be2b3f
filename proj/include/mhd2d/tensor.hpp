#pragma once

// Covariant tensors of rank r in two dimensions stored component-wise as grid
// fields. Component (a1,...,ar) lives at index a1*2^(r-1) + ... + ar. Boundary
// tensors use fields with a single row.

#include "mhd2d/spectral.hpp"

#include <initializer_list>
#include <vector>

namespace mhd2d {

enum class Domain { plasma, vacuum, interface, wall };

struct TensorField {
  int rank = 0;
  Domain domain = Domain::plasma;
  std::vector<Field> comp;

  TensorField() = default;
  TensorField(int rank, Domain domain, Eigen::Index rows, Eigen::Index cols);

  static TensorField scalar(Field f, Domain domain);
  static TensorField vector(Field f1, Field f2, Domain domain);

  int size() const { return static_cast<int>(comp.size()); }
  Eigen::Index rows() const { return comp.empty() ? 0 : comp[0].rows(); }
  Eigen::Index cols() const { return comp.empty() ? 0 : comp[0].cols(); }

  Field& operator[](int flat) { return comp[flat]; }
  const Field& operator[](int flat) const { return comp[flat]; }
  Field& at(std::initializer_list<int> idx) { return comp[flat_index(idx)]; }
  const Field& at(std::initializer_list<int> idx) const { return comp[flat_index(idx)]; }

  /// Unpack a flat component index into its rank indices.
  std::vector<int> indices(int flat) const;
  int flat_index(std::initializer_list<int> idx) const;
  int flat_index(const std::vector<int>& idx) const;

  /// Throws shape_error unless every component has the given shape and the
  /// component count matches the rank.
  void check_shape(Eigen::Index rows, Eigen::Index cols) const;
  bool all_finite() const;
  double max_abs() const;
};

TensorField operator+(const TensorField& a, const TensorField& b);
TensorField operator-(const TensorField& a, const TensorField& b);
TensorField operator*(double s, const TensorField& a);

}  // namespace mhd2d
