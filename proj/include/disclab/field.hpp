#pragma once

#include <functional>
#include <string>
#include <vector>

#include "disclab/grid.hpp"

namespace disclab {

/// Component arity of a field: (rows, cols, spatial). Scalar (1,1,1),
/// R^m vector (m,1,1), so_m (m,m,1), so_m x R^2 (m,m,2), SO_m (m,m,1).
struct Arity {
  int rows = 1;
  int cols = 1;
  int comps = 1;
  int block() const { return rows * cols * comps; }
  bool operator==(const Arity& o) const {
    return rows == o.rows && cols == o.cols && comps == o.comps;
  }
  bool operator!=(const Arity& o) const { return !(*this == o); }
  std::string str() const;
};

enum class FieldTag { None, Skew, Rotation };

/// Immutable-after-construction sample array on a DiscGrid. Values are stored
/// per node, row-major in (row, col, spatial).
class Field {
 public:
  Field() = default;
  Field(GridPtr grid, Arity arity, FieldTag tag = FieldTag::None);

  static Field scalar(GridPtr g) { return Field(g, {1, 1, 1}); }
  static Field vector(GridPtr g, int m) { return Field(g, {m, 1, 1}); }

  /// Samples f(x,y) at every lattice node.
  static Field sample(GridPtr g, const std::function<double(double, double)>& f);
  static Field sample_vector(
      GridPtr g, int m,
      const std::function<void(double, double, double*)>& f);

  const GridPtr& grid() const { return grid_; }
  const Arity& arity() const { return arity_; }
  FieldTag tag() const { return tag_; }
  void set_tag(FieldTag t) { tag_ = t; }

  double& at(int node, int r = 0, int c = 0, int s = 0) {
    return data_[static_cast<std::size_t>(node) * arity_.block() +
                 (r * arity_.cols + c) * arity_.comps + s];
  }
  double at(int node, int r = 0, int c = 0, int s = 0) const {
    return data_[static_cast<std::size_t>(node) * arity_.block() +
                 (r * arity_.cols + c) * arity_.comps + s];
  }
  double* block(int node) {
    return data_.data() + static_cast<std::size_t>(node) * arity_.block();
  }
  const double* block(int node) const {
    return data_.data() + static_cast<std::size_t>(node) * arity_.block();
  }

  std::vector<double>& raw() { return data_; }
  const std::vector<double>& raw() const { return data_; }

  /// Euclidean norm over all components at a node.
  double norm_at(int node) const;

  /// Max over interior nodes of the skew defect max_s |A_s + A_s^T|_inf.
  double skew_defect() const;
  /// Max over interior nodes of |P^T P - I|_inf and |det P - 1| combined.
  double rotation_defect() const;

  Field& operator+=(const Field& o);
  Field& operator-=(const Field& o);
  Field& operator*=(double s);

 private:
  GridPtr grid_;
  Arity arity_;
  FieldTag tag_ = FieldTag::None;
  std::vector<double> data_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double s, Field a);

/// Enforces A = (A - A^T)/2 in every spatial slot at every node.
void skew_project(Field& f);

}  // namespace disclab
