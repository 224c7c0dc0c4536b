#include "disclab/field.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "disclab/kernels.hpp"

namespace disclab {

std::string Arity::str() const {
  return "(" + std::to_string(rows) + "," + std::to_string(cols) + "," +
         std::to_string(comps) + ")";
}

Field::Field(GridPtr grid, Arity arity, FieldTag tag)
    : grid_(std::move(grid)), arity_(arity), tag_(tag) {
  if (!grid_) throw std::invalid_argument("field requires a grid");
  data_.assign(static_cast<std::size_t>(grid_->node_count()) * arity_.block(),
               0.0);
}

Field Field::sample(GridPtr g, const std::function<double(double, double)>& f) {
  Field out(g, {1, 1, 1});
  const int nn = g->node_count();
  for (int id = 0; id < nn; ++id) out.at(id) = f(g->x(id), g->y(id));
  return out;
}

Field Field::sample_vector(
    GridPtr g, int m, const std::function<void(double, double, double*)>& f) {
  Field out(g, {m, 1, 1});
  const int nn = g->node_count();
  std::vector<double> buf(m);
  for (int id = 0; id < nn; ++id) {
    f(g->x(id), g->y(id), buf.data());
    for (int r = 0; r < m; ++r) out.at(id, r) = buf[r];
  }
  return out;
}

double Field::norm_at(int node) const {
  const double* b = block(node);
  double s = 0.0;
  for (int k = 0; k < arity_.block(); ++k) s += b[k] * b[k];
  return std::sqrt(s);
}

double Field::skew_defect() const {
  if (arity_.rows != arity_.cols) return 0.0;
  const int m = arity_.rows;
  double worst = 0.0;
  for (int id : grid_->interior_nodes()) {
    for (int s = 0; s < arity_.comps; ++s) {
      for (int r = 0; r < m; ++r) {
        for (int c = 0; c <= r; ++c) {
          const double d = std::abs(at(id, r, c, s) + at(id, c, r, s));
          if (d > worst) worst = d;
        }
      }
    }
  }
  return worst;
}

double Field::rotation_defect() const {
  if (arity_.rows != arity_.cols || arity_.comps != 1) return 0.0;
  const int m = arity_.rows;
  double worst = 0.0;
  Eigen::MatrixXd P(m, m), G(m, m);
  for (int id : grid_->interior_nodes()) {
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < m; ++c) P(r, c) = at(id, r, c);
    G = P.transpose() * P - Eigen::MatrixXd::Identity(m, m);
    worst = std::max(worst, G.cwiseAbs().maxCoeff());
    worst = std::max(worst, std::abs(P.determinant() - 1.0));
  }
  return worst;
}

Field& Field::operator+=(const Field& o) {
  if (arity_ != o.arity_) throw std::invalid_argument("arity mismatch in +");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
  return *this;
}

Field& Field::operator-=(const Field& o) {
  if (arity_ != o.arity_) throw std::invalid_argument("arity mismatch in -");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
  return *this;
}

Field& Field::operator*=(double s) {
  for (auto& v : data_) v *= s;
  return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double s, Field a) { return a *= s; }

void skew_project(Field& f) {
  if (f.arity().rows != f.arity().cols) {
    throw std::invalid_argument("skew projection needs square arity");
  }
  const int m = f.arity().rows;
  const int nn = f.grid()->node_count();
  for (int id = 0; id < nn; ++id) {
    for (int s = 0; s < f.arity().comps; ++s) {
      for (int r = 0; r < m; ++r) {
        f.at(id, r, r, s) = 0.0;
        for (int c = 0; c < r; ++c) {
          const double v = 0.5 * (f.at(id, r, c, s) - f.at(id, c, r, s));
          f.at(id, r, c, s) = v;
          f.at(id, c, r, s) = -v;
        }
      }
    }
  }
  f.set_tag(FieldTag::Skew);
}

}  // namespace disclab
