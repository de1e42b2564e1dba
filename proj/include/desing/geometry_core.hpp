#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace desing {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Raised when a finite-difference stencil cannot be evaluated at a node
// (masked neighbour, grid boundary, degenerate Jacobian).
class StencilError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A point x + iy of C^n, stored as its real and imaginary parts.
class AmbientPoint {
 public:
  AmbientPoint(Vec x, Vec y);
  static AmbientPoint zero(int n);
  static AmbientPoint from_real(const Vec& stacked);

  int dim() const { return static_cast<int>(x_.size()); }
  const Vec& x() const { return x_; }
  const Vec& y() const { return y_; }

  // (x, y) as one vector of R^{2n}.
  Vec to_real() const;

  AmbientPoint operator+(const AmbientPoint& other) const;

 private:
  Vec x_;
  Vec y_;
};

struct SphereChartValue {
  Vec point;                     // Theta(angles), unit norm
  std::vector<Vec> derivatives;  // d Theta / d angle_j, j = 0..n-2
};

// Hyperspherical chart of S^{n-1}:
//   Theta = (sin a_1 * Theta'(a_2, ..., a_{n-1}), cos a_1),  Theta'(a) = (cos a, sin a) for S^1.
// Polar angles a_1..a_{n-2} lie in [0, pi], the azimuth a_{n-1} in [0, 2 pi).
// Coordinate derivatives are mutually orthogonal.
SphereChartValue sphere_chart_eval(std::span<const double> angles, int n);
Vec sphere_point(std::span<const double> angles, int n);

// Rectangular parameter grid; axis a has dims[a] nodes at lower[a] + i * spacing[a].
class Grid {
 public:
  Grid(std::vector<int> dims, std::vector<double> lower, std::vector<double> spacing);

  // Uniform grid with `nodes` points on each closed interval [lo_a, hi_a].
  static Grid box(const std::vector<double>& lo, const std::vector<double>& hi,
                  const std::vector<int>& nodes);

  int rank() const { return static_cast<int>(dims_.size()); }
  std::size_t size() const { return size_; }
  int dim(int axis) const { return dims_[axis]; }
  double spacing(int axis) const { return spacing_[axis]; }
  double lower(int axis) const { return lower_[axis]; }
  std::ptrdiff_t stride(int axis) const { return strides_[axis]; }

  double coordinate(int axis, int i) const { return lower_[axis] + i * spacing_[axis]; }
  std::vector<int> multi_index(std::size_t node) const;
  std::size_t linear_index(std::span<const int> index) const;
  Vec parameters(std::size_t node) const;

 private:
  std::vector<int> dims_;
  std::vector<double> lower_;
  std::vector<double> spacing_;
  std::vector<std::ptrdiff_t> strides_;
  std::size_t size_ = 0;
};

// Samples of an immersion of a rectangular parameter domain into R^N.
class ImmersionPatch {
 public:
  ImmersionPatch(Grid grid, int ambient_dim);

  // Evaluates `map` at every node; a nullopt result masks the node.
  static ImmersionPatch sample(Grid grid, int ambient_dim,
                               const std::function<std::optional<Vec>(const Vec&)>& map);

  const Grid& grid() const { return grid_; }
  int ambient_dim() const { return ambient_dim_; }
  std::size_t size() const { return grid_.size(); }

  bool valid(std::size_t node) const { return valid_[node] != 0; }
  Eigen::Map<const Vec> point(std::size_t node) const;
  void set(std::size_t node, const Vec& value);
  void mask(std::size_t node) { valid_[node] = 0; }
  std::size_t valid_count() const;

  // True when the node and all of its 3^m neighbours exist and are valid.
  bool evaluable(std::size_t node) const;

 private:
  Grid grid_;
  int ambient_dim_;
  std::vector<double> samples_;
  std::vector<unsigned char> valid_;
};

// Central-difference first and second derivatives of a patch at a node.
struct PatchJet {
  Mat tangents;                // N x m, column a = dX/du_a
  std::vector<Mat> second;     // second[a] is N x m, column b = d^2 X / du_a du_b
};
PatchJet patch_jet(const ImmersionPatch& patch, std::size_t node);

// Metric g_ab = dX/du_a . dX/du_b; throws StencilError on masked stencils or rank loss.
Mat first_fundamental_form(const ImmersionPatch& patch, std::size_t node);

// Laplace-Beltrami image of the position map, H = g^{ab}(X_ab - Gamma^c_ab X_c),
// computed as the normal projection of g^{ab} X_ab.
Vec mean_curvature_vector(const ImmersionPatch& patch, std::size_t node);
Vec mean_curvature_from_jet(const Mat& tangents, const std::vector<Mat>& second);

// max-norm of M^T M - I.
double check_orthogonal(const Mat& m);
double check_symmetric(const Mat& m);
double check_antisymmetric(const Mat& m);

// Rotation by `angle` in the (e_i, e_j) coordinate plane of R^n.
Mat plane_rotation(int n, int i, int j, double angle);

// Stacks the 2n real coordinates of x + iy.
inline Vec stack(const Vec& x, const Vec& y) {
  Vec out(x.size() + y.size());
  out << x, y;
  return out;
}

}  // namespace desing
