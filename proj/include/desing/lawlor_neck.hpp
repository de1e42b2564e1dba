#pragma once

#include <span>
#include <variant>
#include <vector>

#include "desing/geometry_core.hpp"

namespace desing {

// Scaled, rotated and translated copy of the Lawlor neck
//   s -> (n beta eps)^{1/n} (cos s Theta + i sin s R Theta) / (sin ns)^{1/n} + translation.
struct NeckParams {
  int n = 3;
  double beta = 1.0;
  double epsilon = 1.0;
  Mat rotation;
  AmbientPoint translation;

  NeckParams(int n, double beta, double epsilon);
  NeckParams(int n, double beta, double epsilon, Mat rotation, AmbientPoint translation);

  // (n beta eps)^{1/n}
  double scale() const;
  void validate() const;
};

// Unscaled model neck H_I for R = I, n beta eps = 1.
NeckParams unit_neck(int n);

AmbientPoint neck_point(const NeckParams& params, double s, std::span<const double> angles);
AmbientPoint neck_point_at(const NeckParams& params, double s, const Vec& theta);

// dt = ds / sin(ns), t(pi / 2n) = 0, so that e^{-nt} = sin(ns) / (1 - cos(ns)).
double s_to_t(double s, int n);
double t_to_s(double t, int n);

// Scaled radius of the real part: (n beta eps)^{1/n} cos s (sin ns)^{-1/n}.
double radius_of_s(const NeckParams& params, double s);

// Argmin of the radius on (0, pi/n), located by golden-section search.
double radius_branch_minimum(int n);

// Inverse of radius_of_s on the lower-end branch (0, s_min]. Throws
// std::domain_error("neck too large for requested radius") below the branch minimum.
double s_of_radius(const NeckParams& params, double radius);

// sup over (rho, Theta) of |neck - (rho Theta + i eps beta rho^{1-n} R Theta)| for the lower end.
// Requires rho >= 2 (n beta eps)^{1/n}.
double asymptote_residual(const NeckParams& params, std::span<const double> rhos,
                          std::span<const Vec> thetas);

// Normal field V = i e^{i(1-n)s} f Theta + i e^{is} T on a neck grid. Axis 0 is s, axes
// 1..n-1 are the sphere chart angles. T is stored in ambient R^n coordinates.
class NormalField {
 public:
  NormalField(Grid grid, int n);

  const Grid& grid() const { return grid_; }
  int n() const { return n_; }
  std::size_t size() const { return grid_.size(); }

  bool valid(std::size_t node) const { return valid_[node] != 0; }
  double f(std::size_t node) const { return f_[node]; }
  Eigen::Map<const Vec> tangent(std::size_t node) const;
  void set(std::size_t node, double f, const Vec& tangent);
  void mask(std::size_t node) { valid_[node] = 0; }

  // Largest |f| + |T| over valid nodes.
  double sup_norm() const;

 private:
  Grid grid_;
  int n_;
  std::vector<double> f_;
  std::vector<double> t_;
  std::vector<unsigned char> valid_;
};

namespace jacobi {
struct Translation {
  double angle = 0.0;
  Vec a;
};
struct Dilation {
  double delta = 1.0;
};
struct SU {
  Mat a;  // symmetric
};
struct O2nRotation {
  Mat a;  // antisymmetric
};
struct O2nBoost {
  Mat a;  // antisymmetric
};
}  // namespace jacobi

using JacobiKind = std::variant<jacobi::Translation, jacobi::Dilation, jacobi::SU,
                                jacobi::O2nRotation, jacobi::O2nBoost>;

// (f, T) at one point of H_I for the closed-form Jacobi field of `kind`.
std::pair<double, Vec> jacobi_value(const JacobiKind& kind, int n, double s, const Vec& theta);

// Samples a Jacobi field on a neck grid; nodes near chart poles are masked.
NormalField jacobi_field(const JacobiKind& kind, const Grid& grid, int n);

// Applies (sin ns)^{-2/n} L_H to a sampled normal field: second-order central differences
// in s, sphere operators through the chart metric and tangent projection. Output nodes
// whose stencil is incomplete are masked.
NormalField linearized_apply(const NormalField& field);

// True for nodes within two grid steps of a polar-angle chart pole.
bool near_pole(const Grid& grid, std::size_t node, int n);

// Samples the neck on a grid over (s, angles) into R^{2n}.
ImmersionPatch neck_patch(const NeckParams& params, const Grid& grid);

// sup |H| at six fixed interior points, s in {0.2, 0.5, 0.75} pi/n times two chart
// positions, each from a 3^n stencil of spacing h centred on the point.
double probe_curvature_sup(const NeckParams& params, double h);

}  // namespace desing
