#pragma once

#include <stdexcept>
#include <vector>

#include "desing/configuration.hpp"
#include "desing/geometry_core.hpp"
#include "desing/sphere_integration.hpp"

namespace desing {

// G(x) = sum_j alpha_j R_j (x - x_j) / |x - x_j|^n + A_0 x
struct GreenData {
  Configuration config;
  Vec alpha;

  GreenData(Configuration config, Vec alpha);
};

class SingularPointError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

inline constexpr double kSingularDistance = 1e-12;

Vec green_eval(const GreenData& data, const Vec& x);
// J(i, a) = dG_i / dx_a
Mat green_jacobian(const GreenData& data, const Vec& x);
// hess[a](i, b) = d^2 G_i / dx_a dx_b
std::vector<Mat> green_hessian(const GreenData& data, const Vec& x);

// G with the j0 singular term removed; smooth (harmonic) near x_{j0}.
Vec green_regular_part(const GreenData& data, int j0, const Vec& x);

// c_{j0}: the regular part evaluated at x_{j0}, used as the neck's vertical offset.
Vec neck_offset(const GreenData& data, int j0);

// (1/omega_n)(sum_{j != j0} gamma_{j0 j} alpha_j - lambda_{j0})
double predicted_linear_coeff(const GreenData& data, int j0);

struct ExpansionProbe {
  double singular_coeff = 0.0;  // coefficient of rho^{1-n}
  double linear_coeff = 0.0;    // coefficient of rho
  Vec constant_vec;             // regular part at x_{j0}
  double condition = 0.0;       // of the column-scaled fit matrix
  std::vector<double> radii;
  std::vector<double> projections;  // (1/omega_n) int G(x_{j0} + rho Theta) . R_{j0} Theta
};

inline constexpr double kFitConditionLimit = 1e8;

// Least-squares fit of the R_{j0} Theta projection on {rho^{1-n}, 1, rho, rho^2}.
// The j0 singular term and the regular part are projected and fitted separately, then
// summed, so the small linear term is not lost against rho^{1-n}. The self term is
// fitted on the rho^{1-n} column alone.
ExpansionProbe expansion_probe(const GreenData& data, int j0, const std::vector<double>& radii,
                               const QuadratureRule& rule);

// Radii {r, r/2, r/4, r/8} with r = 1e-3 min(1, smallest point distance).
std::vector<double> default_probe_radii(const Configuration& config);

// |linear_coeff| for every end.
Vec balance_residual(const GreenData& data, const std::vector<double>& radii,
                     const QuadratureRule& rule);
Vec balance_residual(const GreenData& data);

// Samples x + i eps G(x) over `grid`; nodes within `exclusion` of some x_j are masked.
ImmersionPatch graph_patch(const GreenData& data, const Grid& grid, double epsilon,
                           double exclusion);

// Mean curvature vector of the graph x + i eps G(x) from the exact derivatives of G.
Vec graph_mean_curvature(const GreenData& data, double epsilon, const Vec& x);

}  // namespace desing
