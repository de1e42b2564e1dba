#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "desing/geometry_core.hpp"
#include "desing/sphere_integration.hpp"

namespace desing {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tunables that a configuration file may override.
struct RunSettings {
  int quadrature_nodes = QuadratureRule::kDefaultNodesPerAngle;
  double grid_h = 0.0;  // 0 selects rho_* / 4
  int sh_degree = 8;
  std::uint64_t seed = 1;
  int neck_nodes = 17;  // nodes per neck parameter axis
};

struct Configuration {
  int n = 0;
  std::vector<Vec> points;     // x_j
  std::vector<Mat> rotations;  // R_j
  Mat a0;                      // A_0
  double epsilon = 0.0;
  double rho_star = 0.0;
  RunSettings settings;

  int k() const { return static_cast<int>(points.size()); }
};

inline constexpr double kPointSeparation = 1e-9;
inline constexpr double kOrthogonalityTolerance = 1e-10;
inline constexpr double kH1RankCut = 1e-10;
inline constexpr double kH1ResidualCut = 1e-8;
inline constexpr double kH2RcondCut = 1e-10;

// Throws ConfigError naming the offending entry.
void validate(const Configuration& config);

struct H1Verdict {
  int j = 0;
  int jp = 0;
  bool holds = false;
  double residual = 0.0;  // distance from xi_{jj'} to Im(I - R_{j'}^{-1} R_j)
  int rank = 0;
};

std::vector<H1Verdict> check_h1(const Configuration& config);

// xi_{jj'} = (x_j - x_{j'}) / |x_j - x_{j'}|.
Vec unit_direction(const Configuration& config, int j, int jp);

// Closed form (omega_n / (n d^n)) (tr(R_{j'}^T R_j) - n (R_j xi).(R_{j'} xi)); 0 when j == j'.
double gamma_entry(const Configuration& config, int j, int jp);
Mat gamma_matrix(const Configuration& config);

// Direct quadrature of the sphere integrand defining gamma_{jj'}.
Integral gamma_entry_quadrature(const Configuration& config, int j, int jp,
                                const QuadratureRule& rule);

// -(omega_n / 2^n) ((2/n) dim E_- + (2/n) sum_i (1 - cos theta_i)) from the eigenstructure
// of R_2^{-1} R_1, valid when both rotations fix the unit vector e and |x_1 - x_2| = 2.
double symmetric_pair_gamma(const Mat& r1, const Mat& r2, const Vec& e);

// lambda_j = -(omega_n / n) tr(A_0^T R_j).
Vec lambda_vector(const Configuration& config);
Integral lambda_quadrature(const Configuration& config, int j, const QuadratureRule& rule);

struct NeckScales {
  std::optional<Vec> alpha;
  bool h2 = false;
  bool h3 = false;
  double rcond = 0.0;
  double residual = 0.0;  // |Gamma alpha - Lambda|
};

NeckScales neck_scales(const Mat& gamma, const Vec& lambda);

struct InteractionSystem {
  Mat gamma;
  Vec lambda;
  std::optional<Vec> alpha;
  double rcond = 0.0;
  double residual = 0.0;
  std::vector<H1Verdict> h1;
  bool h1_holds = false;
  bool h2 = false;
  bool h3 = false;
};

InteractionSystem interaction_system(const Configuration& config);

// 64-bit FNV-1a of every field printed with 17 significant digits, as 16 hex digits.
std::string config_fingerprint(const Configuration& config);

}  // namespace desing
