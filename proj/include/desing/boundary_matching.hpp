#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include "desing/configuration.hpp"
#include "desing/geometry_core.hpp"

namespace desing {

// Real spherical harmonics on S^2 (orthonormal, no Condon-Shortley phase):
//   Y_k0, sqrt2 N P_k^m(cos th) cos(m ph) for m > 0, sqrt2 N P_k^|m|(cos th) sin(|m| ph) for m < 0.
// With this convention Theta = sqrt(4 pi / 3) (Y_11, Y_1,-1, Y_10).
inline constexpr int kMaxShDegree = 64;

inline int sh_index(int k, int m) { return k * k + k + m; }
inline int sh_count(int max_degree) { return (max_degree + 1) * (max_degree + 1); }

// Values of every Y_km, k <= max_degree, at (theta, phi).
Vec real_sh_values(int max_degree, double theta, double phi);

// R^3-valued map on S^2; column sh_index(k, m) holds the three component coefficients.
struct SHExpansion {
  int max_degree = 0;
  Mat coeffs;

  explicit SHExpansion(int max_degree);
  static SHExpansion zero(int max_degree) { return SHExpansion(max_degree); }

  SHExpansion operator+(const SHExpansion& other) const;
  SHExpansion operator-(const SHExpansion& other) const;
  SHExpansion operator*(double s) const;
  double max_abs() const;
};

class ShResolutionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Gauss-Legendre nodes in cos(theta) times equispaced azimuths.
struct S2Grid {
  std::vector<double> theta;
  std::vector<double> phi;
  std::vector<double> weight;  // per theta node, includes 2 pi / n_phi

  static S2Grid make(int n_theta, int n_phi);
  // 2L + 2 nodes on each angle.
  static S2Grid for_degree(int max_degree);

  int n_theta() const { return static_cast<int>(theta.size()); }
  int n_phi() const { return static_cast<int>(phi.size()); }
  int size() const { return n_theta() * n_phi(); }
  // node = i_theta * n_phi + i_phi
  Vec point(int node) const;
};

// 3 x grid.size() samples of f(Theta).
Mat sample_on_grid(const S2Grid& grid, const std::function<Vec(const Vec&)>& f);

// Throws ShResolutionError unless n_theta >= L + 1 and n_phi >= 2L + 2.
SHExpansion sh_analyze(const S2Grid& grid, const Mat& samples, int max_degree);
Vec sh_synthesize(const SHExpansion& phi, double theta, double phi_angle);
Vec sh_synthesize_at(const SHExpansion& phi, const Vec& unit);

// Radial derivatives at r = 1 of the interior / decaying exterior harmonic extensions.
SHExpansion p_int(const SHExpansion& phi);
SHExpansion p_ext(const SHExpansion& phi);
// Phi with (p_ext - p_int) Phi = psi; degree k is divided by -(2k + 1).
SHExpansion dtn_solve(const SHExpansion& psi);
double dtn_eigenvalue(int k);

enum class Side { Interior, Exterior };

// sum_k r^k phi_k inside, sum_k r^{-1-k} phi_k outside. Throws std::domain_error on the
// wrong side of the unit sphere.
Vec harmonic_extension(const SHExpansion& phi, Side side, double r, double theta,
                       double phi_angle);

struct ThetaSplit {
  double collinear = 0.0;  // (1/omega_3) int Phi . Theta
  SHExpansion orthogonal;
};

ThetaSplit split_theta(const SHExpansion& phi);
// The map Theta -> c Theta.
SHExpansion theta_expansion(int max_degree, double c);

// Right-hand sides at one end, both in the end's frame (multiplied by R_j^T):
// value gap and rho_* times the radial-derivative gap, neck minus outer.
struct BoundaryDiscrepancy {
  SHExpansion value;
  SHExpansion conormal;
};

struct MatchCorrection {
  std::vector<SHExpansion> phi;        // outer boundary data, orthogonal to Theta
  std::vector<SHExpansion> phi_tilde;  // neck boundary data, orthogonal to Theta
  Vec delta_alpha;
  Vec delta_beta;
  Vec collinear_u;  // eps (dbeta - dalpha) rho_*^{1-n}
  Vec collinear_v;  // (eps / omega_n) (Gamma dalpha)_j rho_*
  double residual_norm = 0.0;
};

// Linear matching solve for n = 3:
//   phi - phi_tilde = D_perp,  p_ext phi - p_int phi_tilde = E_perp,
//   u - v = -d,  (1 - n) u - v = -e,
// where d, e are the Theta-collinear parts of the discrepancies.
MatchCorrection match_boundaries(const Configuration& config, const Vec& alpha_star,
                                 const std::vector<BoundaryDiscrepancy>& discrepancies);

// The discrepancies produced by a correction; match_boundaries inverts this map.
std::vector<BoundaryDiscrepancy> planted_discrepancies(const Configuration& config,
                                                       const MatchCorrection& correction);

}  // namespace desing
