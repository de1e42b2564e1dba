#include "desing/boundary_matching.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "desing/numerics.hpp"
#include "desing/sphere_integration.hpp"

namespace desing {

namespace {

constexpr double kPi = std::numbers::pi;
const double kThetaScale = std::sqrt(4.0 * kPi / 3.0);

// Column of the degree-1 harmonic matching each Cartesian component of Theta.
int theta_column(int q) { return q == 0 ? sh_index(1, 1) : q == 1 ? sh_index(1, -1) : sh_index(1, 0); }

void check_degree(int max_degree) {
  if (max_degree < 0 || max_degree > kMaxShDegree) {
    std::ostringstream msg;
    msg << "spherical harmonic degree " << max_degree << " outside [0, " << kMaxShDegree << "]";
    throw std::invalid_argument(msg.str());
  }
}

template <typename F>
SHExpansion scale_degrees(const SHExpansion& phi, F factor) {
  SHExpansion out = phi;
  for (int k = 0; k <= phi.max_degree; ++k) {
    const double f = factor(k);
    for (int m = -k; m <= k; ++m) out.coeffs.col(sh_index(k, m)) *= f;
  }
  return out;
}

}  // namespace

Vec real_sh_values(int max_degree, double theta, double phi) {
  check_degree(max_degree);
  Vec out(sh_count(max_degree));
  for (int k = 0; k <= max_degree; ++k) {
    out(sh_index(k, 0)) = std::sph_legendre(k, 0, theta);
    for (int m = 1; m <= k; ++m) {
      // sph_legendre carries (-1)^m; remove it.
      const double p = (m % 2 == 0 ? 1.0 : -1.0) * std::numbers::sqrt2 *
                       std::sph_legendre(k, m, theta);
      out(sh_index(k, m)) = p * std::cos(m * phi);
      out(sh_index(k, -m)) = p * std::sin(m * phi);
    }
  }
  return out;
}

SHExpansion::SHExpansion(int max_degree_) : max_degree(max_degree_) {
  check_degree(max_degree);
  coeffs = Mat::Zero(3, sh_count(max_degree));
}

SHExpansion SHExpansion::operator+(const SHExpansion& other) const {
  if (other.max_degree != max_degree) throw std::invalid_argument("SHExpansion: degree mismatch");
  SHExpansion out = *this;
  out.coeffs += other.coeffs;
  return out;
}

SHExpansion SHExpansion::operator-(const SHExpansion& other) const { return *this + other * -1.0; }

SHExpansion SHExpansion::operator*(double s) const {
  SHExpansion out = *this;
  out.coeffs *= s;
  return out;
}

double SHExpansion::max_abs() const { return coeffs.size() ? coeffs.cwiseAbs().maxCoeff() : 0.0; }

S2Grid S2Grid::make(int n_theta, int n_phi) {
  if (n_theta < 1 || n_phi < 1) throw std::invalid_argument("S2Grid: node counts must be positive");
  S2Grid g;
  auto [x, w] = gauss_legendre(n_theta, -1.0, 1.0);
  for (int i = 0; i < n_theta; ++i) {
    g.theta.push_back(std::acos(x[i]));
    g.weight.push_back(w[i] * 2.0 * kPi / n_phi);
  }
  for (int i = 0; i < n_phi; ++i) g.phi.push_back(2.0 * kPi * i / n_phi);
  return g;
}

S2Grid S2Grid::for_degree(int max_degree) {
  check_degree(max_degree);
  return make(2 * max_degree + 2, 2 * max_degree + 2);
}

Vec S2Grid::point(int node) const {
  const double th = theta[node / n_phi()];
  const double ph = phi[node % n_phi()];
  Vec p(3);
  p << std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th);
  return p;
}

Mat sample_on_grid(const S2Grid& grid, const std::function<Vec(const Vec&)>& f) {
  Mat out(3, grid.size());
  for (int node = 0; node < grid.size(); ++node) out.col(node) = f(grid.point(node));
  return out;
}

SHExpansion sh_analyze(const S2Grid& grid, const Mat& samples, int max_degree) {
  check_degree(max_degree);
  if (grid.n_theta() < max_degree + 1 || grid.n_phi() < 2 * max_degree + 2) {
    std::ostringstream msg;
    msg << "sh_analyze: grid " << grid.n_theta() << " x " << grid.n_phi()
        << " does not resolve degree " << max_degree << " (need " << max_degree + 1 << " x "
        << 2 * max_degree + 2 << ")";
    throw ShResolutionError(msg.str());
  }
  if (samples.rows() != 3 || samples.cols() != grid.size()) {
    throw std::invalid_argument("sh_analyze: samples must be 3 x grid size");
  }
  SHExpansion out(max_degree);
  for (int node = 0; node < grid.size(); ++node) {
    const double th = grid.theta[node / grid.n_phi()];
    const double ph = grid.phi[node % grid.n_phi()];
    const double w = grid.weight[node / grid.n_phi()];
    out.coeffs += (w * samples.col(node)) * real_sh_values(max_degree, th, ph).transpose();
  }
  return out;
}

Vec sh_synthesize(const SHExpansion& phi, double theta, double phi_angle) {
  return phi.coeffs * real_sh_values(phi.max_degree, theta, phi_angle);
}

Vec sh_synthesize_at(const SHExpansion& phi, const Vec& unit) {
  const double theta = std::acos(std::clamp(unit(2), -1.0, 1.0));
  const double phi_angle = std::atan2(unit(1), unit(0));
  return sh_synthesize(phi, theta, phi_angle);
}

SHExpansion p_int(const SHExpansion& phi) {
  return scale_degrees(phi, [](int k) { return static_cast<double>(k); });
}

SHExpansion p_ext(const SHExpansion& phi) {
  return scale_degrees(phi, [](int k) { return -(k + 1.0); });
}

double dtn_eigenvalue(int k) { return -(2.0 * k + 1.0); }

SHExpansion dtn_solve(const SHExpansion& psi) {
  return scale_degrees(psi, [](int k) { return 1.0 / dtn_eigenvalue(k); });
}

Vec harmonic_extension(const SHExpansion& phi, Side side, double r, double theta,
                       double phi_angle) {
  if (!(r > 0.0)) throw std::domain_error("harmonic_extension: radius must be positive");
  if (side == Side::Interior && r > 1.0) {
    throw std::domain_error("harmonic_extension: interior extension needs r <= 1");
  }
  if (side == Side::Exterior && r < 1.0) {
    throw std::domain_error("harmonic_extension: exterior extension needs r >= 1");
  }
  Vec y = real_sh_values(phi.max_degree, theta, phi_angle);
  for (int k = 0; k <= phi.max_degree; ++k) {
    const double f = side == Side::Interior ? std::pow(r, k) : std::pow(r, -1.0 - k);
    for (int m = -k; m <= k; ++m) y(sh_index(k, m)) *= f;
  }
  return phi.coeffs * y;
}

SHExpansion theta_expansion(int max_degree, double c) {
  SHExpansion out(max_degree);
  if (max_degree < 1) throw std::invalid_argument("theta_expansion: Theta needs degree >= 1");
  for (int q = 0; q < 3; ++q) out.coeffs(q, theta_column(q)) = c * kThetaScale;
  return out;
}

ThetaSplit split_theta(const SHExpansion& phi) {
  if (phi.max_degree < 1) return {0.0, phi};
  double acc = 0.0;
  for (int q = 0; q < 3; ++q) acc += phi.coeffs(q, theta_column(q));
  const double c = acc * kThetaScale / omega_n(3);
  return {c, phi - theta_expansion(phi.max_degree, c)};
}

namespace {

void check_match_inputs(const Configuration& config, const Vec& alpha_star, std::size_t ends) {
  if (config.n != 3) throw std::invalid_argument("match_boundaries: implemented for n = 3 only");
  if (alpha_star.size() != config.k() || static_cast<int>(ends) != config.k()) {
    throw std::invalid_argument("match_boundaries: need one alpha and one discrepancy per end");
  }
}

}  // namespace

MatchCorrection match_boundaries(const Configuration& config, const Vec& alpha_star,
                                 const std::vector<BoundaryDiscrepancy>& discrepancies) {
  check_match_inputs(config, alpha_star, discrepancies.size());
  const int k = config.k();
  const int n = config.n;
  const int L = discrepancies.empty() ? 1 : discrepancies.front().value.max_degree;
  for (const auto& d : discrepancies) {
    if (d.value.max_degree != L || d.conormal.max_degree != L) {
      throw std::invalid_argument("match_boundaries: discrepancies must share one degree");
    }
  }
  if (L < 1) throw std::invalid_argument("match_boundaries: degree must be at least 1");

  const Mat gamma = gamma_matrix(config);
  Eigen::JacobiSVD<Mat> svd(gamma, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double rcond = sv(0) > 0.0 ? sv(sv.size() - 1) / sv(0) : 0.0;
  if (!(rcond > kH2RcondCut)) {
    std::ostringstream msg;
    msg << "match_boundaries: Gamma is singular (rcond " << rcond << ")";
    throw std::domain_error(msg.str());
  }

  const double eps = config.epsilon;
  const double rho = config.rho_star;
  MatchCorrection out;
  out.phi.assign(k, SHExpansion(L));
  out.phi_tilde.assign(k, SHExpansion(L));
  out.collinear_u = Vec::Zero(k);
  out.collinear_v = Vec::Zero(k);

  parallel_for(static_cast<std::size_t>(k), [&](std::size_t j) {
    const ThetaSplit dv = split_theta(discrepancies[j].value);
    const ThetaSplit de = split_theta(discrepancies[j].conormal);
    // phi - phi~ = D, p_ext phi - p_int phi~ = E  =>  (p_ext - p_int) phi = E - p_int D
    out.phi[j] = dtn_solve(de.orthogonal - p_int(dv.orthogonal));
    out.phi_tilde[j] = out.phi[j] - dv.orthogonal;
    out.collinear_u(j) = (de.collinear - dv.collinear) / n;
    out.collinear_v(j) = (de.collinear + (n - 1.0) * dv.collinear) / n;
  });

  out.delta_alpha = svd.solve(out.collinear_v * (omega_n(n) / (eps * rho)));
  out.delta_beta = out.delta_alpha + out.collinear_u * (std::pow(rho, n - 1.0) / eps);

  const auto back = planted_discrepancies(config, out);
  for (int j = 0; j < k; ++j) {
    out.residual_norm = std::max({out.residual_norm, (back[j].value - discrepancies[j].value).max_abs(),
                                  (back[j].conormal - discrepancies[j].conormal).max_abs()});
  }
  return out;
}

std::vector<BoundaryDiscrepancy> planted_discrepancies(const Configuration& config,
                                                       const MatchCorrection& correction) {
  const int k = config.k();
  const int n = config.n;
  if (n != 3) throw std::invalid_argument("planted_discrepancies: implemented for n = 3 only");
  if (static_cast<int>(correction.phi.size()) != k || correction.delta_alpha.size() != k ||
      correction.delta_beta.size() != k) {
    throw std::invalid_argument("planted_discrepancies: correction has the wrong number of ends");
  }
  const double eps = config.epsilon;
  const double rho = config.rho_star;
  const Vec v = gamma_matrix(config) * correction.delta_alpha * (eps * rho / omega_n(n));
  const Vec u = (correction.delta_beta - correction.delta_alpha) * (eps * std::pow(rho, 1.0 - n));

  std::vector<BoundaryDiscrepancy> out;
  for (int j = 0; j < k; ++j) {
    const SHExpansion& phi = correction.phi[j];
    const SHExpansion& phi_t = correction.phi_tilde[j];
    const int L = phi.max_degree;
    // u - v = -d, (1 - n) u - v = -e
    out.push_back({phi - phi_t + theta_expansion(L, v(j) - u(j)),
                   p_ext(phi) - p_int(phi_t) + theta_expansion(L, v(j) + (n - 1.0) * u(j))});
  }
  return out;
}

}  // namespace desing
