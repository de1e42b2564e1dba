#include <cmath>
#include <numbers>
#include <random>

#include <doctest.h>

#include "desing/boundary_matching.hpp"
#include "desing/sphere_integration.hpp"
#include "test_support.hpp"

using namespace desing;

namespace {

SHExpansion random_expansion(int L, std::mt19937_64& rng, int min_degree = 0) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  SHExpansion out(L);
  for (int k = min_degree; k <= L; ++k)
    for (int m = -k; m <= k; ++m)
      for (int q = 0; q < 3; ++q) out.coeffs(q, sh_index(k, m)) = u(rng);
  return out;
}

SHExpansion only_degree(const SHExpansion& phi, int k) {
  SHExpansion out(phi.max_degree);
  for (int m = -k; m <= k; ++m) out.coeffs.col(sh_index(k, m)) = phi.coeffs.col(sh_index(k, m));
  return out;
}

double degree_norm(const SHExpansion& phi, int k) {
  double s = 0.0;
  for (int m = -k; m <= k; ++m) s += phi.coeffs.col(sh_index(k, m)).squaredNorm();
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("real harmonics are orthonormal under the grid rule") {
  const int L = 6;
  const S2Grid grid = S2Grid::for_degree(L);
  Mat gram = Mat::Zero(sh_count(L), sh_count(L));
  for (int node = 0; node < grid.size(); ++node) {
    const Vec y = real_sh_values(L, grid.theta[node / grid.n_phi()], grid.phi[node % grid.n_phi()]);
    gram += grid.weight[node / grid.n_phi()] * y * y.transpose();
  }
  CHECK((gram - Mat::Identity(sh_count(L), sh_count(L))).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("sh_analyze: constant and Theta maps") {
  const int L = 8;
  const S2Grid grid = S2Grid::for_degree(L);
  Vec c(3);
  c << 1.5, -2.0, 0.25;
  const SHExpansion cst = sh_analyze(grid, sample_on_grid(grid, [&](const Vec&) { return c; }), L);
  CHECK((cst.coeffs.col(0) - c * std::sqrt(4 * std::numbers::pi)).norm() < 1e-12);
  CHECK((cst.coeffs.rightCols(sh_count(L) - 1)).cwiseAbs().maxCoeff() < 1e-13);

  const SHExpansion th = sh_analyze(grid, sample_on_grid(grid, [](const Vec& t) { return t; }), L);
  CHECK((th - theta_expansion(L, 1.0)).max_abs() < 1e-13);
  for (int k = 0; k <= L; ++k) {
    if (k != 1) CHECK(degree_norm(th, k) < 1e-13);
  }
}

TEST_CASE("sh round trip on random band-limited data") {
  std::mt19937_64 rng(11);
  const int L = 8;
  const S2Grid grid = S2Grid::for_degree(L);
  const SHExpansion phi = random_expansion(L, rng);
  const Mat samples = sample_on_grid(grid, [&](const Vec& t) { return sh_synthesize_at(phi, t); });
  CHECK((sh_analyze(grid, samples, L) - phi).max_abs() < 1e-10);
  // the minimal grid also resolves it
  const S2Grid tight = S2Grid::make(L + 1, 2 * L + 2);
  const Mat s2 = sample_on_grid(tight, [&](const Vec& t) { return sh_synthesize_at(phi, t); });
  CHECK((sh_analyze(tight, s2, L) - phi).max_abs() < 1e-10);
}

TEST_CASE("sh_analyze rejects under-resolved grids") {
  const int L = 8;
  const S2Grid coarse = S2Grid::make(L, 2 * L + 2);
  CHECK_THROWS_AS(sh_analyze(coarse, Mat::Zero(3, coarse.size()), L), ShResolutionError);
  const S2Grid narrow = S2Grid::make(L + 1, 2 * L + 1);
  CHECK_THROWS_AS(sh_analyze(narrow, Mat::Zero(3, narrow.size()), L), ShResolutionError);
  CHECK_THROWS(SHExpansion(kMaxShDegree + 1));
}

TEST_CASE("Dirichlet-to-Neumann eigenvalues") {
  std::mt19937_64 rng(3);
  const int L = 8;
  const SHExpansion phi = random_expansion(L, rng);
  CHECK(p_int(only_degree(phi, 0)).max_abs() == 0.0);
  const SHExpansion d1 = only_degree(phi, 1);
  CHECK((p_ext(d1) - d1 * -2.0).max_abs() < 1e-15);
  const SHExpansion d2 = only_degree(phi, 2);
  CHECK((p_ext(d2) - p_int(d2) - d2 * -5.0).max_abs() < 1e-14);
  // unit coefficients: integer arithmetic, so the eigenvalues come out exactly
  for (int k = 0; k <= L; ++k) {
    for (int m = -k; m <= k; ++m) {
      SHExpansion e(L);
      e.coeffs(1, sh_index(k, m)) = 1.0;
      const SHExpansion diff = p_ext(e) - p_int(e);
      CHECK(diff.coeffs(1, sh_index(k, m)) == -(2.0 * k + 1.0));
      CHECK(diff.coeffs.cwiseAbs().sum() == 2.0 * k + 1.0);
    }
    CHECK(dtn_eigenvalue(k) == -(2.0 * k + 1.0));
  }
  CHECK(dtn_solve(SHExpansion::zero(L)).max_abs() == 0.0);
  const SHExpansion d0 = only_degree(phi, 0);
  CHECK((dtn_solve(d0) + d0).max_abs() == 0.0);
  const SHExpansion back = p_ext(dtn_solve(phi)) - p_int(dtn_solve(phi));
  CHECK((back - phi).max_abs() < 1e-12);
}

TEST_CASE("harmonic extensions") {
  std::mt19937_64 rng(5);
  const int L = 6;
  const SHExpansion phi = random_expansion(L, rng);
  const double th = 1.1, ph = 0.4;
  const Vec on = sh_synthesize(phi, th, ph);
  CHECK((harmonic_extension(phi, Side::Interior, 1.0, th, ph) - on).norm() < 1e-13);
  CHECK((harmonic_extension(phi, Side::Exterior, 1.0, th, ph) - on).norm() < 1e-13);

  const SHExpansion d1 = only_degree(phi, 1);
  CHECK((harmonic_extension(d1, Side::Exterior, 2.0, th, ph) - 0.25 * sh_synthesize(d1, th, ph))
            .norm() < 1e-14);
  CHECK(harmonic_extension(phi, Side::Exterior, 1e6, th, ph).norm() < 1e-5);
  CHECK_THROWS_AS(harmonic_extension(phi, Side::Interior, 1.5, th, ph), std::domain_error);
  CHECK_THROWS_AS(harmonic_extension(phi, Side::Exterior, 0.5, th, ph), std::domain_error);

  // radial derivative at r = 1 against the DtN multipliers
  const double h = 2e-6;
  const Vec fd_int2 = (3 * harmonic_extension(phi, Side::Interior, 1.0, th, ph) -
                       4 * harmonic_extension(phi, Side::Interior, 1.0 - h, th, ph) +
                       harmonic_extension(phi, Side::Interior, 1.0 - 2 * h, th, ph)) / (2 * h);
  const Vec fd_ext2 = (-3 * harmonic_extension(phi, Side::Exterior, 1.0, th, ph) +
                       4 * harmonic_extension(phi, Side::Exterior, 1.0 + h, th, ph) -
                       harmonic_extension(phi, Side::Exterior, 1.0 + 2 * h, th, ph)) / (2 * h);
  CHECK((fd_int2 - sh_synthesize(p_int(phi), th, ph)).norm() < 1e-8);
  CHECK((fd_ext2 - sh_synthesize(p_ext(phi), th, ph)).norm() < 1e-8);
}

TEST_CASE("harmonic extension has an O(h^2) finite-difference Laplacian") {
  std::mt19937_64 rng(9);
  const int L = 5;
  const SHExpansion phi = random_expansion(L, rng);
  auto eval = [&](const Vec& x, Side side) {
    const double r = x.norm();
    return harmonic_extension(phi, side, r, std::acos(x(2) / r), std::atan2(x(1), x(0)));
  };
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (Side side : {Side::Interior, Side::Exterior}) {
    for (int trial = 0; trial < 5; ++trial) {
      Vec x(3);
      do {
        for (int a = 0; a < 3; ++a) x(a) = u(rng) * (side == Side::Interior ? 0.6 : 2.0);
      } while (side == Side::Interior ? x.norm() > 0.6 || x.norm() < 0.2
                                      : x.norm() < 1.5 || x.norm() > 2.0);
      double prev = 0.0;
      for (double h : {1e-2, 5e-3}) {
        Vec lap = -6.0 * eval(x, side);
        for (int a = 0; a < 3; ++a) {
          Vec e = Vec::Unit(3, a) * h;
          lap += eval(x + e, side) + eval(x - e, side);
        }
        const double res = (lap / (h * h)).norm();
        if (h < 1e-2) CHECK(res < prev / 3.0);
        prev = res;
      }
    }
  }
}

TEST_CASE("split_theta") {
  std::mt19937_64 rng(21);
  const int L = 8;
  const ThetaSplit s1 = split_theta(theta_expansion(L, 2.5));
  CHECK(s1.collinear == doctest::Approx(2.5).epsilon(1e-14));
  CHECK(s1.orthogonal.max_abs() < 1e-14);

  const SHExpansion phi = random_expansion(L, rng);
  const ThetaSplit s = split_theta(phi);
  CHECK((s.orthogonal + theta_expansion(L, s.collinear) - phi).max_abs() < 1e-12);
  CHECK(std::abs(split_theta(s.orthogonal).collinear) < 1e-12);
  const ThetaSplit s2 = split_theta(s.orthogonal);
  CHECK(std::abs(s2.collinear) < 1e-12);
  CHECK((s2.orthogonal - s.orthogonal).max_abs() < 1e-12);

  // collinear part equals (1/omega) int Phi . Theta by quadrature
  const QuadratureRule rule = QuadratureRule::product_gauss(3, 24);
  const double direct =
      integrate(rule, [&](const Vec& t) { return sh_synthesize_at(phi, t).dot(t); }).value /
      omega_n(3);
  CHECK(s.collinear == doctest::Approx(direct).epsilon(1e-11));
}

TEST_CASE("match_boundaries: zero, collinear-only and linearity") {
  std::mt19937_64 rng(33);
  const Configuration cfg = test_support::flagship(1e-4, 0.5);
  const Vec alpha = (Vec(2) << 4.0, 12.0).finished();
  const int L = 8;
  std::vector<BoundaryDiscrepancy> zero(2, {SHExpansion(L), SHExpansion(L)});
  const MatchCorrection z = match_boundaries(cfg, alpha, zero);
  CHECK(z.delta_alpha.norm() == 0.0);
  CHECK(z.delta_beta.norm() == 0.0);
  for (int j = 0; j < 2; ++j) CHECK(z.phi[j].max_abs() + z.phi_tilde[j].max_abs() == 0.0);

  // A collinear value gap at one end that Gamma sees as a change of beta alone:
  // d = -u, e = -(1-n) u with v = 0 gives dbeta = u rho^{n-1}/eps and dalpha = 0.
  const double eps = cfg.epsilon, rho = cfg.rho_star;
  const double u = 3e-3;
  std::vector<BoundaryDiscrepancy> col(2, {SHExpansion(L), SHExpansion(L)});
  col[0].value = theta_expansion(L, -u);
  col[0].conormal = theta_expansion(L, 2.0 * u);
  const MatchCorrection c = match_boundaries(cfg, alpha, col);
  CHECK(c.delta_alpha.norm() < 1e-12);
  CHECK(c.delta_beta(0) == doctest::Approx(u * rho * rho / eps).epsilon(1e-12));
  CHECK(std::abs(c.delta_beta(1)) < 1e-12);
  for (int j = 0; j < 2; ++j) CHECK(c.phi[j].max_abs() + c.phi_tilde[j].max_abs() < 1e-15);
  // closed-form 2x2 inverse, determinant -n
  const double d = -0.7e-3, e = 1.9e-3;
  col[0].value = theta_expansion(L, d);
  col[0].conormal = theta_expansion(L, e);
  const MatchCorrection c2 = match_boundaries(cfg, alpha, col);
  // [[1, -1], [-2, -1]] (u, v) = (-d, -e)
  const double det = -3.0;
  CHECK(c2.collinear_u(0) == doctest::Approx((-1.0 * -d + 1.0 * -e) / det).epsilon(1e-12));
  CHECK(c2.collinear_v(0) == doctest::Approx((2.0 * -d + 1.0 * -e) / det).epsilon(1e-12));

  std::vector<BoundaryDiscrepancy> rnd;
  for (int j = 0; j < 2; ++j) rnd.push_back({random_expansion(L, rng), random_expansion(L, rng)});
  const MatchCorrection a = match_boundaries(cfg, alpha, rnd);
  auto scaled = rnd;
  for (auto& r : scaled) r = {r.value * -2.5, r.conormal * -2.5};
  const MatchCorrection b = match_boundaries(cfg, alpha, scaled);
  CHECK((b.delta_alpha + 2.5 * a.delta_alpha).norm() < 1e-12 * (1 + a.delta_alpha.norm()));
  CHECK((b.delta_beta + 2.5 * a.delta_beta).norm() < 1e-12 * (1 + a.delta_beta.norm()));
  for (int j = 0; j < 2; ++j) {
    CHECK((b.phi[j] + a.phi[j] * 2.5).max_abs() < 1e-12);
    CHECK((b.phi_tilde[j] + a.phi_tilde[j] * 2.5).max_abs() < 1e-12);
    CHECK(std::abs(split_theta(a.phi[j]).collinear) < 1e-12);
    CHECK(std::abs(split_theta(a.phi_tilde[j]).collinear) < 1e-12);
  }
  CHECK(a.residual_norm < 1e-12);
}

TEST_CASE("match_boundaries: plant and recover") {
  std::mt19937_64 rng(77);
  const Configuration cfg = test_support::flagship(1e-4, 0.5);
  const Vec alpha = (Vec(2) << 4.0, 12.0).finished();
  const int L = 8;
  std::normal_distribution<double> g;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    MatchCorrection planted;
    for (int j = 0; j < 2; ++j) {
      planted.phi.push_back(split_theta(random_expansion(L, rng)).orthogonal);
      planted.phi_tilde.push_back(split_theta(random_expansion(L, rng)).orthogonal);
    }
    planted.delta_alpha = Vec::NullaryExpr(2, [&] { return g(rng); });
    planted.delta_beta = Vec::NullaryExpr(2, [&] { return g(rng); });
    const auto rhs = planted_discrepancies(cfg, planted);
    const MatchCorrection got = match_boundaries(cfg, alpha, rhs);
    worst = std::max({worst, (got.delta_alpha - planted.delta_alpha).cwiseAbs().maxCoeff(),
                      (got.delta_beta - planted.delta_beta).cwiseAbs().maxCoeff()});
    for (int j = 0; j < 2; ++j) {
      worst = std::max({worst, (got.phi[j] - planted.phi[j]).max_abs(),
                        (got.phi_tilde[j] - planted.phi_tilde[j]).max_abs()});
    }
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("match_boundaries input checks") {
  Configuration cfg = test_support::flagship();
  const Vec alpha = (Vec(2) << 4.0, 12.0).finished();
  std::vector<BoundaryDiscrepancy> one(1, {SHExpansion(4), SHExpansion(4)});
  CHECK_THROWS_AS(match_boundaries(cfg, alpha, one), std::invalid_argument);
  std::vector<BoundaryDiscrepancy> mixed = {{SHExpansion(4), SHExpansion(4)},
                                            {SHExpansion(5), SHExpansion(5)}};
  CHECK_THROWS_AS(match_boundaries(cfg, alpha, mixed), std::invalid_argument);
  // equal rotations make Gamma vanish
  Configuration degenerate = cfg;
  degenerate.rotations[1] = degenerate.rotations[0];
  std::vector<BoundaryDiscrepancy> two(2, {SHExpansion(4), SHExpansion(4)});
  CHECK_THROWS_AS(match_boundaries(degenerate, alpha, two), std::domain_error);
}
