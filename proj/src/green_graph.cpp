#include "desing/green_graph.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace desing {

GreenData::GreenData(Configuration config_, Vec alpha_)
    : config(std::move(config_)), alpha(std::move(alpha_)) {
  validate(config);
  if (alpha.size() != config.k()) {
    throw std::invalid_argument("GreenData: alpha must have one entry per point");
  }
  if (!alpha.allFinite()) throw std::invalid_argument("GreenData: alpha must be finite");
}

namespace {

double distance_checked(const Vec& u, int j) {
  const double r = u.norm();
  if (!(r > kSingularDistance)) {
    std::ostringstream msg;
    msg << "Green function evaluated at the singular point x_" << j;
    throw SingularPointError(msg.str());
  }
  return r;
}

// u / |u|^n
Vec kernel(const Vec& u, double r, int n) { return u * std::pow(r, -n); }

// d/du_b (u_i r^{-n}) = delta_ib r^{-n} - n u_i u_b r^{-n-2}
Mat kernel_jacobian(const Vec& u, double r, int n) {
  const int dim = static_cast<int>(u.size());
  return std::pow(r, -n) * (Mat::Identity(dim, dim) - n * (u * u.transpose()) / (r * r));
}

std::vector<Mat> kernel_hessian(const Vec& u, double r, int n) {
  const int dim = static_cast<int>(u.size());
  const double c2 = n * std::pow(r, -n - 2);
  const double c4 = n * (n + 2.0) * std::pow(r, -n - 4);
  std::vector<Mat> out(dim, Mat::Zero(dim, dim));
  for (int a = 0; a < dim; ++a) {
    for (int i = 0; i < dim; ++i) {
      for (int b = 0; b < dim; ++b) {
        double v = c4 * u(i) * u(a) * u(b);
        if (i == b) v -= c2 * u(a);
        if (i == a) v -= c2 * u(b);
        if (a == b) v -= c2 * u(i);
        out[a](i, b) = v;
      }
    }
  }
  return out;
}

}  // namespace

Vec green_eval(const GreenData& data, const Vec& x) {
  const auto& c = data.config;
  Vec g = c.a0 * x;
  for (int j = 0; j < c.k(); ++j) {
    const Vec u = x - c.points[j];
    g += data.alpha(j) * (c.rotations[j] * kernel(u, distance_checked(u, j), c.n));
  }
  return g;
}

Mat green_jacobian(const GreenData& data, const Vec& x) {
  const auto& c = data.config;
  Mat jac = c.a0;
  for (int j = 0; j < c.k(); ++j) {
    const Vec u = x - c.points[j];
    jac += data.alpha(j) * (c.rotations[j] * kernel_jacobian(u, distance_checked(u, j), c.n));
  }
  return jac;
}

std::vector<Mat> green_hessian(const GreenData& data, const Vec& x) {
  const auto& c = data.config;
  std::vector<Mat> hess(c.n, Mat::Zero(c.n, c.n));
  for (int j = 0; j < c.k(); ++j) {
    const Vec u = x - c.points[j];
    const auto kh = kernel_hessian(u, distance_checked(u, j), c.n);
    for (int a = 0; a < c.n; ++a) hess[a] += data.alpha(j) * (c.rotations[j] * kh[a]);
  }
  return hess;
}

Vec green_regular_part(const GreenData& data, int j0, const Vec& x) {
  const auto& c = data.config;
  Vec g = c.a0 * x;
  for (int j = 0; j < c.k(); ++j) {
    if (j == j0) continue;
    const Vec u = x - c.points[j];
    g += data.alpha(j) * (c.rotations[j] * kernel(u, distance_checked(u, j), c.n));
  }
  return g;
}

Vec neck_offset(const GreenData& data, int j0) {
  return green_regular_part(data, j0, data.config.points[j0]);
}

double predicted_linear_coeff(const GreenData& data, int j0) {
  const auto& c = data.config;
  double acc = -lambda_vector(c)(j0);
  for (int j = 0; j < c.k(); ++j) {
    if (j != j0) acc += gamma_entry(c, j0, j) * data.alpha(j);
  }
  return acc / omega_n(c.n);
}

namespace {

struct FitResult {
  Vec coeffs;
  double condition;
};

FitResult fit_expansion(const std::vector<double>& values, const Mat& design) {
  // Column scaling: every basis function normalised to unit norm over the radii.
  Vec scale = design.colwise().norm().transpose();
  for (int c = 0; c < scale.size(); ++c) {
    if (!(scale(c) > 0.0)) scale(c) = 1.0;
  }
  const Mat scaled = design * scale.cwiseInverse().asDiagonal();
  Eigen::JacobiSVD<Mat> svd(scaled, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double cond = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1)
                                              : std::numeric_limits<double>::infinity();
  Vec rhs = Eigen::Map<const Vec>(values.data(), static_cast<Eigen::Index>(values.size()));
  const Vec y = svd.solve(rhs);
  return {y.cwiseQuotient(scale), cond};
}

// One-column fit on rho^{1-n}: the j0 self term has no other component.
Vec fit_singular(const std::vector<double>& values, const Mat& design) {
  const Vec col = design.col(0);
  const Vec y = Eigen::Map<const Vec>(values.data(), static_cast<Eigen::Index>(values.size()));
  Vec out = Vec::Zero(design.cols());
  out(0) = col.dot(y) / col.squaredNorm();
  return out;
}

Mat expansion_design(const std::vector<double>& radii, int n) {
  Mat design(static_cast<Eigen::Index>(radii.size()), 4);
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const double r = radii[i];
    design.row(static_cast<Eigen::Index>(i)) << std::pow(r, 1.0 - n), 1.0, r, r * r;
  }
  return design;
}

}  // namespace

ExpansionProbe expansion_probe(const GreenData& data, int j0, const std::vector<double>& radii,
                               const QuadratureRule& rule) {
  const auto& c = data.config;
  if (j0 < 0 || j0 >= c.k()) throw std::out_of_range("expansion_probe: end index out of range");
  if (rule.n() != c.n) throw std::invalid_argument("expansion_probe: quadrature dimension mismatch");
  if (radii.size() < 4) throw std::invalid_argument("expansion_probe: need at least four radii");
  double dmin = std::numeric_limits<double>::infinity();
  for (int j = 0; j < c.k(); ++j) {
    if (j != j0) dmin = std::min(dmin, (c.points[j] - c.points[j0]).norm());
  }
  for (double r : radii) {
    if (!(r > 0.0) || !(r < 0.5 * dmin)) {
      std::ostringstream msg;
      msg << "expansion_probe: radius " << r << " must lie in (0, " << 0.5 * dmin << ")";
      throw std::invalid_argument(msg.str());
    }
  }

  const Mat& r0 = c.rotations[j0];
  const double w = 1.0 / omega_n(c.n);
  const std::size_t m = radii.size();
  std::vector<double> singular(m), regular(m);
  // sphere means of G per component, again split into the two channels
  std::vector<std::vector<double>> mean_singular(c.n, std::vector<double>(m));
  std::vector<std::vector<double>> mean_regular(c.n, std::vector<double>(m));
  for (std::size_t i = 0; i < m; ++i) {
    const double rho = radii[i];
    const double amp = data.alpha(j0) * std::pow(rho, 1.0 - c.n);
    singular[i] = w * integrate(rule, [&](const Vec& th) { return amp * th.squaredNorm(); }).value;
    regular[i] = w * integrate(rule, [&](const Vec& th) {
                       return green_regular_part(data, j0, c.points[j0] + rho * th).dot(r0 * th);
                     }).value;
    for (int q = 0; q < c.n; ++q) {
      mean_singular[q][i] =
          w * integrate(rule, [&](const Vec& th) { return amp * (r0 * th)(q); }).value;
      mean_regular[q][i] = w * integrate(rule, [&](const Vec& th) {
                             return green_regular_part(data, j0, c.points[j0] + rho * th)(q);
                           }).value;
    }
  }

  const Mat design = expansion_design(radii, c.n);
  const FitResult fr = fit_expansion(regular, design);
  if (!(fr.condition <= kFitConditionLimit)) {
    std::ostringstream msg;
    msg << "expansion_probe: radii too close for a stable fit (condition " << fr.condition << ")";
    throw std::invalid_argument(msg.str());
  }
  const Vec coeffs = fit_singular(singular, design) + fr.coeffs;
  Vec constant(c.n);
  for (int q = 0; q < c.n; ++q) {
    constant(q) = fit_singular(mean_singular[q], design)(1) +
                  fit_expansion(mean_regular[q], design).coeffs(1);
  }

  ExpansionProbe out;
  out.singular_coeff = coeffs(0);
  out.linear_coeff = coeffs(2);
  out.constant_vec = constant;
  out.condition = fr.condition;
  out.radii = radii;
  for (std::size_t i = 0; i < radii.size(); ++i) out.projections.push_back(singular[i] + regular[i]);
  return out;
}

std::vector<double> default_probe_radii(const Configuration& config) {
  double dmin = 1.0;
  for (int j = 0; j < config.k(); ++j)
    for (int jp = j + 1; jp < config.k(); ++jp)
      dmin = std::min(dmin, (config.points[j] - config.points[jp]).norm());
  const double r = 1e-3 * dmin;
  return {r, r / 2, r / 4, r / 8};
}

Vec balance_residual(const GreenData& data, const std::vector<double>& radii,
                     const QuadratureRule& rule) {
  Vec out(data.config.k());
  for (int j = 0; j < data.config.k(); ++j) {
    out(j) = std::abs(expansion_probe(data, j, radii, rule).linear_coeff);
  }
  return out;
}

Vec balance_residual(const GreenData& data) {
  return balance_residual(
      data, default_probe_radii(data.config),
      QuadratureRule::default_for(data.config.n, data.config.settings.seed));
}

ImmersionPatch graph_patch(const GreenData& data, const Grid& grid, double epsilon,
                           double exclusion) {
  const auto& c = data.config;
  if (grid.rank() != c.n) throw std::invalid_argument("graph_patch: grid rank must equal n");
  if (!(exclusion > 0.0)) throw std::invalid_argument("graph_patch: exclusion radius must be positive");
  return ImmersionPatch::sample(grid, 2 * c.n, [&](const Vec& x) -> std::optional<Vec> {
    for (const Vec& p : c.points) {
      if ((x - p).norm() < exclusion) return std::nullopt;
    }
    return stack(x, epsilon * green_eval(data, x));
  });
}

Vec graph_mean_curvature(const GreenData& data, double epsilon, const Vec& x) {
  const int n = data.config.n;
  Mat tangents(2 * n, n);
  tangents.topRows(n) = Mat::Identity(n, n);
  tangents.bottomRows(n) = epsilon * green_jacobian(data, x);
  const auto hess = green_hessian(data, x);
  std::vector<Mat> second(n, Mat::Zero(2 * n, n));
  for (int a = 0; a < n; ++a) second[a].bottomRows(n) = epsilon * hess[a];
  return mean_curvature_from_jet(tangents, second);
}

}  // namespace desing
