#include "desing/lawlor_neck.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "desing/numerics.hpp"

namespace desing {

namespace {

constexpr double kPi = std::numbers::pi;

void require_interior(double s, int n) {
  if (!(s > 0.0 && s < kPi / n)) {
    std::ostringstream msg;
    msg << "s = " << s << " outside (0, pi/" << n << ")";
    throw std::domain_error(msg.str());
  }
}

}  // namespace

NeckParams::NeckParams(int n, double beta, double epsilon)
    : NeckParams(n, beta, epsilon, Mat::Identity(n, n), AmbientPoint::zero(n)) {}

NeckParams::NeckParams(int n_, double beta_, double epsilon_, Mat rotation_,
                       AmbientPoint translation_)
    : n(n_),
      beta(beta_),
      epsilon(epsilon_),
      rotation(std::move(rotation_)),
      translation(std::move(translation_)) {
  validate();
}

double NeckParams::scale() const { return std::pow(n * beta * epsilon, 1.0 / n); }

void NeckParams::validate() const {
  if (n < 2) throw std::invalid_argument("NeckParams: n must be at least 2");
  if (!(beta > 0.0) || !(epsilon > 0.0)) {
    throw std::invalid_argument("NeckParams: beta and epsilon must be positive");
  }
  if (rotation.rows() != n || rotation.cols() != n || check_orthogonal(rotation) >= 1e-10) {
    throw std::invalid_argument("NeckParams: rotation must be an orthogonal n x n matrix");
  }
  if (translation.dim() != n) throw std::invalid_argument("NeckParams: translation dimension");
}

NeckParams unit_neck(int n) { return NeckParams(n, 1.0 / n, 1.0); }

AmbientPoint neck_point_at(const NeckParams& params, double s, const Vec& theta) {
  const int n = params.n;
  require_interior(s, n);
  const double radial = params.scale() / std::pow(std::sin(n * s), 1.0 / n);
  return AmbientPoint(radial * std::cos(s) * theta + params.translation.x(),
                      radial * std::sin(s) * (params.rotation * theta) + params.translation.y());
}

AmbientPoint neck_point(const NeckParams& params, double s, std::span<const double> angles) {
  return neck_point_at(params, s, sphere_point(angles, params.n));
}

double s_to_t(double s, int n) {
  require_interior(s, n);
  return std::log(std::tan(0.5 * n * s)) / n;
}

double t_to_s(double t, int n) {
  if (!std::isfinite(t)) throw std::domain_error("t_to_s: t must be finite");
  const double s = 2.0 / n * std::atan(std::exp(n * t));
  require_interior(s, n);
  return s;
}

double radius_of_s(const NeckParams& params, double s) {
  require_interior(s, params.n);
  return params.scale() * std::cos(s) / std::pow(std::sin(params.n * s), 1.0 / params.n);
}

double radius_branch_minimum(int n) {
  if (n < 2) throw std::invalid_argument("radius_branch_minimum: n must be at least 2");
  const double hi = kPi / n;
  const auto r = [n](double s) { return std::cos(s) / std::pow(std::sin(n * s), 1.0 / n); };
  return golden_section_min(r, 1e-9 * hi, (1.0 - 1e-12) * hi, 1e-15);
}

double s_of_radius(const NeckParams& params, double radius) {
  const double s_min = radius_branch_minimum(params.n);
  const double r_min = radius_of_s(params, s_min);
  if (!(radius > r_min)) {
    std::ostringstream msg;
    msg << "neck too large for requested radius: " << radius << " <= branch minimum " << r_min;
    throw std::domain_error(msg.str());
  }
  const auto gap = [&](double s) {
    if (s <= 0.0) return 1.0;  // radius -> infinity at s -> 0
    return radius_of_s(params, s) - radius;
  };
  return bisect(gap, 0.0, s_min);
}

double asymptote_residual(const NeckParams& params, std::span<const double> rhos,
                          std::span<const Vec> thetas) {
  const int n = params.n;
  const double floor = 2.0 * params.scale();
  double sup = 0.0;
  for (double rho : rhos) {
    if (rho < floor) {
      std::ostringstream msg;
      msg << "asymptote_residual: rho = " << rho << " enters the waist (need >= " << floor << ")";
      throw std::domain_error(msg.str());
    }
    const double s = s_of_radius(params, rho);
    const double graph_height = params.epsilon * params.beta * std::pow(rho, 1.0 - n);
    for (const Vec& theta : thetas) {
      const AmbientPoint neck = neck_point_at(params, s, theta);
      const Vec gx = rho * theta + params.translation.x();
      const Vec gy = graph_height * (params.rotation * theta) + params.translation.y();
      const double gap = std::sqrt((neck.x() - gx).squaredNorm() + (neck.y() - gy).squaredNorm());
      sup = std::max(sup, gap);
    }
  }
  return sup;
}

NormalField::NormalField(Grid grid, int n)
    : grid_(std::move(grid)),
      n_(n),
      f_(grid_.size(), 0.0),
      t_(grid_.size() * static_cast<std::size_t>(n), 0.0),
      valid_(grid_.size(), 0) {
  if (grid_.rank() != n) throw std::invalid_argument("NormalField: grid rank must equal n");
}

Eigen::Map<const Vec> NormalField::tangent(std::size_t node) const {
  return Eigen::Map<const Vec>(t_.data() + node * n_, n_);
}

void NormalField::set(std::size_t node, double f, const Vec& tangent) {
  f_[node] = f;
  std::copy(tangent.data(), tangent.data() + n_, t_.begin() + node * n_);
  valid_[node] = 1;
}

double NormalField::sup_norm() const {
  double sup = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    if (valid(i)) sup = std::max(sup, std::abs(f_[i]) + tangent(i).norm());
  }
  return sup;
}

bool near_pole(const Grid& grid, std::size_t node, int n) {
  const auto idx = grid.multi_index(node);
  for (int j = 0; j + 1 < n - 1; ++j) {  // polar angles only; the azimuth has no pole
    const int axis = j + 1;
    const double a = grid.coordinate(axis, idx[axis]);
    const double margin = 2.0 * grid.spacing(axis);
    if (a < margin || a > kPi - margin) return true;
  }
  return false;
}

std::pair<double, Vec> jacobi_value(const JacobiKind& kind, int n, double s, const Vec& theta) {
  require_interior(s, n);
  const double sig = std::sin(n * s);
  return std::visit(
      [&](const auto& k) -> std::pair<double, Vec> {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, jacobi::Translation>) {
          const double at = k.a.dot(theta);
          return {std::sin((n - 1) * s + k.angle) * at,
                  std::sin(k.angle - s) * (k.a - at * theta)};
        } else if constexpr (std::is_same_v<K, jacobi::Dilation>) {
          return {k.delta * std::pow(sig, 1.0 - 1.0 / n), Vec::Zero(n)};
        } else if constexpr (std::is_same_v<K, jacobi::SU>) {
          const Vec at = k.a * theta;
          const double q = at.dot(theta);
          const double amp = std::pow(sig, -1.0 / n);
          return {amp * std::cos(n * s) * q, amp * (at - q * theta)};
        } else if constexpr (std::is_same_v<K, jacobi::O2nRotation>) {
          return {0.0, std::pow(sig, -1.0 / n) * std::sin(2.0 * s) * (k.a * theta)};
        } else {
          return {0.0, std::pow(sig, -1.0 / n) * std::cos(2.0 * s) * (k.a * theta)};
        }
      },
      kind);
}

namespace {

void check_kind(const JacobiKind& kind, int n) {
  std::visit(
      [n](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, jacobi::Translation>) {
          if (k.a.size() != n) throw std::invalid_argument("translation vector must have length n");
        } else if constexpr (std::is_same_v<K, jacobi::SU>) {
          if (k.a.rows() != n || check_symmetric(k.a) >= 1e-10) {
            throw std::invalid_argument("SU(n) Jacobi field needs a symmetric n x n matrix");
          }
        } else if constexpr (std::is_same_v<K, jacobi::O2nRotation> ||
                             std::is_same_v<K, jacobi::O2nBoost>) {
          if (k.a.rows() != n || check_antisymmetric(k.a) >= 1e-10) {
            throw std::invalid_argument("O(2n)/SU(n) Jacobi field needs an antisymmetric matrix");
          }
        }
      },
      kind);
}

std::vector<double> angles_at(const Grid& grid, const std::vector<int>& idx) {
  std::vector<double> a(grid.rank() - 1);
  for (int j = 0; j + 1 < grid.rank(); ++j) a[j] = grid.coordinate(j + 1, idx[j + 1]);
  return a;
}

bool in_s_range(double s, int n) { return s > 0.0 && s < kPi / n; }

}  // namespace

NormalField jacobi_field(const JacobiKind& kind, const Grid& grid, int n) {
  check_kind(kind, n);
  NormalField field(grid, n);
  for (std::size_t node = 0; node < grid.size(); ++node) {
    const auto idx = grid.multi_index(node);
    const double s = grid.coordinate(0, idx[0]);
    if (!in_s_range(s, n) || near_pole(grid, node, n)) continue;
    const Vec theta = sphere_point(angles_at(grid, idx), n);
    const auto [f, t] = jacobi_value(kind, n, s, theta);
    field.set(node, f, t);
  }
  return field;
}

namespace {

struct ChartWeights {
  Vec theta;
  std::vector<Vec> derivs;
  std::vector<double> g;  // |d Theta / d a_j|^2
  double sqrt_g = 1.0;
};

ChartWeights chart_weights(std::span<const double> angles, int n) {
  ChartWeights w;
  auto chart = sphere_chart_eval(angles, n);
  w.theta = std::move(chart.point);
  w.derivs = std::move(chart.derivatives);
  w.g.resize(w.derivs.size());
  for (std::size_t j = 0; j < w.derivs.size(); ++j) {
    w.g[j] = w.derivs[j].squaredNorm();
    w.sqrt_g *= std::sqrt(w.g[j]);
  }
  return w;
}

Mat tangent_projector(const Vec& theta) {
  return Mat::Identity(theta.size(), theta.size()) - theta * theta.transpose();
}

}  // namespace

NormalField linearized_apply(const NormalField& field) {
  const int n = field.n();
  const Grid& grid = field.grid();
  NormalField out(grid, n);

  parallel_for(grid.size(), [&](std::size_t node) {
    if (!field.valid(node)) return;
    const auto idx = grid.multi_index(node);
    for (int a = 0; a < n; ++a) {
      if (idx[a] < 1 || idx[a] + 1 >= grid.dim(a)) return;
      const auto st = grid.stride(a);
      if (!field.valid(node + st) || !field.valid(node - st)) return;
    }
    const double s = grid.coordinate(0, idx[0]);
    const std::vector<double> angles = angles_at(grid, idx);
    const ChartWeights here = chart_weights(angles, n);
    if (!(here.sqrt_g > 0.0)) return;

    const double f0 = field.f(node);
    const Vec t0 = field.tangent(node);
    const double sig = std::sin(n * s);

    // (sin ns)^{2-2/n} d/ds ((sin ns)^{2/n} d/ds .)
    const double hs = grid.spacing(0);
    const auto ss = grid.stride(0);
    const double wp = std::pow(std::sin(n * (s + 0.5 * hs)), 2.0 / n);
    const double wm = std::pow(std::sin(n * (s - 0.5 * hs)), 2.0 / n);
    const double pre = std::pow(sig, 2.0 - 2.0 / n) / (hs * hs);
    const double s_f =
        pre * (wp * (field.f(node + ss) - f0) - wm * (f0 - field.f(node - ss)));
    const Vec s_t = pre * (wp * (field.tangent(node + ss) - t0) -
                           wm * (t0 - field.tangent(node - ss)));

    double lap_f = 0.0;
    double div_t = 0.0;
    Vec grad_f = Vec::Zero(n);
    Vec rough_t = Vec::Zero(n);
    for (int j = 0; j < n - 1; ++j) {
      const int axis = j + 1;
      const double h = grid.spacing(axis);
      const auto st = grid.stride(axis);
      std::vector<double> plus = angles, minus = angles;
      plus[j] += 0.5 * h;
      minus[j] -= 0.5 * h;
      const ChartWeights cp = chart_weights(plus, n);
      const ChartWeights cm = chart_weights(minus, n);
      const double w_plus = cp.sqrt_g / cp.g[j];
      const double w_minus = cm.sqrt_g / cm.g[j];
      const double fp = field.f(node + st);
      const double fm = field.f(node - st);
      const Vec tp = field.tangent(node + st);
      const Vec tm = field.tangent(node - st);

      lap_f += (w_plus * (fp - f0) - w_minus * (f0 - fm)) / (h * h);
      rough_t += (w_plus * (tangent_projector(cp.theta) * (tp - t0)) -
                  w_minus * (tangent_projector(cm.theta) * (t0 - tm))) /
                 (h * h);
      div_t += ((tp - tm) / (2.0 * h)).dot(here.derivs[j]) / here.g[j];
      grad_f += ((fp - fm) / (2.0 * h) / here.g[j]) * here.derivs[j];
    }
    lap_f /= here.sqrt_g;
    rough_t = tangent_projector(here.theta) * rough_t / here.sqrt_g;

    const double c = std::cos(n * s);
    const double r_f = s_f + lap_f - (n - 1) * f0 + (n * n - 1.0) * sig * sig * f0 - 2.0 * c * div_t;
    const Vec r_t = s_t + rough_t - t0 + 3.0 * sig * sig * t0 + 2.0 * c * grad_f;
    out.set(node, r_f, r_t);
  });
  return out;
}

ImmersionPatch neck_patch(const NeckParams& params, const Grid& grid) {
  const int n = params.n;
  if (grid.rank() != n) throw std::invalid_argument("neck_patch: grid rank must equal n");
  ImmersionPatch patch(grid, 2 * n);
  for (std::size_t node = 0; node < grid.size(); ++node) {
    const auto idx = grid.multi_index(node);
    const double s = grid.coordinate(0, idx[0]);
    if (!in_s_range(s, n) || near_pole(grid, node, n)) continue;
    patch.set(node, neck_point(params, s, angles_at(grid, idx)).to_real());
  }
  return patch;
}

double probe_curvature_sup(const NeckParams& params, double h) {
  const int n = params.n;
  double sup = 0.0;
  for (double fs : {0.2, 0.5, 0.75}) {
    for (double a : {0.7, 1.6}) {
      std::vector<int> dims(n, 3);
      std::vector<double> lower(n), spacing(n, h);
      lower[0] = fs * kPi / n - h;
      for (int j = 1; j < n; ++j) lower[j] = (j + 1 < n ? a : 2.0 * a) - h;
      const Grid g(dims, lower, spacing);
      const std::vector<int> centre(n, 1);
      const ImmersionPatch patch = neck_patch(params, g);
      sup = std::max(sup, mean_curvature_vector(patch, g.linear_index(centre)).norm());
    }
  }
  return sup;
}

}  // namespace desing
