#include "desing/neck_spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/numeric/odeint.hpp>

#include "desing/lawlor_neck.hpp"
#include "desing/numerics.hpp"

namespace desing {

namespace {

void check_nk(int n, int k) {
  if (n < 2) throw std::invalid_argument("indicial roots need n >= 2");
  if (k < 0) throw std::invalid_argument("indicial roots need k >= 0");
}

RootPair pm(double r) { return {r, -r}; }

double eigen_k(int n, int k) { return static_cast<double>(k) * (n - 2 + k); }

struct Frozen {
  double tanh;
  double sech2;
};

Frozen coefficients(const ModeSystem& sys, double t) {
  if (sys.kind == ModeKind::Asymptotic) return {-1.0, 0.0};
  const double x = sys.n * t;
  const double c = std::cosh(x);
  return {std::tanh(x), std::isfinite(c) ? 1.0 / (c * c) : 0.0};
}

// Frozen coefficient matrix of the coupled exact system, (a'', b'') = M (a, b).
Mat coupled_matrix(int n, int k, double tau) {
  const double kk = eigen_k(n, k);
  Mat m(2, 2);
  m << kk + n * n / 4.0, 2.0 * tau * kk, 2.0 * tau, kk + (n - 4.0) * (n - 4.0) / 4.0;
  return m;
}

}  // namespace

RootPair coexact_roots(int n, int k) {
  check_nk(n, k);
  if (k == 0) throw std::invalid_argument("coexact indicial roots are undefined for k = 0");
  return pm((n - 2.0) / 2.0 + k);
}

IndicialTable indicial_roots(int n, int k) {
  check_nk(n, k);
  IndicialTable table;
  table.n = n;
  table.k = k;
  table.exact_mu = pm(n / 2.0 + k);
  if (k >= 1) {
    table.coexact = coexact_roots(n, k);
    table.exact_nu = pm((n - 4.0) / 2.0 + k);
  }
  return table;
}

std::pair<double, double> ModeSystem::accel(double t, double a, double b) const {
  const Frozen c = coefficients(*this, t);
  if (family == ModeFamily::Coexact) {
    const double g = (n - 2.0) / 2.0 + k;
    return {g * g * a - (16.0 - n * n) / 4.0 * c.sech2 * a, 0.0};
  }
  if (k == 0) return {n * n / 4.0 * a - 3.0 * n * n / 4.0 * c.sech2 * a, 0.0};
  const double kk = eigen_k(n, k);
  const double app = (kk + n * n / 4.0) * a + 2.0 * c.tanh * kk * b - 3.0 * n * n / 4.0 * c.sech2 * a;
  const double bpp = (kk + (n - 4.0) * (n - 4.0) / 4.0) * b + 2.0 * c.tanh * a -
                     (16.0 - n * n) / 4.0 * c.sech2 * b;
  return {app, bpp};
}

std::vector<double> frozen_characteristic_roots(int n, int k, ModeFamily family, End end) {
  check_nk(n, k);
  const double tau = end == End::Plus ? 1.0 : -1.0;
  std::vector<double> squares;
  if (family == ModeFamily::Coexact) {
    if (k == 0) throw std::invalid_argument("coexact indicial roots are undefined for k = 0");
    const double g = (n - 2.0) / 2.0 + k;
    squares.push_back(g * g);
  } else if (k == 0) {
    squares.push_back(n * n / 4.0);
  } else {
    Eigen::EigenSolver<Mat> eig(coupled_matrix(n, k, tau), false);
    for (int i = 0; i < 2; ++i) squares.push_back(eig.eigenvalues()(i).real());
  }
  std::vector<double> roots;
  for (double sq : squares) {
    const double r = std::sqrt(std::max(sq, 0.0));
    roots.push_back(r);
    roots.push_back(-r);
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

double verify_f0(int n, const std::vector<double>& ts) {
  double sup = 0.0;
  const double n2 = static_cast<double>(n) * n;
  for (double t : ts) {
    const double th = std::tanh(n * t);
    const double sech2 = 1.0 - th * th;
    const double f = 1.0 / std::sqrt(std::cosh(n * t));
    // f' = -(n/2) tanh f,  f'' = (n^2/4) tanh^2 f - (n^2/2) sech^2 f
    const double fpp = n2 / 4.0 * th * th * f - n2 / 2.0 * sech2 * f;
    const double residual = fpp - n2 / 4.0 * f + 3.0 * n2 / 4.0 * sech2 * f;
    sup = std::max(sup, std::abs(residual));
  }
  return sup;
}

ModeBlowUp::ModeBlowUp(double t, double magnitude)
    : std::runtime_error([&] {
        std::ostringstream msg;
        msg << "mode solution blew up at t = " << t << " (|a| + |b| = " << magnitude << ")";
        return msg.str();
      }()),
      t_(t) {}

ModeSolution integrate_mode_system(const ModeSystem& system, const ModeState& initial,
                                   std::pair<double, double> t_span, int samples,
                                   const OdeSettings& settings) {
  namespace odeint = boost::numeric::odeint;
  check_nk(system.n, system.k);
  if (samples < 2) throw std::invalid_argument("integrate_mode_system: need at least 2 samples");
  const auto [t0, t1] = t_span;
  if (!(t0 != t1) || !std::isfinite(t0) || !std::isfinite(t1)) {
    throw std::invalid_argument("integrate_mode_system: empty or non-finite time span");
  }

  const bool coupled = system.coupled();
  ModeState y = initial;
  if (!coupled) y[2] = y[3] = 0.0;

  // Integrate forward in u = |t - t0|; t derivatives are kept in the state.
  const double dir = t1 > t0 ? 1.0 : -1.0;
  const auto rhs = [&system, coupled, dir, t0 = t0](const ModeState& s, ModeState& dsdu,
                                                    double u) {
    const auto [app, bpp] = system.accel(t0 + dir * u, s[0], coupled ? s[2] : 0.0);
    dsdu[0] = dir * s[1];
    dsdu[1] = dir * app;
    dsdu[2] = coupled ? dir * s[3] : 0.0;
    dsdu[3] = coupled ? dir * bpp : 0.0;
  };

  const double length = std::abs(t1 - t0);
  std::vector<double> times(samples), us(samples);
  for (int i = 0; i < samples; ++i) {
    us[i] = length * i / (samples - 1);
    times[i] = t0 + dir * us[i];
  }

  ModeSolution out;
  out.n = system.n;
  out.k = system.k;
  out.family = system.family;
  out.kind = system.kind;
  out.t = times;
  out.a.reserve(samples);
  std::vector<double> b;
  b.reserve(samples);

  const auto observer = [&](const ModeState& s, double u) {
    const double t = t0 + dir * u;
    const double mag = std::abs(s[0]) + std::abs(s[2]);
    if (!(mag <= 1e12)) throw ModeBlowUp(t, mag);
    out.a.push_back(s[0]);
    b.push_back(s[2]);
  };

  using Stepper = odeint::runge_kutta_dopri5<ModeState>;
  const double du = std::min(settings.max_step, 1e-3);
  auto stepper = odeint::make_dense_output(settings.tolerance, settings.tolerance,
                                           settings.max_step, Stepper());
  odeint::integrate_times(stepper, rhs, y, us.begin(), us.end(), du, observer);
  if (coupled) out.b = std::move(b);
  return out;
}

ExplicitN3 explicit_n3_solution(double t) {
  const double s = t_to_s(t, 3);
  const double sig = 1.0 / std::cosh(3.0 * t);
  const double c3 = -std::tanh(3.0 * t);
  const double amp = std::pow(sig, -1.0 / 6.0);
  ExplicitN3 out;
  // sin 3s cos s - sin s cos 3s = sin 2s; ds/dt = sin 3s
  out.a = amp * std::sin(2.0 * s);
  out.b = -amp * std::sin(s);
  out.da = -0.5 * c3 * amp * std::sin(2.0 * s) + 2.0 * sig * amp * std::cos(2.0 * s);
  out.db = 0.5 * c3 * amp * std::sin(s) - sig * amp * std::cos(s);
  return out;
}

std::pair<double, double> ExteriorMode::value(double tau) const {
  const double fast = A * std::exp(fast_rate * tau);
  const double slow = B * std::exp(slow_rate * tau);
  return {(n - 1) * fast + slow, -fast + slow};
}

std::pair<double, double> ExteriorMode::derivative(double tau) const {
  const double fast = fast_rate * A * std::exp(fast_rate * tau);
  const double slow = slow_rate * B * std::exp(slow_rate * tau);
  return {(n - 1) * fast + slow, -fast + slow};
}

ExteriorMode exterior_mode_solve(int n, double a0, double b0) {
  if (n < 3) throw std::invalid_argument("exterior_mode_solve needs n >= 3");
  ExteriorMode out;
  out.n = n;
  // Decaying eigenvectors of the frozen matrix, ordered by rate.
  Eigen::EigenSolver<Mat> eig(coupled_matrix(n, 1, -1.0));
  std::array<std::pair<double, Vec>, 2> modes;
  for (int i = 0; i < 2; ++i) {
    modes[i] = {-std::sqrt(eig.eigenvalues()(i).real()), eig.eigenvectors().col(i).real()};
  }
  std::sort(modes.begin(), modes.end(),
            [](const auto& l, const auto& r) { return l.first < r.first; });
  out.fast_rate = modes[0].first;
  out.slow_rate = modes[1].first;
  // normalise to the (n-1, -1) and (1, 1) shapes
  out.fast_direction = modes[0].second / -modes[0].second(1);
  out.slow_direction = modes[1].second / modes[1].second(1);
  // (n-1) A + B = a0, -A + B = b0
  Mat system(2, 2);
  system << out.fast_direction(0), out.slow_direction(0), out.fast_direction(1),
      out.slow_direction(1);
  const Vec coeffs = system.fullPivLu().solve((Vec(2) << a0, b0).finished());
  out.A = coeffs(0);
  out.B = coeffs(1);
  return out;
}

RateFit decay_rate(const ModeSolution& solution, End end) {
  const std::size_t count = solution.t.size();
  const std::size_t window = count / 3;
  if (window < 50) throw std::invalid_argument("decay_rate: need at least 50 points in the fit window");
  // outer third on the requested side, measured by t
  const bool ascending = solution.t.back() > solution.t.front();
  const bool take_front = (end == End::Minus) == ascending;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < window; ++i) {
    const std::size_t idx = take_front ? i : count - 1 - i;
    double mag = std::abs(solution.a[idx]);
    if (solution.b) mag += std::abs((*solution.b)[idx]);
    if (!(mag > 0.0) || !std::isfinite(mag)) {
      throw std::invalid_argument("decay_rate: solution vanishes in the fit window");
    }
    xs.push_back(solution.t[idx]);
    ys.push_back(std::log(mag));
  }
  const LineFit fit = fit_line(xs, ys);
  return {fit.slope, fit.r_squared, static_cast<int>(window)};
}

ModeState decaying_initial_data(int n, int k, double t0, const std::vector<double>& weights) {
  check_nk(n, k);
  ModeState y{0.0, 0.0, 0.0, 0.0};
  if (k == 0) {
    if (weights.size() != 1) throw std::invalid_argument("decaying_initial_data: one weight for k = 0");
    const double r = n / 2.0;
    y[0] = weights[0] * std::exp(r * t0);
    y[1] = r * y[0];
    return y;
  }
  if (weights.size() != 2) throw std::invalid_argument("decaying_initial_data: two weights for k >= 1");
  Eigen::EigenSolver<Mat> eig(coupled_matrix(n, k, -1.0));
  std::array<std::pair<double, Vec>, 2> modes;
  for (int i = 0; i < 2; ++i) {
    Vec v = eig.eigenvectors().col(i).real();
    modes[i] = {std::sqrt(eig.eigenvalues()(i).real()), v / v.norm()};
  }
  std::sort(modes.begin(), modes.end(),
            [](const auto& l, const auto& r) { return l.first < r.first; });
  for (int i = 0; i < 2; ++i) {
    const double r = modes[i].first;
    const double e = weights[i] * std::exp(r * t0);
    y[0] += e * modes[i].second(0);
    y[1] += r * e * modes[i].second(0);
    y[2] += e * modes[i].second(1);
    y[3] += r * e * modes[i].second(1);
  }
  return y;
}

}  // namespace desing
