#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "desing/geometry_core.hpp"

namespace desing {

using RootPair = std::pair<double, double>;  // (+root, -root)

struct IndicialTable {
  int n = 0;
  int k = 0;
  std::optional<RootPair> coexact;  // gamma_k, k >= 1 only
  RootPair exact_mu;                // mu_k
  std::optional<RootPair> exact_nu;  // nu_k, k >= 1 only
};

IndicialTable indicial_roots(int n, int k);

// gamma_k^+ = (n - 2)/2 + k. Throws std::invalid_argument for k = 0, where no coexact
// eigenform exists.
RootPair coexact_roots(int n, int k);

enum class ModeFamily { Exact, Coexact };
// Interior: the full operator with tanh(nt) and sech^2(nt) coefficients.
// Asymptotic: its constant-coefficient limit with tanh -> -1 and sech -> 0.
enum class ModeKind { Interior, Asymptotic };
enum class End { Minus, Plus };

// Roots sigma of the characteristic equation obtained by freezing the coefficients at
// t = -inf or +inf, computed from the eigenvalues of the frozen coefficient matrix.
// Sorted ascending; four roots for the exact family with k >= 1, two otherwise.
std::vector<double> frozen_characteristic_roots(int n, int k, ModeFamily family, End end);

// Sup over `ts` of the k = 0 residual of f_0 = (cosh nt)^{-1/2}, with exact derivatives.
double verify_f0(int n, const std::vector<double>& ts);

// y = (a, a', b, b'); for scalar modes b and b' are ignored and stay zero.
using ModeState = std::array<double, 4>;

struct ModeSystem {
  int n = 3;
  int k = 1;
  ModeFamily family = ModeFamily::Exact;
  ModeKind kind = ModeKind::Interior;

  bool coupled() const { return family == ModeFamily::Exact && k >= 1; }
  // Second derivatives (a'', b'') at t.
  std::pair<double, double> accel(double t, double a, double b) const;
};

struct ModeSolution {
  int n = 0;
  int k = 0;
  ModeFamily family = ModeFamily::Exact;
  ModeKind kind = ModeKind::Interior;
  std::vector<double> t;
  std::vector<double> a;
  std::optional<std::vector<double>> b;
};

class ModeBlowUp : public std::runtime_error {
 public:
  ModeBlowUp(double t, double magnitude);
  double where() const { return t_; }

 private:
  double t_;
};

struct OdeSettings {
  double tolerance = 1e-10;  // absolute and relative
  double max_step = 1e-2;
};

// Adaptive Dormand-Prince integration from t_span.first to t_span.second (either
// direction), recorded at `samples` equally spaced times. Throws ModeBlowUp once
// |a| + |b| exceeds 1e12.
ModeSolution integrate_mode_system(const ModeSystem& system, const ModeState& initial,
                                   std::pair<double, double> t_span, int samples,
                                   const OdeSettings& settings = {});

// n = 3, k = 1 Jacobi-field solution a_1 = (sin 3s)^{-1/6} sin 2s, b_1 = -(sin 3s)^{-1/6} sin s.
struct ExplicitN3 {
  double a, da, b, db;
};
ExplicitN3 explicit_n3_solution(double t);

// Decaying solution of the asymptotic k = 1 system on [t', inf), tau = t - t':
//   a = (n-1) A e^{-(n+2) tau / 2} + B e^{(2-n) tau / 2}
//   b =      -A e^{-(n+2) tau / 2} + B e^{(2-n) tau / 2}
struct ExteriorMode {
  int n = 3;
  double A = 0.0;
  double B = 0.0;
  double fast_rate = 0.0;  // -(n+2)/2
  double slow_rate = 0.0;  // (2-n)/2
  Vec fast_direction;      // along (n-1, -1)
  Vec slow_direction;      // along (1, 1)

  std::pair<double, double> value(double tau) const;
  std::pair<double, double> derivative(double tau) const;
};
ExteriorMode exterior_mode_solve(int n, double a0, double b0);

struct RateFit {
  double rate = 0.0;  // slope of log(|a| + |b|) against t
  double r_squared = 0.0;
  int points = 0;
};

// Fits the outer third of the samples on the requested side (at least 50 points).
RateFit decay_rate(const ModeSolution& solution, End end);

// Data at t0 spanning the frozen solutions that decay toward -inf (the positive roots),
// weighted by `weights` (one per positive root, ascending).
ModeState decaying_initial_data(int n, int k, double t0, const std::vector<double>& weights);

}  // namespace desing
