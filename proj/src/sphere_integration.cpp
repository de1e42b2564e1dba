#include "desing/sphere_integration.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace desing {

double omega_n(int n) {
  if (n < 2) throw std::invalid_argument("omega_n: dimension must be at least 2");
  return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int count, double a,
                                                                   double b) {
  if (count < 1) throw std::invalid_argument("gauss_legendre: need at least one node");
  std::vector<double> x(count), w(count);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  for (int i = 0; i < (count + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (count + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= count; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = count * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // recompute derivative at the converged root
    double p0 = 1.0, p1 = 0.0;
    for (int k = 1; k <= count; ++k) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
    }
    dp = count * (z * p0 - p1) / (z * z - 1.0);
    const double weight = 2.0 / ((1.0 - z * z) * dp * dp);
    x[i] = mid - half * z;
    x[count - 1 - i] = mid + half * z;
    w[i] = half * weight;
    w[count - 1 - i] = half * weight;
  }
  return {x, w};
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

QuadratureRule QuadratureRule::product_gauss(int n, int nodes_per_angle) {
  if (n < 2) throw std::invalid_argument("product_gauss: dimension must be at least 2");
  if (n > 4) throw std::invalid_argument("product_gauss: supported for n <= 4 only");
  if (nodes_per_angle < 2) throw std::invalid_argument("product_gauss: too few nodes");

  // Per-axis node lists: polar axes carry sin^{n-1-j} Jacobian factors.
  std::vector<std::vector<double>> axis_nodes;
  std::vector<std::vector<double>> axis_weights;
  for (int j = 0; j < n - 2; ++j) {
    auto [x, w] = gauss_legendre(nodes_per_angle, 0.0, std::numbers::pi);
    const int power = n - 2 - j;
    for (std::size_t i = 0; i < x.size(); ++i) w[i] *= std::pow(std::sin(x[i]), power);
    axis_nodes.push_back(std::move(x));
    axis_weights.push_back(std::move(w));
  }
  {
    std::vector<double> x(nodes_per_angle), w(nodes_per_angle);
    const double h = 2.0 * std::numbers::pi / nodes_per_angle;
    for (int i = 0; i < nodes_per_angle; ++i) {
      x[i] = i * h;
      w[i] = h;
    }
    axis_nodes.push_back(std::move(x));
    axis_weights.push_back(std::move(w));
  }

  std::vector<QuadratureNode> nodes;
  const int axes = n - 1;
  std::vector<int> idx(axes, 0);
  std::vector<double> angles(axes);
  while (true) {
    double weight = 1.0;
    for (int a = 0; a < axes; ++a) {
      angles[a] = axis_nodes[a][idx[a]];
      weight *= axis_weights[a][idx[a]];
    }
    nodes.push_back({sphere_point(angles, n), weight});
    int a = axes - 1;
    while (a >= 0 && idx[a] + 1 == static_cast<int>(axis_nodes[a].size())) idx[a--] = 0;
    if (a < 0) break;
    ++idx[a];
  }
  return QuadratureRule(n, RuleKind::ProductGauss, 0, std::move(nodes));
}

QuadratureRule QuadratureRule::monte_carlo(int n, std::size_t samples, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("monte_carlo: dimension must be at least 2");
  if (samples == 0) throw std::invalid_argument("monte_carlo: need at least one sample");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double w = omega_n(n) / static_cast<double>(samples);
  std::vector<QuadratureNode> nodes;
  nodes.reserve(samples);
  while (nodes.size() < samples) {
    Vec g(n);
    for (int i = 0; i < n; ++i) g(i) = normal(rng);
    const double len = g.norm();
    if (len < 1e-300) continue;
    nodes.push_back({g / len, w});
  }
  return QuadratureRule(n, RuleKind::MonteCarlo, seed, std::move(nodes));
}

QuadratureRule QuadratureRule::default_for(int n, std::uint64_t seed) {
  if (n <= 4) return product_gauss(n);
  return monte_carlo(n, 100000, seed);
}

double QuadratureRule::weight_sum() const {
  std::vector<double> w(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) w[i] = nodes_[i].weight;
  return pairwise_sum(w);
}

Integral integrate(const QuadratureRule& rule, const std::function<double(const Vec&)>& f) {
  const auto& nodes = rule.nodes();
  std::vector<double> terms(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) terms[i] = nodes[i].weight * f(nodes[i].theta);
  Integral out;
  out.value = pairwise_sum(terms);
  if (rule.kind() == RuleKind::MonteCarlo) {
    // Each sample estimates omega_n * f; report the standard error of the mean.
    const double count = static_cast<double>(nodes.size());
    const double mean = out.value / count;
    std::vector<double> sq(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) sq[i] = (terms[i] - mean) * (terms[i] - mean);
    const double var = pairwise_sum(sq) / std::max(1.0, count - 1.0);
    out.std_error = std::sqrt(var) * std::sqrt(count);
  }
  return out;
}

double second_moment(const Vec& u, const Vec& v) {
  if (u.size() != v.size()) throw std::invalid_argument("second_moment: length mismatch");
  const int n = static_cast<int>(u.size());
  return omega_n(n) / n * u.dot(v);
}

}  // namespace desing
