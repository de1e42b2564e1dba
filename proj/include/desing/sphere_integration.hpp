#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "desing/geometry_core.hpp"

namespace desing {

// |S^{n-1}| = 2 pi^{n/2} / Gamma(n/2).
double omega_n(int n);

enum class RuleKind { ProductGauss, MonteCarlo };

struct QuadratureNode {
  Vec theta;
  double weight;
};

class QuadratureRule {
 public:
  static constexpr int kDefaultNodesPerAngle = 32;

  // Gauss-Legendre in each polar angle (with its sin-power Jacobian) and the
  // trapezoidal rule in the azimuth. Supported for 2 <= n <= 4.
  static QuadratureRule product_gauss(int n, int nodes_per_angle = kDefaultNodesPerAngle);

  // Uniform samples obtained by normalising standard Gaussian vectors.
  static QuadratureRule monte_carlo(int n, std::size_t samples, std::uint64_t seed);

  // Product rule for n <= 4, otherwise Monte-Carlo with 10^5 samples.
  static QuadratureRule default_for(int n, std::uint64_t seed = 1);

  int n() const { return n_; }
  RuleKind kind() const { return kind_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<QuadratureNode>& nodes() const { return nodes_; }
  double weight_sum() const;

 private:
  QuadratureRule(int n, RuleKind kind, std::uint64_t seed, std::vector<QuadratureNode> nodes)
      : n_(n), kind_(kind), seed_(seed), nodes_(std::move(nodes)) {}

  int n_;
  RuleKind kind_;
  std::uint64_t seed_;
  std::vector<QuadratureNode> nodes_;
};

struct Integral {
  double value = 0.0;
  double std_error = 0.0;  // sigma / sqrt(N) for Monte-Carlo rules, 0 otherwise
};

Integral integrate(const QuadratureRule& rule, const std::function<double(const Vec&)>& f);

// Integral of (Theta . u)(Theta . v) over S^{n-1}, n = u.size(): (omega_n / n) u . v.
double second_moment(const Vec& u, const Vec& v);

// Gauss-Legendre nodes and weights on [a, b].
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int count, double a, double b);

// Pairwise (cascade) summation; the reduction order depends only on the input length.
double pairwise_sum(std::span<const double> values);

}  // namespace desing
