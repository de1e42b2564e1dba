#include "desing/configuration.hpp"

#include <cmath>
#include <complex>
#include <cstdio>
#include <sstream>

namespace desing {

void validate(const Configuration& config) {
  const int n = config.n;
  if (n < 2) throw ConfigError("n must be at least 2");
  if (config.points.empty()) throw ConfigError("at least one point is required");
  if (config.points.size() != config.rotations.size()) {
    std::ostringstream msg;
    msg << "points and rotations differ in count (" << config.points.size() << " vs "
        << config.rotations.size() << ")";
    throw ConfigError(msg.str());
  }
  for (int j = 0; j < config.k(); ++j) {
    if (config.points[j].size() != n) {
      std::ostringstream msg;
      msg << "points[" << j << "] has length " << config.points[j].size() << ", expected " << n;
      throw ConfigError(msg.str());
    }
    const Mat& r = config.rotations[j];
    if (r.rows() != n || r.cols() != n) {
      std::ostringstream msg;
      msg << "rotations[" << j << "] is " << r.rows() << "x" << r.cols() << ", expected " << n
          << "x" << n;
      throw ConfigError(msg.str());
    }
    const double defect = check_orthogonal(r);
    if (!(defect < kOrthogonalityTolerance)) {
      std::ostringstream msg;
      msg << "rotations[" << j << "] is not orthogonal (defect " << defect << ")";
      throw ConfigError(msg.str());
    }
  }
  for (int j = 0; j < config.k(); ++j) {
    for (int jp = j + 1; jp < config.k(); ++jp) {
      const double d = (config.points[j] - config.points[jp]).norm();
      if (!(d > kPointSeparation)) {
        std::ostringstream msg;
        msg << "points[" << j << "] and points[" << jp << "] coincide (distance " << d << ")";
        throw ConfigError(msg.str());
      }
    }
  }
  if (config.a0.rows() != n || config.a0.cols() != n) {
    throw ConfigError("A0 must be an n x n matrix");
  }
  if (!(config.epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (!(config.rho_star > 0.0)) throw ConfigError("rho_star must be positive");
}

Vec unit_direction(const Configuration& config, int j, int jp) {
  const Vec diff = config.points[j] - config.points[jp];
  return diff / diff.norm();
}

std::vector<H1Verdict> check_h1(const Configuration& config) {
  std::vector<H1Verdict> out;
  const int n = config.n;
  for (int j = 0; j < config.k(); ++j) {
    for (int jp = j + 1; jp < config.k(); ++jp) {
      const Mat m = Mat::Identity(n, n) - config.rotations[jp].transpose() * config.rotations[j];
      Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullU);
      const auto& sigma = svd.singularValues();
      const double cut = kH1RankCut * sigma(0);
      int rank = 0;
      if (sigma(0) > 0.0) {
        for (int i = 0; i < sigma.size(); ++i) rank += sigma(i) > cut ? 1 : 0;
      }
      const Vec xi = unit_direction(config, j, jp);
      const Mat basis = svd.matrixU().leftCols(rank);
      const double residual = (xi - basis * (basis.transpose() * xi)).norm();
      out.push_back({j, jp, residual > kH1ResidualCut, residual, rank});
    }
  }
  return out;
}

double gamma_entry(const Configuration& config, int j, int jp) {
  if (j == jp) return 0.0;
  const int n = config.n;
  const Vec xi = unit_direction(config, j, jp);
  const double d = (config.points[j] - config.points[jp]).norm();
  const Mat& rj = config.rotations[j];
  const Mat& rjp = config.rotations[jp];
  const double trace = (rjp.transpose() * rj).trace();
  const double cross = (rj * xi).dot(rjp * xi);
  return omega_n(n) / (n * std::pow(d, n)) * (trace - n * cross);
}

Mat gamma_matrix(const Configuration& config) {
  const int k = config.k();
  Mat g = Mat::Zero(k, k);
  for (int j = 0; j < k; ++j) {
    for (int jp = 0; jp < k; ++jp) g(j, jp) = gamma_entry(config, j, jp);
  }
  return g;
}

Integral gamma_entry_quadrature(const Configuration& config, int j, int jp,
                                const QuadratureRule& rule) {
  if (j == jp) return {};
  const int n = config.n;
  const Vec xi = unit_direction(config, j, jp);
  const double scale = 1.0 / std::pow((config.points[j] - config.points[jp]).norm(), n);
  const Mat& rj = config.rotations[j];
  const Mat& rjp = config.rotations[jp];
  const Vec rj_xi = rj * xi;
  const Vec rjp_xi = rjp * xi;
  Integral out = integrate(rule, [&](const Vec& theta) {
    return (rj * theta).dot(rjp * theta) - n * theta.dot(rj_xi) * theta.dot(rjp_xi);
  });
  out.value *= scale;
  out.std_error *= scale;
  return out;
}

double symmetric_pair_gamma(const Mat& r1, const Mat& r2, const Vec& e) {
  const int n = static_cast<int>(e.size());
  if ((r1 * e - e).norm() > 1e-10 || (r2 * e - e).norm() > 1e-10) {
    throw std::invalid_argument("symmetric_pair_gamma: rotations must fix the common vector e");
  }
  const Mat q = r2.transpose() * r1;
  Eigen::EigenSolver<Mat> eig(q, false);
  int dim_minus = 0;
  double angle_sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const std::complex<double> lam = eig.eigenvalues()(i);
    if (std::abs(lam + 1.0) < 1e-6) {
      ++dim_minus;
    } else if (std::abs(lam - 1.0) < 1e-6) {
      continue;
    } else if (lam.imag() > 0.0) {
      angle_sum += 1.0 - std::cos(std::arg(lam));
    }
  }
  return -omega_n(n) / std::pow(2.0, n) * (2.0 / n * dim_minus + 2.0 / n * angle_sum);
}

Vec lambda_vector(const Configuration& config) {
  const int n = config.n;
  Vec out(config.k());
  for (int j = 0; j < config.k(); ++j) {
    out(j) = -omega_n(n) / n * (config.a0.transpose() * config.rotations[j]).trace();
  }
  return out;
}

Integral lambda_quadrature(const Configuration& config, int j, const QuadratureRule& rule) {
  const Mat& rj = config.rotations[j];
  Integral out = integrate(rule, [&](const Vec& theta) {
    return -(config.a0 * theta).dot(rj * theta);
  });
  return out;
}

NeckScales neck_scales(const Mat& gamma, const Vec& lambda) {
  if (gamma.rows() != gamma.cols() || gamma.rows() != lambda.size()) {
    throw std::invalid_argument("neck_scales: Gamma must be square and match Lambda");
  }
  NeckScales out;
  Eigen::JacobiSVD<Mat> svd(gamma, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sigma = svd.singularValues();
  out.rcond = sigma(0) > 0.0 ? sigma(sigma.size() - 1) / sigma(0) : 0.0;
  out.h2 = out.rcond > kH2RcondCut;
  if (!out.h2) return out;
  const Vec alpha = gamma.fullPivLu().solve(lambda);
  out.residual = (gamma * alpha - lambda).norm();
  out.h3 = alpha.minCoeff() > 0.0;
  out.alpha = alpha;
  return out;
}

InteractionSystem interaction_system(const Configuration& config) {
  validate(config);
  InteractionSystem sys;
  sys.gamma = gamma_matrix(config);
  sys.lambda = lambda_vector(config);
  sys.h1 = check_h1(config);
  sys.h1_holds = true;
  for (const auto& v : sys.h1) sys.h1_holds = sys.h1_holds && v.holds;
  const NeckScales scales = neck_scales(sys.gamma, sys.lambda);
  sys.alpha = scales.alpha;
  sys.rcond = scales.rcond;
  sys.residual = scales.residual;
  sys.h2 = scales.h2;
  sys.h3 = scales.h3;
  return sys;
}

namespace {

void put(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g,", v);
  out += buf;
}

void put(std::string& out, const Mat& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) put(out, m(i, j));
  out += ';';
}

}  // namespace

std::string config_fingerprint(const Configuration& config) {
  std::string text;
  put(text, config.n);
  for (const Vec& p : config.points) put(text, p);
  for (const Mat& r : config.rotations) put(text, r);
  put(text, config.a0);
  put(text, config.epsilon);
  put(text, config.rho_star);
  const RunSettings& s = config.settings;
  for (double v : {double(s.quadrature_nodes), s.grid_h, double(s.sh_degree), double(s.neck_nodes)}) {
    put(text, v);
  }
  text += std::to_string(s.seed);
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace desing
