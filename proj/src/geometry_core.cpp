#include "desing/geometry_core.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace desing {

AmbientPoint::AmbientPoint(Vec x, Vec y) : x_(std::move(x)), y_(std::move(y)) {
  if (x_.size() != y_.size()) {
    throw std::invalid_argument("AmbientPoint: real and imaginary parts differ in length");
  }
  if (x_.size() < 2) {
    throw std::invalid_argument("AmbientPoint: dimension must be at least 2");
  }
}

AmbientPoint AmbientPoint::zero(int n) { return AmbientPoint(Vec::Zero(n), Vec::Zero(n)); }

AmbientPoint AmbientPoint::from_real(const Vec& stacked) {
  if (stacked.size() % 2 != 0) {
    throw std::invalid_argument("AmbientPoint::from_real: odd length");
  }
  const auto n = stacked.size() / 2;
  return AmbientPoint(stacked.head(n), stacked.tail(n));
}

Vec AmbientPoint::to_real() const { return stack(x_, y_); }

AmbientPoint AmbientPoint::operator+(const AmbientPoint& other) const {
  return AmbientPoint(x_ + other.x_, y_ + other.y_);
}

namespace {

void chart_recursive(std::span<const double> angles, int n, Vec& point,
                     std::vector<Vec>& derivs) {
  if (n == 2) {
    const double a = angles[0];
    point.resize(2);
    point << std::cos(a), std::sin(a);
    Vec d(2);
    d << -std::sin(a), std::cos(a);
    derivs.assign(1, d);
    return;
  }
  Vec inner;
  std::vector<Vec> inner_derivs;
  chart_recursive(angles.subspan(1), n - 1, inner, inner_derivs);
  const double a = angles[0];
  const double sa = std::sin(a);
  const double ca = std::cos(a);
  point.resize(n);
  point.head(n - 1) = sa * inner;
  point(n - 1) = ca;
  derivs.clear();
  Vec d0(n);
  d0.head(n - 1) = ca * inner;
  d0(n - 1) = -sa;
  derivs.push_back(std::move(d0));
  for (const auto& di : inner_derivs) {
    Vec d(n);
    d.head(n - 1) = sa * di;
    d(n - 1) = 0.0;
    derivs.push_back(std::move(d));
  }
}

}  // namespace

SphereChartValue sphere_chart_eval(std::span<const double> angles, int n) {
  if (n < 2) {
    throw std::invalid_argument("sphere_chart_eval: dimension must be at least 2");
  }
  if (static_cast<int>(angles.size()) != n - 1) {
    throw std::invalid_argument("sphere_chart_eval: expected n-1 angles");
  }
  SphereChartValue out;
  chart_recursive(angles, n, out.point, out.derivatives);
  return out;
}

Vec sphere_point(std::span<const double> angles, int n) {
  return sphere_chart_eval(angles, n).point;
}

Grid::Grid(std::vector<int> dims, std::vector<double> lower, std::vector<double> spacing)
    : dims_(std::move(dims)), lower_(std::move(lower)), spacing_(std::move(spacing)) {
  if (dims_.empty() || dims_.size() != lower_.size() || dims_.size() != spacing_.size()) {
    throw std::invalid_argument("Grid: inconsistent axis descriptions");
  }
  strides_.resize(dims_.size());
  std::ptrdiff_t stride = 1;
  for (int a = rank() - 1; a >= 0; --a) {
    if (dims_[a] < 1 || !(spacing_[a] > 0.0)) {
      throw std::invalid_argument("Grid: axis sizes and spacings must be positive");
    }
    strides_[a] = stride;
    stride *= dims_[a];
  }
  size_ = static_cast<std::size_t>(stride);
}

Grid Grid::box(const std::vector<double>& lo, const std::vector<double>& hi,
               const std::vector<int>& nodes) {
  std::vector<double> spacing(lo.size());
  for (std::size_t a = 0; a < lo.size(); ++a) {
    if (nodes[a] < 2) throw std::invalid_argument("Grid::box: need at least 2 nodes per axis");
    spacing[a] = (hi[a] - lo[a]) / (nodes[a] - 1);
  }
  return Grid(nodes, lo, spacing);
}

std::vector<int> Grid::multi_index(std::size_t node) const {
  std::vector<int> idx(dims_.size());
  for (int a = 0; a < rank(); ++a) {
    idx[a] = static_cast<int>(node / strides_[a]);
    node %= strides_[a];
  }
  return idx;
}

std::size_t Grid::linear_index(std::span<const int> index) const {
  std::size_t out = 0;
  for (int a = 0; a < rank(); ++a) out += static_cast<std::size_t>(index[a]) * strides_[a];
  return out;
}

Vec Grid::parameters(std::size_t node) const {
  const auto idx = multi_index(node);
  Vec p(rank());
  for (int a = 0; a < rank(); ++a) p(a) = coordinate(a, idx[a]);
  return p;
}

ImmersionPatch::ImmersionPatch(Grid grid, int ambient_dim)
    : grid_(std::move(grid)),
      ambient_dim_(ambient_dim),
      samples_(grid_.size() * static_cast<std::size_t>(ambient_dim), 0.0),
      valid_(grid_.size(), 0) {
  if (ambient_dim < grid_.rank()) {
    throw std::invalid_argument("ImmersionPatch: ambient dimension below parameter dimension");
  }
}

ImmersionPatch ImmersionPatch::sample(Grid grid, int ambient_dim,
                                      const std::function<std::optional<Vec>(const Vec&)>& map) {
  ImmersionPatch patch(std::move(grid), ambient_dim);
  for (std::size_t node = 0; node < patch.size(); ++node) {
    if (auto value = map(patch.grid().parameters(node))) patch.set(node, *value);
  }
  return patch;
}

Eigen::Map<const Vec> ImmersionPatch::point(std::size_t node) const {
  return Eigen::Map<const Vec>(samples_.data() + node * ambient_dim_, ambient_dim_);
}

void ImmersionPatch::set(std::size_t node, const Vec& value) {
  if (value.size() != ambient_dim_) {
    throw std::invalid_argument("ImmersionPatch::set: wrong ambient dimension");
  }
  std::copy(value.data(), value.data() + ambient_dim_, samples_.begin() + node * ambient_dim_);
  valid_[node] = 1;
}

std::size_t ImmersionPatch::valid_count() const {
  return static_cast<std::size_t>(std::count(valid_.begin(), valid_.end(), 1));
}

bool ImmersionPatch::evaluable(std::size_t node) const {
  if (!valid(node)) return false;
  const auto idx = grid_.multi_index(node);
  const int m = grid_.rank();
  for (int a = 0; a < m; ++a) {
    if (idx[a] < 1 || idx[a] + 1 >= grid_.dim(a)) return false;
  }
  // walk the 3^m neighbourhood
  std::vector<int> offset(m, -1);
  while (true) {
    std::ptrdiff_t delta = 0;
    for (int a = 0; a < m; ++a) delta += offset[a] * grid_.stride(a);
    if (!valid(static_cast<std::size_t>(static_cast<std::ptrdiff_t>(node) + delta))) return false;
    int a = m - 1;
    while (a >= 0 && offset[a] == 1) offset[a--] = -1;
    if (a < 0) break;
    ++offset[a];
  }
  return true;
}

PatchJet patch_jet(const ImmersionPatch& patch, std::size_t node) {
  if (!patch.evaluable(node)) {
    std::ostringstream msg;
    msg << "finite-difference stencil at node " << node << " touches a masked or missing node";
    throw StencilError(msg.str());
  }
  const Grid& grid = patch.grid();
  const int m = grid.rank();
  const int big_n = patch.ambient_dim();
  const auto at = [&](std::ptrdiff_t delta) {
    return patch.point(static_cast<std::size_t>(static_cast<std::ptrdiff_t>(node) + delta));
  };
  PatchJet jet;
  jet.tangents.resize(big_n, m);
  jet.second.assign(m, Mat(big_n, m));
  const Vec center = at(0);
  for (int a = 0; a < m; ++a) {
    const double h = grid.spacing(a);
    const auto sa = grid.stride(a);
    jet.tangents.col(a) = (at(sa) - at(-sa)) / (2.0 * h);
    jet.second[a].col(a) = (at(sa) - 2.0 * center + at(-sa)) / (h * h);
    for (int b = 0; b < a; ++b) {
      const double k = grid.spacing(b);
      const auto sb = grid.stride(b);
      const Vec mixed = (at(sa + sb) - at(sa - sb) - at(-sa + sb) + at(-sa - sb)) / (4.0 * h * k);
      jet.second[a].col(b) = mixed;
      jet.second[b].col(a) = mixed;
    }
  }
  return jet;
}

namespace {

Mat checked_metric(const Mat& tangents) {
  Mat g = tangents.transpose() * tangents;
  Eigen::SelfAdjointEigenSolver<Mat> eig(g);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 1e-14 * hi) || !(hi > 0.0)) {
    throw StencilError("degenerate Jacobian: first fundamental form is singular");
  }
  return g;
}

}  // namespace

Mat first_fundamental_form(const ImmersionPatch& patch, std::size_t node) {
  return checked_metric(patch_jet(patch, node).tangents);
}

Vec mean_curvature_from_jet(const Mat& tangents, const std::vector<Mat>& second) {
  const Mat g = checked_metric(tangents);
  const Mat ginv = g.inverse();
  const int m = static_cast<int>(tangents.cols());
  Vec trace = Vec::Zero(tangents.rows());
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) trace += ginv(a, b) * second[a].col(b);
  }
  // Remove the tangential (Christoffel) part.
  const Vec coeffs = ginv * (tangents.transpose() * trace);
  return trace - tangents * coeffs;
}

Vec mean_curvature_vector(const ImmersionPatch& patch, std::size_t node) {
  const PatchJet jet = patch_jet(patch, node);
  return mean_curvature_from_jet(jet.tangents, jet.second);
}

double check_orthogonal(const Mat& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("check_orthogonal: matrix not square");
  return (m.transpose() * m - Mat::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff();
}

double check_symmetric(const Mat& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("check_symmetric: matrix not square");
  return (m - m.transpose()).cwiseAbs().maxCoeff();
}

double check_antisymmetric(const Mat& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("check_antisymmetric: matrix not square");
  return (m + m.transpose()).cwiseAbs().maxCoeff();
}

Mat plane_rotation(int n, int i, int j, double angle) {
  Mat r = Mat::Identity(n, n);
  r(i, i) = std::cos(angle);
  r(j, j) = std::cos(angle);
  r(i, j) = -std::sin(angle);
  r(j, i) = std::sin(angle);
  return r;
}

}  // namespace desing
