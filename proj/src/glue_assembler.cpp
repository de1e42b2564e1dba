#include "desing/glue_assembler.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "desing/numerics.hpp"
#include "desing/sphere_integration.hpp"

namespace desing {

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

NeckScale scales_from(double epsilon, double rho_star, double beta, int n) {
  if (!(rho_star > 0.0)) throw std::invalid_argument("scales_from: rho_* must be positive");
  const NeckParams params(n, beta, epsilon);
  double s = 0.0;
  try {
    s = s_of_radius(params, rho_star);
  } catch (const std::domain_error& e) {
    throw std::domain_error(std::string("scales_from: rho_* unreachable, ") + e.what());
  }
  return {s, s_to_t(s, n), rho_star};
}

double neck_end_radius(const NeckParams& params, double s, NeckEnd end) {
  const int n = params.n;
  const double arg = end == NeckEnd::Lower ? s : kPi / n - s;
  return params.scale() * std::cos(arg) / std::pow(std::sin(n * s), 1.0 / n);
}

Vec neck_s_derivative(const NeckParams& params, double s, const Vec& theta) {
  const int n = params.n;
  const double sig = std::sin(n * s);
  const double q = std::cos(n * s) / sig;
  const double amp = params.scale() / std::pow(sig, 1.0 / n);
  const double dc = -amp * (std::sin(s) + std::cos(s) * q);
  const double dd = amp * (std::cos(s) - std::sin(s) * q);
  return stack(dc * theta, dd * (params.rotation * theta));
}

namespace {

Grid neck_grid(int n, double s_lo, double s_hi, int nodes) {
  std::vector<int> dims(n);
  std::vector<double> lower(n, 0.0), spacing(n);
  dims[0] = nodes;
  lower[0] = s_lo;
  spacing[0] = (s_hi - s_lo) / (nodes - 1);
  for (int a = 1; a < n; ++a) {
    if (a + 1 < n) {
      dims[a] = nodes;
      spacing[a] = kPi / (nodes - 1);
    } else {
      dims[a] = 2 * (nodes - 1);
      spacing[a] = kPi / (nodes - 1);
    }
  }
  return Grid(dims, lower, spacing);
}

ImmersionPatch outer_patch(const GreenData& data, double half, double h, double exclusion) {
  const int n = data.config.n;
  const int nodes = static_cast<int>(std::floor(2.0 * half / h + 1e-9)) + 1;
  std::vector<int> dims(n, nodes);
  std::vector<double> lower(n, -half), spacing(n, h);
  return graph_patch(data, Grid(dims, lower, spacing), data.config.epsilon, exclusion);
}

}  // namespace

GluedSurface assemble(const Configuration& config, const Vec& alpha) {
  validate(config);
  if (alpha.size() != config.k()) throw std::invalid_argument("assemble: one alpha per point");
  for (int j = 0; j < config.k(); ++j) {
    if (!(alpha(j) > 0.0)) {
      std::ostringstream msg;
      msg << "assemble: neck scale alpha_" << j + 1 << " = " << alpha(j) << " is not positive";
      throw std::invalid_argument(msg.str());
    }
  }
  if (config.settings.neck_nodes < 5) throw std::invalid_argument("assemble: neck_nodes must be >= 5");
  const int n = config.n;
  const GreenData data(config, alpha);
  const double rho = config.rho_star;

  double far = 1.0;
  for (const Vec& p : config.points) far = std::max(far, p.norm());
  const double half = 2.0 * far;
  const double h = config.settings.grid_h > 0.0 ? config.settings.grid_h : rho / 4.0;

  GluedSurface out{config, alpha, alpha, half, h, outer_patch(data, half, h, rho), {}, {}, {},
                   config_fingerprint(config)};
  for (int j = 0; j < config.k(); ++j) {
    const NeckScale sc = scales_from(config.epsilon, rho, alpha(j), n);
    if (!(sc.s_star < 0.5 * kPi / n)) {
      throw std::domain_error("assemble: s_* beyond the middle of the neck, rho_* too small");
    }
    const Vec c = neck_offset(data, j);
    out.neck_params.emplace_back(n, alpha(j), config.epsilon, config.rotations[j],
                                 AmbientPoint(config.points[j], config.epsilon * c));
    out.scales.push_back(sc);
  }
  out.necks.resize(config.k(), ImmersionPatch(Grid({1}, {0.0}, {1.0}), 1));
  parallel_for(out.neck_params.size(), [&](std::size_t j) {
    const double s = out.scales[j].s_star;
    out.necks[j] = neck_patch(out.neck_params[j],
                              neck_grid(n, s, kPi / n - s, config.settings.neck_nodes));
  });
  return out;
}

namespace {

struct BoundarySample {
  Vec neck;         // R^{2n}
  Vec outer;        // R^{2n}
  Vec neck_dir;     // unit conormal, pointing to larger radius
  Vec outer_dir;
  Vec neck_im_dr;   // d Im / d rho of the neck as a graph over the annulus
  Vec outer_im_dr;
};

BoundarySample boundary_sample(const GluedSurface& surface, const GreenData& data, int j,
                               const Vec& theta) {
  const auto& c = surface.config;
  const int n = c.n;
  const NeckParams& params = surface.neck_params[j];
  const double s = surface.scales[j].s_star;
  const double rho = c.rho_star;
  const Vec x = c.points[j] + rho * theta;
  BoundarySample b;
  b.neck = neck_point_at(params, s, theta).to_real();
  b.outer = stack(x, c.epsilon * green_eval(data, x));
  const Vec ds = neck_s_derivative(params, s, theta);
  const double drho_ds = ds.head(n).dot(theta);
  b.neck_im_dr = ds.tail(n) / drho_ds;
  b.outer_im_dr = c.epsilon * green_jacobian(data, x) * theta;
  b.neck_dir = (drho_ds < 0.0 ? -ds : ds).normalized();
  b.outer_dir = stack(theta, b.outer_im_dr).normalized();
  return b;
}

}  // namespace

std::vector<EndGap> boundary_gap(const GluedSurface& surface, const QuadratureRule& rule) {
  const auto& c = surface.config;
  if (rule.n() != c.n) throw std::invalid_argument("boundary_gap: angular nodes of the wrong dimension");
  const GreenData data(c, surface.alpha);
  std::vector<EndGap> out(c.k());
  for (int j = 0; j < c.k(); ++j) {
    EndGap g;
    double acc = 0.0;
    for (const auto& node : rule.nodes()) {
      const BoundarySample b = boundary_sample(surface, data, j, node.theta);
      g.position_sup = std::max(g.position_sup, (b.neck - b.outer).norm());
      const double chord = (b.neck_dir - b.outer_dir).norm();
      g.conormal_angle_sup = std::max(g.conormal_angle_sup, 2.0 * std::asin(std::min(1.0, chord / 2)));
      acc += node.weight * (b.neck - b.outer).tail(c.n).dot(c.rotations[j] * node.theta);
      ++g.samples;
    }
    g.collinear = acc / rule.weight_sum();
    out[j] = g;
  }
  return out;
}

std::vector<EndGap> boundary_gap(const GluedSurface& surface) {
  const auto& c = surface.config;
  return boundary_gap(surface, c.n <= 4 ? QuadratureRule::product_gauss(c.n, c.settings.quadrature_nodes)
                                        : QuadratureRule::default_for(c.n, c.settings.seed));
}

std::vector<BoundaryDiscrepancy> boundary_discrepancies(const GluedSurface& surface,
                                                        int max_degree) {
  const auto& c = surface.config;
  if (c.n != 3) throw std::invalid_argument("boundary_discrepancies: n = 3 only");
  const GreenData data(c, surface.alpha);
  const S2Grid grid = S2Grid::for_degree(max_degree);
  std::vector<BoundaryDiscrepancy> out;
  for (int j = 0; j < c.k(); ++j) {
    const Mat rt = c.rotations[j].transpose();
    Mat value(3, grid.size()), conormal(3, grid.size());
    for (int node = 0; node < grid.size(); ++node) {
      const BoundarySample b = boundary_sample(surface, data, j, grid.point(node));
      value.col(node) = rt * (b.neck - b.outer).tail(3);
      conormal.col(node) = c.rho_star * (rt * (b.neck_im_dr - b.outer_im_dr));
    }
    out.push_back({sh_analyze(grid, value, max_degree), sh_analyze(grid, conormal, max_degree)});
  }
  return out;
}

namespace {

constexpr int kHistogramBins = 17;

int histogram_bin(double v) {
  if (!(v > 0.0)) return 0;
  return std::clamp(static_cast<int>(std::floor(std::log10(v))) + 16, 0, kHistogramBins - 1);
}

PatchCurvature summarize(std::string name, const std::vector<double>& primary,
                         const std::vector<double>& fd, const std::vector<char>& used) {
  PatchCurvature pc;
  pc.name = std::move(name);
  pc.histogram.assign(kHistogramBins, 0);
  for (std::size_t i = 0; i < used.size(); ++i) {
    if (!used[i]) continue;
    ++pc.nodes;
    pc.sup = std::max(pc.sup, primary[i]);
    pc.fd_sup = std::max(pc.fd_sup, fd[i]);
    ++pc.histogram[histogram_bin(primary[i])];
  }
  return pc;
}

}  // namespace

std::vector<PatchCurvature> curvature_report(const GluedSurface& surface) {
  const auto& c = surface.config;
  const GreenData data(c, surface.alpha);
  std::vector<PatchCurvature> out;

  const ImmersionPatch& outer = surface.outer;
  std::vector<double> exact(outer.size(), 0.0), fd(outer.size(), 0.0);
  std::vector<char> used(outer.size(), 0);
  parallel_for(outer.size(), [&](std::size_t node) {
    if (!outer.evaluable(node)) return;
    used[node] = 1;
    fd[node] = mean_curvature_vector(outer, node).norm();
    exact[node] = graph_mean_curvature(data, c.epsilon, outer.grid().parameters(node)).norm();
  });
  out.push_back(summarize("outer", exact, fd, used));

  for (std::size_t j = 0; j < surface.necks.size(); ++j) {
    const ImmersionPatch& neck = surface.necks[j];
    std::vector<double> h(neck.size(), 0.0);
    std::vector<char> ok(neck.size(), 0);
    parallel_for(neck.size(), [&](std::size_t node) {
      if (!neck.evaluable(node) || near_pole(neck.grid(), node, c.n)) return;
      try {
        h[node] = mean_curvature_vector(neck, node).norm();
        ok[node] = 1;
      } catch (const StencilError&) {
      }
    });
    out.push_back(summarize("neck_" + std::to_string(j + 1), h, h, ok));
  }
  return out;
}

double hausdorff_to_planes(const GluedSurface& surface, double exclusion) {
  const auto& c = surface.config;
  const int n = c.n;
  std::vector<Mat> bases;
  for (const Mat& r : c.rotations) {
    Mat b(2 * n, n);
    b.topRows(n) = std::cos(kPi / n) * Mat::Identity(n, n);
    b.bottomRows(n) = std::sin(kPi / n) * r;
    bases.push_back(b);
  }
  double sup = 0.0;
  auto visit = [&](const ImmersionPatch& patch) {
    for (std::size_t node = 0; node < patch.size(); ++node) {
      if (!patch.valid(node)) continue;
      const Vec p = patch.point(node);
      bool far = true;
      for (const Vec& x : c.points) far = far && (p.head(n) - x).norm() >= exclusion;
      if (!far) continue;
      double d = p.tail(n).norm();
      for (int j = 0; j < c.k(); ++j) {
        const Vec w = p - stack(c.points[j], Vec::Zero(n));
        d = std::min(d, (w - bases[j] * (bases[j].transpose() * w)).norm());
      }
      sup = std::max(sup, d);
    }
  };
  visit(surface.outer);
  for (const auto& neck : surface.necks) visit(neck);
  return sup;
}

std::vector<ExportRow> export_rows(const GluedSurface& surface) {
  std::vector<ExportRow> rows;
  auto add = [&](const ImmersionPatch& patch, int id) {
    for (std::size_t node = 0; node < patch.size(); ++node) {
      if (patch.valid(node)) rows.push_back({id, patch.point(node), patch.grid().parameters(node)});
    }
  };
  add(surface.outer, 0);
  for (std::size_t j = 0; j < surface.necks.size(); ++j) add(surface.necks[j], static_cast<int>(j) + 1);
  return rows;
}

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string coord_name(int i) {
  static const char* xyz[] = {"x", "y", "z"};
  return i < 3 ? xyz[i] : "c" + std::to_string(i);
}

[[noreturn]] void io_fail(const std::filesystem::path& path, const std::string& what) {
  throw std::runtime_error(path.string() + ": " + what);
}

double parse_double(std::string_view token, const std::filesystem::path& path) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    io_fail(path, "malformed number '" + std::string(token) + "'");
  }
  return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  if (sep == ' ') {
    std::istringstream in(line);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
  }
  std::string tok;
  std::istringstream in(line);
  while (std::getline(in, tok, sep)) out.push_back(tok);
  return out;
}

}  // namespace

void write_points(const std::vector<ExportRow>& rows, int n, ExportFormat format,
                  const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) io_fail(path, "cannot open for writing");
  if (format == ExportFormat::Ply) {
    out << "ply\nformat ascii 1.0\n";
    out << "comment ambient C^" << n << " as " << 2 * n
        << " reals: real parts then imaginary parts\n";
    out << "comment x y z are the first three ambient coordinates; project the rest away to view\n";
    out << "element vertex " << rows.size() << "\n";
    for (int i = 0; i < 2 * n; ++i) out << "property double " << coord_name(i) << "\n";
    out << "property int patch\n";
    for (int i = 0; i < n; ++i) out << "property double u" << i << "\n";
    out << "end_header\n";
  } else {
    for (int i = 0; i < 2 * n; ++i) out << "x" << i << ",";
    out << "patch";
    for (int i = 0; i < n; ++i) out << ",u" << i;
    out << "\n";
  }
  const char sep = format == ExportFormat::Ply ? ' ' : ',';
  for (const ExportRow& r : rows) {
    if (r.coords.size() != 2 * n || r.params.size() != n) io_fail(path, "row dimension mismatch");
    for (int i = 0; i < 2 * n; ++i) out << format_double(r.coords(i)) << sep;
    out << r.patch;
    for (int i = 0; i < n; ++i) out << sep << format_double(r.params(i));
    out << "\n";
  }
  if (!out) io_fail(path, "write failed");
}

void export_surface(const GluedSurface& surface, ExportFormat format,
                    const std::filesystem::path& path) {
  write_points(export_rows(surface), surface.config.n, format, path);
}

std::vector<ExportRow> read_points(const std::filesystem::path& path, ExportFormat format) {
  std::ifstream in(path);
  if (!in) io_fail(path, "cannot open for reading");
  std::string line;
  int coords = 0, params = 0;
  std::size_t expected = 0;
  bool counted = false;
  if (format == ExportFormat::Ply) {
    bool in_vertex = false, seen_patch = false;
    if (!std::getline(in, line) || line != "ply") io_fail(path, "missing ply magic");
    while (std::getline(in, line) && line != "end_header") {
      const auto tok = split(line, ' ');
      if (tok.empty() || tok[0] == "comment" || tok[0] == "format") continue;
      if (tok[0] == "element") {
        in_vertex = tok.size() == 3 && tok[1] == "vertex";
        if (in_vertex) {
          expected = std::stoul(tok[2]);
          counted = true;
        }
      } else if (tok[0] == "property" && in_vertex && tok.size() == 3) {
        if (tok[2] == "patch") {
          seen_patch = true;
        } else {
          ++(seen_patch ? params : coords);
        }
      }
    }
    if (line != "end_header") io_fail(path, "unterminated header");
  } else {
    if (!std::getline(in, line)) io_fail(path, "missing header row");
    const auto tok = split(line, ',');
    bool seen_patch = false;
    for (const auto& t : tok) {
      if (t == "patch") {
        seen_patch = true;
      } else {
        ++(seen_patch ? params : coords);
      }
    }
  }
  const char sep = format == ExportFormat::Ply ? ' ' : ',';
  std::vector<ExportRow> rows;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tok = split(line, sep);
    if (static_cast<int>(tok.size()) != coords + params + 1) {
      io_fail(path, "row " + std::to_string(line_no) + " has " + std::to_string(tok.size()) + " fields");
    }
    ExportRow r;
    r.coords.resize(coords);
    r.params.resize(params);
    for (int i = 0; i < coords; ++i) r.coords(i) = parse_double(tok[i], path);
    r.patch = std::stoi(tok[coords]);
    for (int i = 0; i < params; ++i) r.params(i) = parse_double(tok[coords + 1 + i], path);
    rows.push_back(std::move(r));
  }
  if (counted && rows.size() != expected) io_fail(path, "vertex count does not match header");
  return rows;
}

}  // namespace desing
