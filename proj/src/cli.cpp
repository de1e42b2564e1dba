#include "desing/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstring>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <regex>
#include <sstream>

#include <CLI11.hpp>

#include "desing/boundary_matching.hpp"
#include "desing/glue_assembler.hpp"
#include "desing/green_graph.hpp"
#include "desing/lawlor_neck.hpp"
#include "desing/neck_spectrum.hpp"
#include "desing/numerics.hpp"

namespace desing::cli {

using json = nlohmann::ordered_json;

namespace {

// ---------------------------------------------------------------- config parsing

// Line of every value in a (valid) JSON text, keyed by JSON pointer.
class LineIndex {
 public:
  explicit LineIndex(const std::string& text) {
    struct Frame {
      bool object;
      int index;
      std::string key;
      bool expect_key;
    };
    std::vector<Frame> stack;
    auto pointer = [&] {
      std::string p;
      for (const Frame& f : stack) p += "/" + (f.object ? f.key : std::to_string(f.index));
      return p;
    };
    auto read_string = [&](std::size_t& i) {
      std::string s;
      for (++i; i < text.size() && text[i] != '"'; ++i) {
        if (text[i] == '\\') ++i;
        if (i < text.size()) s += text[i];
      }
      return s;
    };
    int line = 1;
    for (std::size_t i = 0; i < text.size(); ++i) {
      const char c = text[i];
      if (c == '\n') {
        ++line;
      } else if (std::isspace(static_cast<unsigned char>(c)) || c == ':') {
      } else if (c == ',') {
        if (!stack.empty()) {
          if (stack.back().object) stack.back().expect_key = true;
          else ++stack.back().index;
        }
      } else if (c == '}' || c == ']') {
        if (!stack.empty()) stack.pop_back();
      } else if (c == '"' && !stack.empty() && stack.back().object && stack.back().expect_key) {
        stack.back().key = read_string(i);
        stack.back().expect_key = false;
      } else {
        lines_.emplace(pointer(), line);
        if (c == '{') {
          stack.push_back({true, 0, "", true});
        } else if (c == '[') {
          stack.push_back({false, 0, "", false});
        } else if (c == '"') {
          read_string(i);
        } else {
          while (i + 1 < text.size() && !std::strchr(",]} \t\r\n", text[i + 1])) ++i;
        }
      }
    }
  }

  int line_of(std::string pointer) const {
    while (true) {
      const auto it = lines_.find(pointer);
      if (it != lines_.end()) return it->second;
      const auto cut = pointer.rfind('/');
      if (cut == std::string::npos) return 1;
      pointer.resize(cut);
    }
  }

 private:
  std::map<std::string, int> lines_;
};

class ConfigReader {
 public:
  ConfigReader(const std::string& text, std::string origin) : origin_(std::move(origin)), index_("") {
    try {
      doc_ = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      const std::size_t upto = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
      const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + upto, '\n'));
      std::string what = e.what();
      const auto pos = what.find("syntax error");
      fail_at(line, "malformed JSON: " + (pos == std::string::npos ? what : what.substr(pos)));
    }
    index_ = LineIndex(text);
    if (!doc_.is_object()) fail("/", "top level must be an object");
  }

  [[noreturn]] void fail_at(int line, const std::string& message) const {
    throw InputError(origin_ + ":" + std::to_string(line) + ": " + message);
  }
  [[noreturn]] void fail(const std::string& pointer, const std::string& message) const {
    fail_at(index_.line_of(pointer == "/" ? "" : pointer), message);
  }

  const nlohmann::json& at(const std::string& pointer) const {
    const nlohmann::json::json_pointer p(pointer);
    if (!doc_.contains(p)) fail(pointer, "missing required key '" + pointer.substr(1) + "'");
    return doc_.at(p);
  }
  bool has(const std::string& key) const { return doc_.contains(key); }

  double number(const std::string& pointer) const {
    const auto& v = at(pointer);
    if (!v.is_number()) fail(pointer, pointer.substr(1) + ": expected a number, got " + v.dump());
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(pointer, pointer.substr(1) + ": number is not finite");
    return d;
  }

  long long integer(const std::string& pointer) const {
    const auto& v = at(pointer);
    if (!v.is_number_integer()) fail(pointer, pointer.substr(1) + ": expected an integer, got " + v.dump());
    return v.get<long long>();
  }

  Vec vector(const std::string& pointer, int length) const {
    const auto& v = at(pointer);
    if (!v.is_array() || static_cast<int>(v.size()) != length) {
      fail(pointer, pointer.substr(1) + ": expected a list of " + std::to_string(length) + " numbers");
    }
    Vec out(length);
    for (int i = 0; i < length; ++i) out(i) = number(pointer + "/" + std::to_string(i));
    return out;
  }

  // Row-major flat list of n*n numbers or a list of n rows.
  Mat matrix(const std::string& pointer, int n) const {
    const auto& v = at(pointer);
    Mat out(n, n);
    if (v.is_array() && static_cast<int>(v.size()) == n * n && (n * n == 0 || !v[0].is_array())) {
      for (int i = 0; i < n * n; ++i) out(i / n, i % n) = number(pointer + "/" + std::to_string(i));
      return out;
    }
    if (v.is_array() && static_cast<int>(v.size()) == n) {
      for (int r = 0; r < n; ++r) out.row(r) = vector(pointer + "/" + std::to_string(r), n).transpose();
      return out;
    }
    std::ostringstream msg;
    msg << pointer.substr(1) << ": expected a " << n << "x" << n
        << " matrix (row-major list of " << n * n << " numbers or " << n << " rows)";
    fail(pointer, msg.str());
  }

  std::size_t list_size(const std::string& pointer) const {
    const auto& v = at(pointer);
    if (!v.is_array()) fail(pointer, pointer.substr(1) + ": expected a list");
    return v.size();
  }

  const nlohmann::json& doc() const { return doc_; }

 private:
  std::string origin_;
  LineIndex index_;
  nlohmann::json doc_;
};

}  // namespace

Configuration parse_config_text(const std::string& text, const std::string& origin) {
  const ConfigReader r(text, origin);
  static const std::vector<std::string> known = {"n", "points", "rotations", "A0", "epsilon",
                                                  "rho_star", "quadrature_nodes", "grid_h", "L",
                                                  "seed", "neck_nodes"};
  for (const auto& [key, value] : r.doc().items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      r.fail("/" + key, "unknown key '" + key + "'");
    }
  }
  Configuration c;
  const long long n = r.integer("/n");
  if (n < 2 || n > 16) r.fail("/n", "n must lie in [2, 16], got " + std::to_string(n));
  c.n = static_cast<int>(n);
  const std::size_t k = r.list_size("/points");
  if (k == 0) r.fail("/points", "points: at least one point is required");
  if (r.list_size("/rotations") != k) {
    r.fail("/rotations", "rotations: expected " + std::to_string(k) + " matrices, one per point");
  }
  for (std::size_t j = 0; j < k; ++j) {
    c.points.push_back(r.vector("/points/" + std::to_string(j), c.n));
    c.rotations.push_back(r.matrix("/rotations/" + std::to_string(j), c.n));
  }
  c.a0 = r.matrix("/A0", c.n);
  c.epsilon = r.number("/epsilon");
  c.rho_star = r.number("/rho_star");
  if (r.has("quadrature_nodes")) c.settings.quadrature_nodes = static_cast<int>(r.integer("/quadrature_nodes"));
  if (r.has("grid_h")) c.settings.grid_h = r.number("/grid_h");
  if (r.has("L")) c.settings.sh_degree = static_cast<int>(r.integer("/L"));
  if (r.has("seed")) {
    const long long s = r.integer("/seed");
    if (s < 0) r.fail("/seed", "seed must be non-negative");
    c.settings.seed = static_cast<std::uint64_t>(s);
  }
  if (r.has("neck_nodes")) c.settings.neck_nodes = static_cast<int>(r.integer("/neck_nodes"));
  if (c.settings.quadrature_nodes < 2) r.fail("/quadrature_nodes", "quadrature_nodes must be >= 2");
  if (c.settings.grid_h < 0.0) r.fail("/grid_h", "grid_h must be positive (or 0 for rho_star / 4)");
  if (c.settings.sh_degree < 1 || c.settings.sh_degree > kMaxShDegree) {
    r.fail("/L", "L must lie in [1, " + std::to_string(kMaxShDegree) + "]");
  }
  if (c.settings.neck_nodes < 5) r.fail("/neck_nodes", "neck_nodes must be >= 5");

  try {
    validate(c);
  } catch (const ConfigError& e) {
    // anchor at the last entry the message names, e.g. "points[0] and points[1] coincide"
    const std::string what = e.what();
    std::string pointer = "/";
    static const std::regex entry(R"((points|rotations)\[(\d+)\])");
    for (auto it = std::sregex_iterator(what.begin(), what.end(), entry); it != std::sregex_iterator(); ++it) {
      pointer = "/" + (*it)[1].str() + "/" + (*it)[2].str();
    }
    for (const char* key : {"A0", "epsilon", "rho_star"}) {
      if (pointer == "/" && what.rfind(key, 0) == 0) pointer = std::string("/") + key;
    }
    r.fail(pointer, what);
  }
  return c;
}

Configuration parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path.string() + ": cannot open configuration file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path.string());
}

// ---------------------------------------------------------------- report

bool RunReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

namespace {

json vec_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json mat_json(const Mat& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(vec_json(m.row(i).transpose()));
  return a;
}

}  // namespace

json RunReport::to_json(bool with_timings) const {
  json j;
  j["tool"] = "desing";
  j["version"] = kToolVersion;
  j["command"] = command;
  j["config_digest"] = config_digest ? json(*config_digest) : json(nullptr);
  j["seed"] = seed;
  j["sections"] = sections;
  json cs = json::array();
  for (const Check& c : checks) {
    cs.push_back({{"name", c.name}, {"value", c.value}, {"threshold", c.threshold},
                  {"relation", c.relation}, {"pass", c.pass}});
  }
  j["checks"] = cs;
  j["passed"] = passed();
  if (with_timings) j["timings"] = {{"total_seconds", seconds}};
  return j;
}

namespace {

Check check(std::string name, double value, std::string relation, double threshold) {
  bool pass = false;
  if (relation == "<") pass = value < threshold;
  else if (relation == "<=") pass = value <= threshold;
  else if (relation == ">") pass = value > threshold;
  else if (relation == "==") pass = value == threshold;
  else if (relation == "within") pass = std::abs(value) <= threshold;
  return {std::move(name), value, threshold, std::move(relation), pass};
}

std::string fmt(double v, int precision = 6) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

std::string vec_text(const Vec& v) {
  std::string s = "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v(i), 12);
  return s + ")";
}

const char* mark(bool ok) { return ok ? "✓" : "✗"; }

Configuration load(const RunOptions& o, RunReport& report) {
  if (!o.config) throw InputError("a configuration file is required");
  Configuration c = parse_config(*o.config);
  if (o.seed) c.settings.seed = *o.seed;
  report.seed = c.settings.seed;
  return c;
}

// Hypothesis checks shared by validate / interaction / glue.
InteractionSystem hypotheses(const Configuration& c, RunReport& report) {
  const InteractionSystem sys = interaction_system(c);
  json h1 = json::array();
  double h1_min = std::numeric_limits<double>::infinity();
  for (const H1Verdict& v : sys.h1) {
    h1.push_back({{"pair", {v.j + 1, v.jp + 1}}, {"holds", v.holds}, {"residual", v.residual},
                  {"rank", v.rank}});
    h1_min = std::min(h1_min, v.residual);
  }
  json sec;
  sec["n"] = c.n;
  sec["k"] = c.k();
  sec["h1"] = h1;
  sec["h1_holds"] = sys.h1_holds;
  sec["h2"] = sys.h2;
  sec["rcond"] = sys.rcond;
  sec["h3"] = sys.h3;
  sec["alpha"] = sys.alpha ? vec_json(*sys.alpha) : json(nullptr);
  sec["solve_residual"] = sys.residual;
  report.sections["validation"] = sec;

  for (const H1Verdict& v : sys.h1) {
    report.checks.push_back(check("h1_pair_" + std::to_string(v.j + 1) + "_" + std::to_string(v.jp + 1),
                                  v.residual, ">", kH1ResidualCut));
  }
  report.checks.push_back(check("h2_rcond", sys.rcond, ">", kH2RcondCut));
  if (sys.alpha) {
    report.checks.push_back(check("h3_min_alpha", sys.alpha->minCoeff(), ">", 0.0));
    report.checks.push_back(check("alpha_solve_residual", sys.residual, "<", 1e-12));
  }
  std::string line = "h1 " + std::string(mark(sys.h1_holds)) + " h2 " + mark(sys.h2) + " h3 " +
                     mark(sys.h3);
  if (sys.alpha) line += ", α = " + vec_text(*sys.alpha);
  report.summary.push_back(line);
  return sys;
}

void run_validate(const RunOptions& o, RunReport& report) {
  const Configuration c = load(o, report);
  report.config_digest = config_fingerprint(c);
  hypotheses(c, report);
}

void run_interaction(const RunOptions& o, RunReport& report) {
  const Configuration c = load(o, report);
  report.config_digest = config_fingerprint(c);
  const InteractionSystem sys = hypotheses(c, report);
  const int k = c.k();
  json sec;
  sec["gamma"] = mat_json(sys.gamma);
  sec["lambda"] = vec_json(sys.lambda);

  double quad_err = 0.0, mc_sigma = 0.0;
  const QuadratureRule mc = QuadratureRule::monte_carlo(c.n, 100000, c.settings.seed);
  const std::optional<QuadratureRule> product =
      c.n <= 4 ? std::optional(QuadratureRule::product_gauss(c.n, c.settings.quadrature_nodes)) : std::nullopt;
  for (int j = 0; j < k; ++j) {
    for (int jp = 0; jp < k; ++jp) {
      if (j == jp) continue;
      if (product) quad_err = std::max(quad_err, std::abs(gamma_entry_quadrature(c, j, jp, *product).value - sys.gamma(j, jp)));
      const Integral m = gamma_entry_quadrature(c, j, jp, mc);
      if (m.std_error > 0.0) mc_sigma = std::max(mc_sigma, std::abs(m.value - sys.gamma(j, jp)) / m.std_error);
    }
    if (product) quad_err = std::max(quad_err, std::abs(lambda_quadrature(c, j, *product).value - sys.lambda(j)));
  }
  sec["quadrature_max_error"] = product ? json(quad_err) : json(nullptr);
  sec["monte_carlo_samples"] = 100000;
  sec["monte_carlo_max_sigma"] = mc_sigma;
  if (product) report.checks.push_back(check("gamma_lambda_quadrature_error", quad_err, "<", 1e-10));
  report.checks.push_back(check("gamma_monte_carlo_sigma", mc_sigma, "<", 5.0));

  if (sys.alpha && sys.h3) {
    const GreenData data(c, *sys.alpha);
    const Vec res = balance_residual(data);
    sec["balance_residual"] = vec_json(res);
    report.checks.push_back(check("balance_residual_max", res.maxCoeff(), "<", 1e-8));
    report.summary.push_back("balance residual " + fmt(res.maxCoeff(), 3));
  }
  report.summary.push_back("quadrature error " + fmt(quad_err, 3) + ", Monte-Carlo deviation " +
                           fmt(mc_sigma, 3) + " sigma");
  report.sections["interaction"] = sec;
}

void run_neck(const RunOptions& o, RunReport& report) {
  if (o.n < 2 || o.n > 8) throw InputError("--n must lie in [2, 8]");
  if (!(o.grid > 0.0) || o.grid > 0.2) throw InputError("--grid must lie in (0, 0.2]");
  const double eps = o.epsilon.value_or(1.0);
  const NeckParams params(o.n, o.beta, eps);
  const double s_min = radius_branch_minimum(o.n);
  json sec;
  sec["n"] = o.n;
  sec["beta"] = o.beta;
  sec["epsilon"] = eps;
  sec["scale"] = params.scale();
  sec["s_branch_minimum"] = s_min;
  sec["radius_branch_minimum"] = radius_of_s(params, s_min);
  std::vector<double> hs{o.grid, o.grid / 2, o.grid / 4}, sups;
  for (double h : hs) sups.push_back(probe_curvature_sup(params, h));
  const double order = loglog_slope(hs, sups);
  sec["grid"] = hs;
  sec["curvature_sup"] = sups;
  sec["observed_order"] = order;
  report.checks.push_back(check("curvature_order_minus_2", order - 2.0, "within", 0.2));
  report.summary.push_back("neck n=" + std::to_string(o.n) + ": sup|H| " + fmt(sups[0], 3) + " -> " +
                           fmt(sups[2], 3) + ", order " + fmt(order, 4));
  if (o.export_path) {
    const int n = o.n;
    const double lo = std::numbers::pi / (8 * n), hi = 7 * std::numbers::pi / (8 * n);
    std::vector<int> dims(n);
    std::vector<double> lower(n, 0.0), spacing(n, o.grid);
    dims[0] = static_cast<int>(std::floor((hi - lo) / o.grid)) + 1;
    lower[0] = lo;
    for (int a = 1; a < n; ++a) {
      dims[a] = a + 1 < n ? static_cast<int>(std::floor(std::numbers::pi / o.grid)) + 1
                          : static_cast<int>(std::floor(2 * std::numbers::pi / o.grid));
    }
    const Grid g(dims, lower, spacing);
    const ImmersionPatch patch = neck_patch(params, g);
    std::vector<ExportRow> rows;
    for (std::size_t node = 0; node < patch.size(); ++node) {
      if (patch.valid(node)) rows.push_back({1, patch.point(node), g.parameters(node)});
    }
    const auto ext = o.export_path->extension();
    write_points(rows, n, ext == ".csv" ? ExportFormat::Csv : ExportFormat::Ply, *o.export_path);
    sec["export"] = {{"path", o.export_path->string()}, {"points", rows.size()}};
  }
  report.sections["neck"] = sec;
}

void run_spectrum(const RunOptions& o, RunReport& report) {
  const int n = o.n, k = o.k;
  const IndicialTable t = indicial_roots(n, k);
  json sec;
  sec["n"] = n;
  sec["k"] = k;
  auto pair_json = [](const RootPair& p) { return json::array({p.first, p.second}); };
  sec["exact_mu"] = pair_json(t.exact_mu);
  sec["exact_nu"] = t.exact_nu ? pair_json(*t.exact_nu) : json(nullptr);
  sec["coexact_gamma"] = t.coexact ? pair_json(*t.coexact) : json(nullptr);

  std::vector<double> exact{t.exact_mu.first, t.exact_mu.second};
  if (t.exact_nu) {
    exact.push_back(t.exact_nu->first);
    exact.push_back(t.exact_nu->second);
  }
  std::sort(exact.begin(), exact.end());
  double err = 0.0;
  json frozen;
  for (End end : {End::Minus, End::Plus}) {
    const char* name = end == End::Minus ? "minus_infinity" : "plus_infinity";
    const auto ex = frozen_characteristic_roots(n, k, ModeFamily::Exact, end);
    if (ex.size() != exact.size()) throw std::logic_error("frozen root count mismatch");
    for (std::size_t i = 0; i < ex.size(); ++i) err = std::max(err, std::abs(ex[i] - exact[i]));
    frozen[name]["exact"] = ex;
    if (t.coexact) {
      const auto co = frozen_characteristic_roots(n, k, ModeFamily::Coexact, end);
      err = std::max({err, std::abs(co.back() - t.coexact->first), std::abs(co.front() - t.coexact->second)});
      frozen[name]["coexact"] = co;
    }
  }
  sec["frozen_roots"] = frozen;
  sec["max_root_error"] = err;
  report.checks.push_back(check("frozen_root_error", err, "<", 1e-12));
  std::string line = "n=" + std::to_string(n) + " k=" + std::to_string(k) + ": ";
  if (t.coexact) line += "γ = ±" + fmt(t.coexact->first) + ", ";
  line += "μ = ±" + fmt(t.exact_mu.first);
  if (t.exact_nu) line += ", ν = ±" + fmt(std::abs(t.exact_nu->first));
  report.summary.push_back(line);
  report.sections["spectrum"] = sec;
}

void run_dtn(const RunOptions& o, RunReport& report) {
  const int L = o.degree;
  if (L < 1 || L > kMaxShDegree) throw InputError("--degree must lie in [1, " + std::to_string(kMaxShDegree) + "]");
  const std::uint64_t seed = o.seed.value_or(1);
  report.seed = seed;
  json sec;
  sec["degree"] = L;
  json eig = json::array();
  double eig_err = 0.0;
  for (int k = 0; k <= L; ++k) {
    SHExpansion e(L);
    e.coeffs(0, sh_index(k, 0)) = 1.0;
    const double measured = (p_ext(e) - p_int(e)).coeffs(0, sh_index(k, 0));
    eig.push_back({{"k", k}, {"eigenvalue", measured}});
    eig_err = std::max(eig_err, std::abs(measured + (2.0 * k + 1.0)));
  }
  sec["eigenvalues"] = eig;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  SHExpansion psi(L);
  for (Eigen::Index i = 0; i < psi.coeffs.size(); ++i) psi.coeffs.data()[i] = u(rng);
  const SHExpansion phi = dtn_solve(psi);
  const double round_trip = (p_ext(phi) - p_int(phi) - psi).max_abs();
  const S2Grid grid = S2Grid::for_degree(L);
  const Mat samples = sample_on_grid(grid, [&](const Vec& t) { return sh_synthesize_at(psi, t); });
  const double sh_err = (sh_analyze(grid, samples, L) - psi).max_abs();
  sec["dtn_round_trip"] = round_trip;
  sec["sh_round_trip"] = sh_err;
  report.checks.push_back(check("dtn_eigenvalue_error", eig_err, "==", 0.0));
  report.checks.push_back(check("dtn_round_trip", round_trip, "<", 1e-12));
  report.checks.push_back(check("sh_round_trip", sh_err, "<", 1e-10));
  report.summary.push_back("P_ext - P_int = -(2k+1) for k <= " + std::to_string(L) +
                           ", round trip " + fmt(round_trip, 3));
  report.sections["dtn"] = sec;
}

void run_glue(const RunOptions& o, RunReport& report) {
  if (o.export_path && o.export_path->extension() != ".ply" && o.export_path->extension() != ".csv") {
    throw InputError("--export path must end in .ply or .csv");
  }
  Configuration c = load(o, report);
  if (o.epsilon) c.epsilon = *o.epsilon;
  report.config_digest = config_fingerprint(c);
  const InteractionSystem sys = hypotheses(c, report);
  if (!sys.alpha || !sys.h3 || !sys.h1_holds) {
    report.summary.push_back("glue skipped: hypotheses fail");
    return;
  }
  const Vec& alpha = *sys.alpha;
  const GluedSurface surf = assemble(c, alpha);
  json sec;
  sec["epsilon"] = c.epsilon;
  sec["rho_star"] = c.rho_star;
  sec["box_half_width"] = surf.box_half_width;
  sec["outer_h"] = surf.outer_h;
  sec["outer_points"] = surf.outer.valid_count();

  double radius_err = 0.0;
  json necks = json::array();
  for (int j = 0; j < c.k(); ++j) {
    const NeckParams& p = surf.neck_params[j];
    const NeckScale& sc = surf.scales[j];
    radius_err = std::max({radius_err, std::abs(neck_end_radius(p, sc.s_star, NeckEnd::Lower) - c.rho_star),
                           std::abs(neck_end_radius(p, std::numbers::pi / c.n - sc.s_star, NeckEnd::Upper) - c.rho_star)});
    necks.push_back({{"beta", p.beta}, {"s_star", sc.s_star}, {"t_star", sc.t_star},
                     {"translation_imag", vec_json(p.translation.y())},
                     {"points", surf.necks[j].valid_count()}});
  }
  sec["necks"] = necks;
  report.checks.push_back(check("neck_boundary_radius_error", radius_err, "<", 1e-10));

  const GreenData data(c, alpha);
  const Vec balance = balance_residual(data);
  sec["balance_residual"] = vec_json(balance);
  report.checks.push_back(check("balance_residual_max", balance.maxCoeff(), "<", 1e-8));

  json gaps = json::array();
  double pos = 0.0;
  for (const EndGap& g : boundary_gap(surf)) {
    gaps.push_back({{"position_sup", g.position_sup}, {"collinear", g.collinear},
                    {"conormal_angle_sup", g.conormal_angle_sup}, {"samples", g.samples}});
    pos = std::max(pos, g.position_sup);
  }
  sec["boundary_gap"] = gaps;

  json curv = json::array();
  double outer_sup = 0.0;
  for (const PatchCurvature& pc : curvature_report(surf)) {
    curv.push_back({{"patch", pc.name}, {"sup", pc.sup}, {"fd_sup", pc.fd_sup}, {"nodes", pc.nodes},
                    {"histogram_log10", pc.histogram}});
    if (pc.name == "outer") outer_sup = pc.sup;
  }
  sec["curvature"] = curv;
  sec["hausdorff_to_planes"] = hausdorff_to_planes(surf, 0.5 * c.rho_star);

  if (c.n == 3) {
    const MatchCorrection m = match_boundaries(c, alpha, boundary_discrepancies(surf, c.settings.sh_degree));
    json phi_norms = json::array();
    for (int j = 0; j < c.k(); ++j) phi_norms.push_back({m.phi[j].max_abs(), m.phi_tilde[j].max_abs()});
    sec["matching"] = {{"L", c.settings.sh_degree},
                       {"delta_alpha", vec_json(m.delta_alpha)},
                       {"delta_beta", vec_json(m.delta_beta)},
                       {"collinear_u", vec_json(m.collinear_u)},
                       {"collinear_v", vec_json(m.collinear_v)},
                       {"phi_max_coefficients", phi_norms},
                       {"residual_norm", m.residual_norm},
                       {"note", "discrepancies are neck minus outer in the end frame; collinear rows "
                                "solved as u - v = -d, (1-n)u - v = -e"}};
    report.checks.push_back(check("matching_residual", m.residual_norm, "<", 1e-12));
  }
  if (o.export_path) {
    const auto ext = o.export_path->extension();
    export_surface(surf, ext == ".csv" ? ExportFormat::Csv : ExportFormat::Ply, *o.export_path);
    sec["export"] = {{"path", o.export_path->string()}, {"points", export_rows(surf).size()}};
  }
  report.sections["glue"] = sec;
  report.summary.push_back("glued " + std::to_string(c.k()) + " necks at ε = " + fmt(c.epsilon) +
                           ": boundary gap " + fmt(pos, 3) + ", outer sup|H| " + fmt(outer_sup, 3));
}

}  // namespace

RunReport run(const std::string& command, const RunOptions& options) {
  RunReport report;
  report.command = command;
  if (options.seed) report.seed = *options.seed;
  const auto start = std::chrono::steady_clock::now();
  try {
    if (command == "validate") run_validate(options, report);
    else if (command == "interaction") run_interaction(options, report);
    else if (command == "neck") run_neck(options, report);
    else if (command == "spectrum") run_spectrum(options, report);
    else if (command == "glue") run_glue(options, report);
    else if (command == "dtn") run_dtn(options, report);
    else throw InputError("unknown command '" + command + "'");
  } catch (const InputError&) {
    throw;
  } catch (const std::exception& e) {
    throw InputError(command + ": " + e.what());
  }
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

int main_entry(int argc, char** argv) {
  CLI::App app{"Numerical desingularization of intersecting special Lagrangian planes"};
  app.require_subcommand(1);
  RunOptions opts;
  std::uint64_t seed = 1;
  std::string report_path;
  bool as_json = false;
  app.add_option("--seed", seed, "Seed for Monte-Carlo and random test data");
  app.add_option("--report", report_path, "Write the JSON report to this file");
  app.add_flag("--json", as_json, "Print the JSON report instead of the summary");
  app.set_version_flag("--version", kToolVersion);

  std::string cfg, export_path;
  double eps = 0.0;
  auto* validate_cmd = app.add_subcommand("validate", "Check H1-H3 and solve for alpha");
  validate_cmd->add_option("config", cfg, "Configuration file")->required();
  auto* interaction_cmd = app.add_subcommand("interaction", "Gamma, Lambda, quadrature cross-checks, balancing");
  interaction_cmd->add_option("config", cfg, "Configuration file")->required();
  auto* neck_cmd = app.add_subcommand("neck", "Model neck curvature study and export");
  neck_cmd->add_option("--n", opts.n, "Dimension")->required();
  neck_cmd->add_option("--beta", opts.beta, "Neck scale beta")->required();
  neck_cmd->add_option("--eps", eps, "epsilon")->required();
  neck_cmd->add_option("--grid", opts.grid, "Parameter grid spacing");
  neck_cmd->add_option("--export", export_path, "Point cloud (.ply or .csv)");
  auto* spectrum_cmd = app.add_subcommand("spectrum", "Indicial roots of the mode systems");
  spectrum_cmd->add_option("--n", opts.n, "Dimension")->required();
  spectrum_cmd->add_option("--k", opts.k, "Eigenmode index")->required();
  auto* glue_cmd = app.add_subcommand("glue", "Assemble the glued surface and report");
  glue_cmd->add_option("config", cfg, "Configuration file")->required();
  glue_cmd->add_option("--eps", eps, "Override epsilon");
  glue_cmd->add_option("--export", export_path, "Point cloud (.ply or .csv)");
  auto* dtn_cmd = app.add_subcommand("dtn", "Dirichlet-to-Neumann witness");
  dtn_cmd->add_option("--degree", opts.degree, "Maximum degree L")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  if (!cfg.empty()) opts.config = cfg;
  if (!export_path.empty()) opts.export_path = export_path;
  if (eps != 0.0) opts.epsilon = eps;
  if (app.count("--seed")) opts.seed = seed;

  RunReport report;
  try {
    report = run(command, opts);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  const json j = report.to_json();
  if (!report_path.empty()) {
    std::ofstream out(report_path);
    if (!out || !(out << j.dump(2) << "\n")) {
      std::cerr << "error: " << report_path << ": cannot write report\n";
      return 2;
    }
  }
  if (as_json) {
    std::cout << j.dump(2) << "\n";
  } else {
    for (const auto& line : report.summary) std::cout << line << "\n";
    for (const Check& c : report.checks) {
      if (!c.pass) std::cout << "FAILED " << c.name << ": " << c.value << " " << c.relation << " " << c.threshold << "\n";
    }
  }
  return report.exit_code();
}

}  // namespace desing::cli
