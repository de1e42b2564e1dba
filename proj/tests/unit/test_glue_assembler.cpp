#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include <doctest.h>

#include "desing/glue_assembler.hpp"
#include "desing/numerics.hpp"
#include "test_support.hpp"

using namespace desing;
using test_support::flagship;

namespace {

constexpr double kPi = std::numbers::pi;
const Vec kFlagshipAlpha = (Vec(2) << 4.0, 12.0).finished();

Configuration single_end(double eps, double rho) {
  Configuration c;
  c.n = 3;
  c.points = {Vec::Zero(3)};
  c.rotations = {Mat::Identity(3, 3)};
  c.a0 = Mat::Zero(3, 3);
  c.epsilon = eps;
  c.rho_star = rho;
  c.settings.neck_nodes = 9;
  return c;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("desing_test_" + name);
}

}  // namespace

TEST_CASE("scales_from solves the radius identity on the lower branch") {
  const NeckScale sc = scales_from(1e-4, 0.2, 1.0, 3);
  const double s = sc.s_star;
  CHECK(s > 0.0);
  CHECK(s < radius_branch_minimum(3));
  CHECK(std::abs(std::sin(3 * s) - 3e-4 * std::pow(std::cos(s), 3) / 0.008) < 1e-12);
  CHECK(std::abs(s - 0.012500000061044242) < 1e-13);  // independent root finder
  CHECK(sc.t_star == s_to_t(s, 3));
  CHECK(std::exp(-3 * sc.t_star) ==
        doctest::Approx(std::sin(3 * s) / (1 - std::cos(3 * s))).epsilon(1e-12));
  CHECK(sc.t_star < 0.0);

  double prev_s = 1.0, prev_t = 1.0;
  for (double eps : {1e-3, 1e-5, 1e-7, 1e-9}) {
    const NeckScale e = scales_from(eps, 0.2, 1.0, 3);
    CHECK(e.s_star < prev_s);
    CHECK(e.t_star < prev_t);
    prev_s = e.s_star;
    prev_t = e.t_star;
  }
  CHECK(prev_s < 1e-6);
  CHECK_THROWS_AS(scales_from(1.0, 0.2, 1.0, 3), std::domain_error);
  CHECK_THROWS_AS(scales_from(1e-4, -0.2, 1.0, 3), std::invalid_argument);
}

TEST_CASE("neck_s_derivative matches finite differences") {
  std::mt19937_64 rng(2);
  for (int n : {2, 3, 4}) {
    const NeckParams p(n, 1.7, 1e-2, test_support::random_orthogonal(n, rng),
                       AmbientPoint(Vec::Ones(n), Vec::Zero(n)));
    const Vec th = test_support::random_vector(n, rng).normalized();
    const double s = 0.3 * kPi / n, h = 1e-5;
    const Vec fd = (neck_point_at(p, s + h, th).to_real() - neck_point_at(p, s - h, th).to_real()) / (2 * h);
    CHECK((fd - neck_s_derivative(p, s, th)).norm() < 1e-8 * fd.norm());
  }
}

TEST_CASE("assemble: flagship surface") {
  const Configuration cfg = flagship(1e-4, 0.5);
  const GluedSurface surf = assemble(cfg, kFlagshipAlpha);
  REQUIRE(surf.necks.size() == 2);
  CHECK(surf.box_half_width == 2.0);
  CHECK(surf.outer_h == 0.125);
  CHECK(surf.digest == config_fingerprint(cfg));
  CHECK(surf.digest.size() == 16);
  const GreenData data(cfg, kFlagshipAlpha);
  for (int j = 0; j < 2; ++j) {
    const NeckParams& p = surf.neck_params[j];
    CHECK(p.beta == kFlagshipAlpha(j));
    CHECK((p.rotation - cfg.rotations[j]).norm() == 0.0);
    CHECK((p.translation.x() - cfg.points[j]).norm() == 0.0);
    CHECK((p.translation.y() - cfg.epsilon * neck_offset(data, j)).norm() < 1e-18);
    const double s = surf.scales[j].s_star;
    CHECK(std::abs(neck_end_radius(p, s, NeckEnd::Lower) - 0.5) < 1e-10);
    CHECK(std::abs(neck_end_radius(p, kPi / 3 - s, NeckEnd::Upper) - 0.5) < 1e-10);
    // sampled boundary rows sit on the radius rho_* sphere
    const ImmersionPatch& neck = surf.necks[j];
    const int last = neck.grid().dim(0) - 1;
    for (std::size_t node = 0; node < neck.size(); ++node) {
      if (!neck.valid(node) || neck.grid().multi_index(node)[0] != 0) continue;
      CHECK(std::abs((neck.point(node).head(3) - cfg.points[j]).norm() - 0.5) < 1e-10);
    }
    CHECK(neck.grid().coordinate(0, last) == doctest::Approx(kPi / 3 - s).epsilon(1e-14));
  }
  for (std::size_t node = 0; node < surf.outer.size(); ++node) {
    if (!surf.outer.valid(node)) continue;
    const Vec x = surf.outer.point(node).head(3);
    for (const Vec& p : cfg.points) CHECK((x - p).norm() >= 0.5);
  }
  CHECK_THROWS_AS(assemble(cfg, (Vec(2) << 4.0, -1.0).finished()), std::invalid_argument);
}

TEST_CASE("rescaled necks are alpha-scaled model necks") {
  const Configuration cfg = flagship(1e-4, 0.5);
  const GluedSurface surf = assemble(cfg, kFlagshipAlpha);
  const int n = 3;
  double worst = 0.0;
  for (int j = 0; j < 2; ++j) {
    const NeckParams model(n, kFlagshipAlpha(j), 1.0, cfg.rotations[j], AmbientPoint::zero(n));
    const ImmersionPatch& neck = surf.necks[j];
    const Vec shift = surf.neck_params[j].translation.to_real();
    for (std::size_t node = 0; node < neck.size(); ++node) {
      if (!neck.valid(node)) continue;
      const Vec u = neck.grid().parameters(node);
      const std::vector<double> ang(u.data() + 1, u.data() + n);
      const Vec scaled = (neck.point(node) - shift) * std::pow(cfg.epsilon, -1.0 / n);
      worst = std::max(worst, (scaled - neck_point(model, u(0), ang).to_real()).norm() /
                                  std::max(1.0, scaled.norm()));
    }
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("single end: boundary gap is cubic in epsilon") {
  const double rho = 0.5;
  std::vector<double> eps_list{1e-3, 1e-4, 1e-5}, gaps;
  for (double eps : eps_list) {
    const GluedSurface surf = assemble(single_end(eps, rho), Vec::Ones(1));
    const EndGap g = boundary_gap(surf).front();
    const double bound = std::pow(eps, 3) * std::pow(rho, 1 - 9);
    CHECK(g.position_sup < 2.0 * bound);
    gaps.push_back(g.position_sup);
  }
  CHECK(loglog_slope(eps_list, gaps) == doctest::Approx(3.0).epsilon(0.05));
}

TEST_CASE("flagship boundary gaps shrink with epsilon") {
  std::vector<double> eps_list{1e-3, 3e-4, 1e-4, 3e-5}, pos, col, ang;
  for (double eps : eps_list) {
    const GluedSurface surf = assemble(flagship(eps, 0.5), kFlagshipAlpha);
    double p = 0.0, c = 0.0, a = 0.0;
    for (const EndGap& g : boundary_gap(surf)) {
      p = std::max(p, g.position_sup);
      c = std::max(c, std::abs(g.collinear));
      a = std::max(a, g.conormal_angle_sup);
    }
    pos.push_back(p);
    col.push_back(c);
    ang.push_back(a);
  }
  for (std::size_t i = 1; i < pos.size(); ++i) {
    CHECK(pos[i] <= pos[i - 1]);
    CHECK(ang[i] <= ang[i - 1]);
  }
  // the Theta-collinear part carries no linear-in-rho term once balanced
  CHECK(loglog_slope(eps_list, col) >= 2.0);
  CHECK(loglog_slope(eps_list, pos) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("perturbed alpha: collinear gap tracks Gamma delta alpha") {
  const Configuration cfg = flagship(1e-5, 0.5);
  const Vec alpha = kFlagshipAlpha * 1.1;
  const Vec predicted = gamma_matrix(cfg) * (alpha - kFlagshipAlpha) / omega_n(3);
  const auto gaps = boundary_gap(assemble(cfg, alpha));
  for (int j = 0; j < 2; ++j) {
    const double measured = std::abs(gaps[j].collinear) / (cfg.epsilon * cfg.rho_star);
    CHECK(measured == doctest::Approx(std::abs(predicted(j))).epsilon(0.1));
  }
}

TEST_CASE("boundary discrepancies feed the matching solve") {
  const Configuration cfg = flagship(1e-4, 0.5);
  const GluedSurface surf = assemble(cfg, kFlagshipAlpha);
  const auto disc = boundary_discrepancies(surf, 8);
  REQUIRE(disc.size() == 2);
  const auto gaps = boundary_gap(surf);
  for (int j = 0; j < 2; ++j) {
    // the collinear coefficient of the value gap is the R_j Theta projection
    CHECK(split_theta(disc[j].value).collinear == doctest::Approx(gaps[j].collinear).epsilon(1e-6));
  }
  const MatchCorrection m = match_boundaries(cfg, kFlagshipAlpha, disc);
  CHECK(m.residual_norm < 1e-12);
  CHECK(m.delta_alpha.allFinite());
}

TEST_CASE("curvature report") {
  std::vector<double> sups;
  for (double eps : {2e-3, 1e-3}) {
    const auto report = curvature_report(assemble(flagship(eps, 0.5), kFlagshipAlpha));
    REQUIRE(report.size() == 3);
    CHECK(report[0].name == "outer");
    CHECK(report[0].nodes > 1000);
    std::size_t total = 0;
    for (auto c : report[0].histogram) total += c;
    CHECK(total == report[0].nodes);
    for (std::size_t i = 1; i < report.size(); ++i) {
      CHECK(report[i].nodes > 0);
      CHECK(std::isfinite(report[i].sup));
    }
    sups.push_back(report[0].sup);
  }
  CHECK(sups[0] / sups[1] == doctest::Approx(8.0).epsilon(0.1));
}

TEST_CASE("Hausdorff distance to the planes decreases with epsilon") {
  double prev = std::numeric_limits<double>::infinity();
  for (double eps : {1e-3, 1e-4, 1e-5}) {
    const double d = hausdorff_to_planes(assemble(flagship(eps, 0.5), kFlagshipAlpha), 0.25);
    CHECK(d < prev);
    prev = d;
  }
}

TEST_CASE("ends approach the plane x + i eps A0 x") {
  const Configuration cfg = flagship();
  const GreenData data(cfg, kFlagshipAlpha);
  std::mt19937_64 rng(4);
  for (double r : {50.0, 500.0, 5000.0}) {
    const Vec x = test_support::random_vector(3, rng).normalized() * r;
    const double dev = (green_eval(data, x) - cfg.a0 * x).norm();
    CHECK(dev * r * r < 1.1 * kFlagshipAlpha.sum());
  }
}

TEST_CASE("export round trips") {
  const GluedSurface surf = assemble(flagship(1e-3, 0.5), kFlagshipAlpha);
  const auto rows = export_rows(surf);
  CHECK(rows.size() > 1000);
  for (ExportFormat f : {ExportFormat::Csv, ExportFormat::Ply}) {
    const auto path = temp_file(f == ExportFormat::Csv ? "rt.csv" : "rt.ply");
    export_surface(surf, f, path);
    const auto back = read_points(path, f);
    REQUIRE(back.size() == rows.size());
    bool exact = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      exact = exact && back[i].patch == rows[i].patch && back[i].coords == rows[i].coords &&
              back[i].params == rows[i].params;
    }
    CHECK(exact);
    std::filesystem::remove(path);
  }

  const auto empty = temp_file("empty.ply");
  write_points({}, 3, ExportFormat::Ply, empty);
  CHECK(read_points(empty, ExportFormat::Ply).empty());
  std::ifstream in(empty);
  std::string text((std::istreambuf_iterator<char>(in)), {});
  CHECK(text.find("element vertex 0") != std::string::npos);
  CHECK(text.substr(text.size() - 11) == "end_header\n");
  std::filesystem::remove(empty);

  CHECK_THROWS_WITH_AS(read_points("/nonexistent/dir/x.csv", ExportFormat::Csv),
                       doctest::Contains("/nonexistent/dir/x.csv"), std::runtime_error);
  CHECK_THROWS_AS(write_points({}, 3, ExportFormat::Csv, "/nonexistent/dir/x.csv"), std::runtime_error);
}

TEST_CASE("n = 2 neck exports four coordinates") {
  const NeckParams p(2, 1.0, 1e-2);
  const Grid g({9, 16}, {0.1, 0.0}, {(kPi / 2 - 0.2) / 8, kPi / 8});
  const ImmersionPatch neck = neck_patch(p, g);
  std::vector<ExportRow> rows;
  for (std::size_t node = 0; node < neck.size(); ++node) {
    if (neck.valid(node)) rows.push_back({1, neck.point(node), g.parameters(node)});
  }
  const auto path = temp_file("n2.ply");
  write_points(rows, 2, ExportFormat::Ply, path);
  std::ifstream in(path);
  std::string text((std::istreambuf_iterator<char>(in)), {});
  CHECK(text.find("property double c3") != std::string::npos);
  CHECK(text.find("comment") != std::string::npos);
  const auto back = read_points(path, ExportFormat::Ply);
  REQUIRE(back.size() == rows.size());
  CHECK(back.front().coords.size() == 4);
  CHECK(back.front().coords == rows.front().coords);
  std::filesystem::remove(path);
}
