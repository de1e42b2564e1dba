#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "desing/boundary_matching.hpp"
#include "desing/configuration.hpp"
#include "desing/green_graph.hpp"
#include "desing/lawlor_neck.hpp"

namespace desing {

struct NeckScale {
  double s_star = 0.0;
  double t_star = 0.0;
  double rho_star = 0.0;
};

// rho_* = (n beta eps)^{1/n} cos s_* (sin n s_*)^{-1/n} on the lower branch, and
// e^{-n t_*} = sin(n s_*) / (1 - cos(n s_*)). Throws std::domain_error when rho_* is below
// the branch minimum of the scaled radius.
NeckScale scales_from(double epsilon, double rho_star, double beta, int n);

enum class NeckEnd { Lower, Upper };

// Radius of the neck end inside its asymptotic plane: the real part for the lower end,
// the component along cos(pi/n) Theta + i sin(pi/n) R Theta for the upper one.
double neck_end_radius(const NeckParams& params, double s, NeckEnd end);

// d/ds of neck_point_at, as a vector of R^{2n}.
Vec neck_s_derivative(const NeckParams& params, double s, const Vec& theta);

struct GluedSurface {
  Configuration config;
  Vec alpha;
  Vec beta;
  double box_half_width = 0.0;
  double outer_h = 0.0;
  ImmersionPatch outer;
  std::vector<NeckParams> neck_params;
  std::vector<NeckScale> scales;
  std::vector<ImmersionPatch> necks;
  std::string digest;  // config fingerprint the surface was built from
};

// Outer Green graph on [-B, B]^n minus the balls |x - x_j| < rho_*, with
// B = 2 max(1, max |x_j|) and spacing settings.grid_h (rho_* / 4 when unset); neck j is
// H_{R_j} scaled by (n beta_j eps)^{1/n} on s in [s_*, pi/n - s_*], translated by
// x_j + i eps c_j. beta starts at alpha. Throws std::invalid_argument unless alpha > 0.
GluedSurface assemble(const Configuration& config, const Vec& alpha);

struct EndGap {
  double position_sup = 0.0;        // sup |neck - outer| on the radius rho_* sphere
  double collinear = 0.0;           // (1/omega) int (Im neck - Im outer) . R_j Theta
  double conormal_angle_sup = 0.0;  // radians
  int samples = 0;
};

// Neck boundary circle against the outer graph at x_j + rho_* Theta over the nodes of
// `rule` (the same angular nodes on both sides).
std::vector<EndGap> boundary_gap(const GluedSurface& surface, const QuadratureRule& rule);
std::vector<EndGap> boundary_gap(const GluedSurface& surface);

// n = 3: per-end discrepancies (neck minus outer, in the end frame) analysed into
// spherical harmonics of degree <= max_degree, ready for match_boundaries.
std::vector<BoundaryDiscrepancy> boundary_discrepancies(const GluedSurface& surface,
                                                        int max_degree);

struct PatchCurvature {
  std::string name;
  double sup = 0.0;     // outer: exact-derivative residual; necks: finite differences
  double fd_sup = 0.0;  // finite differences on the sample grid
  std::size_t nodes = 0;
  // counts of log10 |H| in [-16, -15), ..., [-1, 0), [0, inf); smaller values go to bin 0
  std::vector<std::size_t> histogram;
};

// One entry for the outer patch followed by one per neck. Neck nodes near the chart
// poles are skipped.
std::vector<PatchCurvature> curvature_report(const GluedSurface& surface);

// One-sided sampled distance from the surface to R^n and the planes
// x_j + {cos(pi/n) v + i sin(pi/n) R_j v}, over samples whose real part lies
// at least `exclusion` from every x_j.
double hausdorff_to_planes(const GluedSurface& surface, double exclusion);

struct ExportRow {
  int patch = 0;  // 0 outer, j + 1 for neck j
  Vec coords;     // 2n ambient coordinates
  Vec params;     // n parameter coordinates
};

enum class ExportFormat { Ply, Csv };

std::vector<ExportRow> export_rows(const GluedSurface& surface);
void write_points(const std::vector<ExportRow>& rows, int n, ExportFormat format,
                  const std::filesystem::path& path);
void export_surface(const GluedSurface& surface, ExportFormat format,
                    const std::filesystem::path& path);
// Reads files written by write_points; throws std::runtime_error with the path on failure.
std::vector<ExportRow> read_points(const std::filesystem::path& path, ExportFormat format);

}  // namespace desing
