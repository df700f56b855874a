#pragma once

// Compute-efficient frontiers over collections of learning curves.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "scalefit/lawcore.hpp"
#include "scalefit/powerfit.hpp"

namespace scalefit {

struct FrontierPoint {
  double compute = 0.0;  // PF-days
  double loss = 0.0;     // nats
  std::string run_id;
  std::int64_t n_params = 0;
};

/// `pareto` is ordered by increasing compute with strictly decreasing loss;
/// `hull` is the subsequence on the lower convex hull in (ln C, ln L).
struct Frontier {
  std::vector<FrontierPoint> pareto;
  std::vector<FrontierPoint> hull;
};

struct FrontierOptions {
  Split split = Split::Test;
  /// Median-of-k smoothing applied to each learning curve before merging;
  /// 1 (the default) disables it. Must be odd.
  int smoothing_window = 1;
  double flops_per_pf_day = kFlopsPerPfDay;
};

Frontier build_pareto(std::span<const RunRecord> runs, const FrontierOptions& opts = {});

/// Populates `hull` from `pareto` (monotone-chain lower hull in log-log).
Frontier hull_points(Frontier frontier);

/// True when every consecutive triple of `points` turns left (or is
/// collinear to rounding) in (ln C, ln L).
bool is_log_convex(std::span<const FrontierPoint> points);

struct NoptOptions {
  /// Drop the hull points of the smallest and largest model when at least
  /// five distinct sizes reach the hull.
  bool exclude_edge_models = true;
};

/// Pure power-law fit of N against C over the hull points; exponent is beta.
/// Errors: fewer than 3 hull points or 3 distinct model sizes.
FitReport fit_nopt(const Frontier& frontier, const NoptOptions& opts = {});

/// D proportional to N^((1 - beta) / beta).
double data_scaling_exponent(double beta);

/// Solves C * F = 6 D N_opt(C) for C, giving C(D) in PF-days with D in tokens.
PurePowerLaw tokens_compute_law(const PurePowerLaw& nopt,
                                double flops_per_pf_day = kFlopsPerPfDay);

/// Points (C, loss) of a frontier section, for fitting.
std::vector<DataPoint> as_points(std::span<const FrontierPoint> points);

}  // namespace scalefit
