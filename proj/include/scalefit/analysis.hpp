#pragma once

// Forecasting, entropy/KL decomposition, the data-vs-compute consistency
// intersection, percentile trends and hyperparameter-scan optima.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scalefit/frontier.hpp"
#include "scalefit/lawcore.hpp"
#include "scalefit/powerfit.hpp"

namespace scalefit {

/// x such that reducible_at(law, x) == target.
double forecast_x_for_reducible(const ScalingLaw& law, double target);

struct Decomposition {
  double entropy_estimate = 0.0;  // irreducible loss, S(True)
  ScalingLaw kl_law;              // reducible part only (irreducible == 0)
  std::vector<std::string> caveats;
};

inline constexpr const char* kModelSizeCaveat =
    "model-size trends were measured at a fixed number of training steps; "
    "interpret the irreducible term with caution";

/// Errors: a pure power law (NotDecomposable); a non-converged fit (Domain).
Decomposition decompose(const FitReport& fit);
Decomposition decompose(const ScalingLaw& law);

struct ConsistencyOptions {
  double bracket_low = 1e-12;  // PF-days
  double bracket_high = 1e12;
  int grid_points = 241;       // log-spaced scan for the first sign change
  double tolerance = 1e-9;     // in ln C
  double flops_per_pf_day = kFlopsPerPfDay;
};

struct Intersection {
  bool found = false;
  double compute = 0.0;  // PF-days
  double tokens = 0.0;   // D at that compute
  double residual = 0.0; // |reducible L(D(C)) - reducible L(C)| in nats
};

struct ConsistencyReport {
  Intersection point;
  Intersection low;   // beta * (1 - perturb)
  Intersection high;  // beta * (1 + perturb)
  double perturb = 0.0;
  double band_low = 0.0;   // smallest intersection compute across the band
  double band_high = 0.0;  // largest
  bool bracketing = false; // band_low <= point <= band_high
  bool monotone = false;   // the three evaluations are ordered in beta
  ConsistencyOptions settings;
};

/// Maps L(D) into compute space through C(D) and intersects the reducible
/// parts of L(D(C)) and L(C) by bisection on ln C; repeats with beta
/// perturbed by +-perturb. A missing sign change is reported, not thrown.
ConsistencyReport consistency_check(const ScalingLaw& data_law, const PurePowerLaw& nopt,
                                    const ScalingLaw& compute_law, double perturb,
                                    const ConsistencyOptions& opts = {});

/// Per-example losses: row i holds the losses of model `n_params[i]`.
struct LossMatrix {
  std::vector<double> n_params;
  std::vector<std::vector<double>> losses;
};

inline const std::vector<double> kDefaultPercentiles{1, 5, 20, 50, 80, 95, 99};

/// Nearest-rank percentile of an unsorted sample.
double nearest_rank_percentile(std::vector<double> values, double pct);

struct PercentileTrend {
  double percentile = 0.0;
  std::vector<DataPoint> points;  // (n_params, percentile loss)
  FitReport fit;
};

std::vector<PercentileTrend> percentile_trends(const LossMatrix& matrix,
                                               std::span<const double> percentiles,
                                               const FitOptions& opts = {});

enum class ScanStatus { Interior, ClampedToRange, NoInteriorMinimum };
std::string_view to_string(ScanStatus s) noexcept;

struct ScanOptimum {
  double ratio = 0.0;
  double loss = 0.0;
  double curvature = 0.0;  // second derivative in ln(ratio)
  ScanStatus status = ScanStatus::Interior;
};

/// Quadratic in ln(ratio) through the three lowest-loss points.
ScanOptimum scan_optimum(std::span<const DataPoint> points);

struct TransferGap {
  double asymptotic_loss = 0.0;         // irreducible term of the transfer law
  std::optional<double> entropy;        // S(target), when known
  std::optional<double> kl_estimate;    // asymptotic_loss - entropy
  bool entropy_unknown = true;
  bool negative_kl = false;             // entropy > asymptotic loss
};

TransferGap transfer_gap(const ScalingLaw& transfer_law, std::optional<double> entropy);

}  // namespace scalefit
