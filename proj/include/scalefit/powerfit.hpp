#pragma once

// Nonlinear fitting of power-law-plus-constant and pure power laws.
//
// All objectives are in log-loss space: residual_i = ln(model(x_i)) - ln(y_i).
// The power-plus-constant fit runs a damped Gauss-Newton (Levenberg-Marquardt)
// solve from every start of a fixed (irreducible, exponent) grid and keeps the
// best; the irreducible loss is box-constrained to
// [0, min(y) (1 + headroom) - 1e-3 (max(y) - min(y))].

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "scalefit/lawcore.hpp"

namespace scalefit {

struct DataPoint {
  double x = 0.0;
  double y = 0.0;
};

struct FitOptions {
  int max_iterations = 500;
  double tolerance = 1e-12;  // relative parameter change
  // Multistart grid: irreducible on `irreducible_grid_points` evenly spaced
  // fractions of [0, 0.999 min loss], exponent on `exponent_grid`.
  int irreducible_grid_points = 9;
  std::vector<double> exponent_grid{0.03, 0.05, 0.1, 0.15, 0.2, 0.3, 0.5, 0.7, 1.0};
  // Upper bound of the irreducible loss, as a fraction above the smallest
  // observed loss. Noisy points near the asymptote scatter below the true
  // irreducible loss; 0 pins the bound strictly below min(y).
  double irreducible_headroom = 0.1;
  int bootstrap_replicates = 200;
  std::uint64_t seed = 0;
  double asymmetry = 10.0;  // over-prediction weight for below-frontier fits
  double ci_low_percentile = 5.0;
  double ci_high_percentile = 95.0;
  /// Worker threads for multistart and bootstrap; 0 picks the hardware count.
  /// Results do not depend on this value.
  int threads = 0;

  /// Throws Error(Domain) when a count is < 1 or a tolerance is not > 0.
  void validate() const;
};

enum class FitKind { PowerPlusConstant, PurePower, BelowFrontier };
std::string_view to_string(FitKind kind) noexcept;

struct ParamInterval {
  double low = 0.0;
  double high = 0.0;
};

struct FitReport {
  FitKind kind = FitKind::PowerPlusConstant;
  std::variant<ScalingLaw, PurePowerLaw> model;
  double residual_rms = 0.0;  // log space
  std::size_t n_points = 0;
  bool converged = false;
  int multistart_best_index = -1;
  int iterations = 0;
  // Filled by bootstrap_ci: (irreducible, scale, exponent) for laws,
  // (coefficient, exponent) for pure power laws.
  std::vector<ParamInterval> ci;
  int bootstrap_replicates = 0;
  int bootstrap_failures = 0;
  // Below-frontier fits: largest over-prediction in nats, and the weight that
  // was finally used.
  double max_overprediction = 0.0;
  double asymmetry_used = 1.0;
  std::string selection_policy;  // free text recorded with the fit

  bool is_law() const { return std::holds_alternative<ScalingLaw>(model); }
  const ScalingLaw& law() const;
  const PurePowerLaw& power() const;
  /// Point estimates in CI order.
  std::vector<double> parameters() const;
  /// A converged report wrapping an externally supplied law.
  static FitReport from_law(const ScalingLaw& law);
  static FitReport from_power(const PurePowerLaw& power);
};

/// Minimizes sum_i (ln eval(law, x_i) - ln y_i)^2.
/// Errors: < 4 points or < 3 distinct x (InsufficientData); all y equal
/// (DegenerateData); non-positive values (Domain).
FitReport fit_power_plus_const(std::span<const DataPoint> points, const FitOptions& opts = {},
                               Variable variable = Variable::Compute);

/// Ordinary least squares of ln y on ln x.
FitReport fit_pure_power(std::span<const DataPoint> points,
                         Variable input = Variable::Compute,
                         Variable output = Variable::ModelSize);

/// Power-plus-constant fit with over-predictions weighted by
/// `opts.asymmetry`. Converged only if no prediction exceeds its observation
/// by more than kFrontierSlack nats.
FitReport fit_below_frontier(std::span<const DataPoint> hull, const FitOptions& opts = {},
                             Variable variable = Variable::Compute);

inline constexpr double kFrontierSlack = 1e-3;

/// Percentile bootstrap over resampled points; deterministic given
/// opts.seed. `kind` selects the underlying fit.
FitReport bootstrap_ci(std::span<const DataPoint> points, FitKind kind, const FitOptions& opts,
                       Variable variable = Variable::Compute);

/// Log-space residuals of a law against points.
std::vector<double> log_residuals(const ScalingLaw& law, std::span<const DataPoint> points);

}  // namespace scalefit
