#pragma once

// Scaling-law data model: power law plus constant, pure power law, training
// run records and compute accounting.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace scalefit {

/// FLOPs in one petaflop/s-day (1e15 FLOP/s for 86 400 s).
inline constexpr double kFlopsPerPfDay = 8.64e19;

enum class Variable { ModelSize, Compute, DatasetSize, ContextPosition };
enum class LossUnit { NatsPerToken, NatsPerExample };

std::string_view to_string(Variable v) noexcept;
std::string_view to_string(LossUnit u) noexcept;
/// Accepts the canonical names ("model-size", "compute", "data",
/// "position") plus a few aliases; throws Error(Domain) otherwise.
Variable parse_variable(std::string_view name);
LossUnit parse_loss_unit(std::string_view name);

/// L(x) = irreducible + (scale / x)^exponent.
///
/// `tokens_per_example` is 1 for per-token laws and the number of tokens
/// folded into one example for per-example laws.
struct ScalingLaw {
  double irreducible = 0.0;
  double scale = 1.0;
  double exponent = 1.0;
  Variable variable = Variable::Compute;
  LossUnit unit = LossUnit::NatsPerToken;
  double tokens_per_example = 1.0;

  /// Validating constructor; throws Error(Domain) on a broken invariant.
  static ScalingLaw make(double irreducible, double scale, double exponent,
                         Variable variable = Variable::Compute,
                         LossUnit unit = LossUnit::NatsPerToken,
                         double tokens_per_example = 1.0);

  void validate() const;

  friend bool operator==(const ScalingLaw&, const ScalingLaw&) = default;
};

/// y = coefficient * x^exponent.
struct PurePowerLaw {
  double coefficient = 1.0;
  double exponent = 1.0;
  Variable input = Variable::Compute;
  Variable output = Variable::ModelSize;

  double operator()(double x) const;

  friend bool operator==(const PurePowerLaw&, const PurePowerLaw&) = default;
};

double eval_law(const ScalingLaw& law, double x);
double reducible_at(const ScalingLaw& law, double x);

/// Converts a per-token law into a per-example law over `tokens_per_example`
/// tokens: every loss is multiplied by k, so L' = k L and x0' = x0 k^(1/a).
ScalingLaw rescale_loss(const ScalingLaw& law, double tokens_per_example);

/// C = 6 N E in PF-days. `flops_per_pf_day` is only overridden in tests.
double compute_pf_days(double n_params, double tokens,
                       double flops_per_pf_day = kFlopsPerPfDay);

/// Comparison of a derived quantity against a published, rounded one.
struct PublishedCheck {
  double derived = 0.0;
  double published = 0.0;
  double relative_error = 0.0;  // |derived - published| / |published|
  bool consistent = false;
  bool discrepancy() const { return !consistent; }
};

/// Consistent when `derived` differs from `published` by less than one unit
/// in the `significant_figures`-th significant digit of `published`.
PublishedCheck check_significant_figures(double derived, double published,
                                         int significant_figures);
/// Consistent when the relative error is at most `rel_tol`.
PublishedCheck check_relative(double derived, double published, double rel_tol);

double round_significant(double value, int significant_figures);

enum class Split { Test, Train };
std::string_view to_string(Split s) noexcept;
Split parse_split(std::string_view name);

struct RunPoint {
  std::int64_t step = 0;
  double tokens = 0.0;  // cumulative tokens processed, E
  double test_loss = 0.0;
  std::optional<double> train_loss;

  friend bool operator==(const RunPoint&, const RunPoint&) = default;
};

/// One training run: a model of `n_params` non-embedding parameters and its
/// learning curve.
struct RunRecord {
  std::string run_id;
  std::int64_t n_params = 0;
  std::optional<std::int64_t> batch_tokens;
  std::vector<RunPoint> series;

  bool has_train_split() const;
  /// Loss for the requested split, if that split was logged at this point.
  static std::optional<double> loss(const RunPoint& p, Split split);

  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

/// Human-readable list of invariant violations; empty when the run is valid.
std::vector<std::string> validate_run(const RunRecord& run);

}  // namespace scalefit
