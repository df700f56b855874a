#include "scalefit/lawcore.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "scalefit/error.hpp"

namespace scalefit {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Domain: return "domain";
    case ErrorKind::InsufficientData: return "insufficient-data";
    case ErrorKind::DegenerateData: return "degenerate-data";
    case ErrorKind::NotDecomposable: return "not-decomposable";
    case ErrorKind::NoSolution: return "no-solution";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Invariant: return "invariant";
  }
  return "unknown";
}

std::string_view to_string(Variable v) noexcept {
  switch (v) {
    case Variable::ModelSize: return "model-size";
    case Variable::Compute: return "compute";
    case Variable::DatasetSize: return "data";
    case Variable::ContextPosition: return "position";
  }
  return "unknown";
}

std::string_view to_string(LossUnit u) noexcept {
  return u == LossUnit::NatsPerToken ? "nats-per-token" : "nats-per-example";
}

Variable parse_variable(std::string_view name) {
  if (name == "model-size" || name == "n" || name == "params") return Variable::ModelSize;
  if (name == "compute" || name == "c") return Variable::Compute;
  if (name == "data" || name == "dataset-size" || name == "d") return Variable::DatasetSize;
  if (name == "position" || name == "context-position" || name == "t")
    return Variable::ContextPosition;
  fail(ErrorKind::Domain, "unknown variable kind '" + std::string(name) + "'");
}

LossUnit parse_loss_unit(std::string_view name) {
  if (name == "nats-per-token") return LossUnit::NatsPerToken;
  if (name == "nats-per-example") return LossUnit::NatsPerExample;
  fail(ErrorKind::Domain, "unknown loss unit '" + std::string(name) + "'");
}

ScalingLaw ScalingLaw::make(double irreducible, double scale, double exponent,
                            Variable variable, LossUnit unit,
                            double tokens_per_example) {
  ScalingLaw law{irreducible, scale, exponent, variable, unit, tokens_per_example};
  law.validate();
  return law;
}

void ScalingLaw::validate() const {
  if (!(std::isfinite(irreducible) && irreducible >= 0.0))
    fail(ErrorKind::Domain, "irreducible loss must be finite and >= 0");
  if (!(std::isfinite(scale) && scale > 0.0))
    fail(ErrorKind::Domain, "scale must be finite and > 0");
  if (!(std::isfinite(exponent) && exponent > 0.0))
    fail(ErrorKind::Domain, "exponent must be finite and > 0");
  if (!(std::isfinite(tokens_per_example) && tokens_per_example > 0.0))
    fail(ErrorKind::Domain, "tokens_per_example must be > 0");
}

double PurePowerLaw::operator()(double x) const {
  if (!(std::isfinite(x) && x > 0.0))
    fail(ErrorKind::Domain, "power law argument must be finite and > 0");
  return coefficient * std::pow(x, exponent);
}

namespace {

void require_positive_finite(double x, const char* what) {
  if (!(std::isfinite(x) && x > 0.0)) {
    std::ostringstream os;
    os << what << " must be finite and > 0 (got " << x << ")";
    fail(ErrorKind::Domain, os.str());
  }
}

}  // namespace

double reducible_at(const ScalingLaw& law, double x) {
  require_positive_finite(x, "law argument");
  return std::pow(law.scale / x, law.exponent);
}

double eval_law(const ScalingLaw& law, double x) {
  return law.irreducible + reducible_at(law, x);
}

ScalingLaw rescale_loss(const ScalingLaw& law, double k) {
  require_positive_finite(k, "tokens per example");
  if (law.unit != LossUnit::NatsPerToken)
    fail(ErrorKind::Domain, "rescale_loss expects a nats-per-token law");
  ScalingLaw out = law;
  out.irreducible = k * law.irreducible;
  out.scale = law.scale * std::pow(k, 1.0 / law.exponent);
  out.unit = LossUnit::NatsPerExample;
  out.tokens_per_example = k;
  return out;
}

double compute_pf_days(double n_params, double tokens, double flops_per_pf_day) {
  require_positive_finite(n_params, "parameter count");
  require_positive_finite(tokens, "token count");
  require_positive_finite(flops_per_pf_day, "FLOPs per PF-day");
  return 6.0 * n_params * tokens / flops_per_pf_day;
}

double round_significant(double value, int significant_figures) {
  if (value == 0.0 || !std::isfinite(value)) return value;
  const double magnitude = std::floor(std::log10(std::fabs(value)));
  const double factor = std::pow(10.0, significant_figures - 1 - magnitude);
  return std::round(value * factor) / factor;
}

PublishedCheck check_significant_figures(double derived, double published,
                                         int significant_figures) {
  PublishedCheck c;
  c.derived = derived;
  c.published = published;
  c.relative_error = std::fabs(derived - published) / std::fabs(published);
  // Agreement to less than one unit in the last printed significant figure.
  const double unit =
      std::pow(10.0, std::floor(std::log10(std::fabs(published))) - (significant_figures - 1));
  c.consistent = std::fabs(derived - published) < unit;
  return c;
}

PublishedCheck check_relative(double derived, double published, double rel_tol) {
  PublishedCheck c;
  c.derived = derived;
  c.published = published;
  c.relative_error = std::fabs(derived - published) / std::fabs(published);
  c.consistent = c.relative_error <= rel_tol;
  return c;
}

std::string_view to_string(Split s) noexcept { return s == Split::Test ? "test" : "train"; }

Split parse_split(std::string_view name) {
  if (name == "test") return Split::Test;
  if (name == "train") return Split::Train;
  fail(ErrorKind::Domain, "unknown split '" + std::string(name) + "'");
}

bool RunRecord::has_train_split() const {
  for (const auto& p : series)
    if (p.train_loss) return true;
  return false;
}

std::optional<double> RunRecord::loss(const RunPoint& p, Split split) {
  if (split == Split::Test) return p.test_loss;
  return p.train_loss;
}

std::vector<std::string> validate_run(const RunRecord& run) {
  std::vector<std::string> issues;
  if (run.run_id.empty()) issues.emplace_back("empty run_id");
  if (run.n_params <= 0) issues.emplace_back("n_params must be > 0");
  if (run.batch_tokens && *run.batch_tokens <= 0) issues.emplace_back("batch_tokens must be > 0");
  if (run.series.empty()) issues.emplace_back("series is empty");
  for (std::size_t i = 0; i < run.series.size(); ++i) {
    const RunPoint& p = run.series[i];
    auto at = [&](const std::string& msg) {
      issues.push_back("point " + std::to_string(i) + ": " + msg);
    };
    if (!(std::isfinite(p.tokens) && p.tokens > 0.0)) at("tokens must be finite and > 0");
    if (!(std::isfinite(p.test_loss) && p.test_loss > 0.0)) at("test loss must be finite and > 0");
    if (p.train_loss && !(std::isfinite(*p.train_loss) && *p.train_loss > 0.0))
      at("train loss must be finite and > 0");
    if (i > 0) {
      if (p.step <= run.series[i - 1].step) at("steps not strictly increasing");
      if (!(p.tokens > run.series[i - 1].tokens)) at("tokens not strictly increasing");
    }
    if (run.batch_tokens) {
      const double expected = static_cast<double>(p.step) * static_cast<double>(*run.batch_tokens);
      if (std::fabs(expected - p.tokens) > 1e-9 * std::max(1.0, expected))
        at("tokens != step * batch_tokens");
    }
  }
  return issues;
}

}  // namespace scalefit
