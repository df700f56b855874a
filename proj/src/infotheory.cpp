#include "scalefit/infotheory.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "scalefit/error.hpp"

namespace scalefit {

namespace {

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) fail(ErrorKind::Domain, std::string(what) + " must be finite");
}

}  // namespace

MIEstimate mutual_info(double loss_unconditioned, double loss_conditioned) {
  require_finite(loss_unconditioned, "unconditioned loss");
  require_finite(loss_conditioned, "conditioned loss");
  if (loss_unconditioned < 0.0 || loss_conditioned < 0.0)
    fail(ErrorKind::Domain, "losses must be >= 0");
  MIEstimate e;
  e.mi = loss_unconditioned - loss_conditioned;
  e.negative = e.mi < 0.0;
  return e;
}

MIEstimate infogain(double mi, double loss_text) {
  require_finite(mi, "mutual information");
  if (!(std::isfinite(loss_text) && loss_text > 0.0))
    fail(ErrorKind::Domain, "text loss must be finite and > 0");
  MIEstimate e;
  e.mi = mi;
  e.negative = mi < 0.0;
  e.infogain = mi / loss_text;
  e.over_unity = *e.infogain > 1.0;
  return e;
}

double words_equivalent(double mi, double nats_per_word) {
  require_finite(mi, "mutual information");
  if (!(std::isfinite(nats_per_word) && nats_per_word > 0.0))
    fail(ErrorKind::Domain, "nats per word must be finite and > 0");
  return mi / nats_per_word;
}

double LogMIFit::operator()(double n_params) const {
  if (!(n_params > 0.0)) fail(ErrorKind::Domain, "parameter count must be > 0");
  return lambda * std::log(n_params / n_c);
}

LogMIFit fit_log_mi(std::span<const DataPoint> points) {
  std::set<double> xs;
  for (const auto& p : points) {
    if (!(std::isfinite(p.x) && p.x > 0.0)) fail(ErrorKind::Domain, "N must be finite and > 0");
    require_finite(p.y, "trend value");
    xs.insert(p.x);
  }
  if (xs.size() < 2) fail(ErrorKind::InsufficientData, "log trend needs at least 2 distinct N");

  const auto n = static_cast<double>(points.size());
  double mx = 0.0, my = 0.0;
  for (const auto& p : points) {
    mx += std::log(p.x);
    my += p.y;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& p : points) {
    const double dx = std::log(p.x) - mx;
    sxx += dx * dx;
    sxy += dx * (p.y - my);
  }
  LogMIFit fit;
  fit.lambda = sxy / sxx;
  const double intercept = my - fit.lambda * mx;
  fit.n_c = std::exp(-intercept / fit.lambda);
  fit.increasing = fit.lambda > 0.0;
  double ss = 0.0;
  for (const auto& p : points) {
    const double r = intercept + fit.lambda * std::log(p.x) - p.y;
    ss += r * r;
  }
  fit.residual_rms = std::sqrt(ss / n);
  return fit;
}

double invert_log_mi(const LogMIFit& fit, double target) {
  if (!(fit.lambda > 0.0)) fail(ErrorKind::Domain, "cannot invert a non-increasing log trend");
  require_finite(target, "target");
  return fit.n_c * std::exp(target / fit.lambda);
}

double gen_harmonic(std::int64_t terms, double power) {
  if (terms < 1) fail(ErrorKind::Domain, "harmonic number needs T >= 1");
  if (!(std::isfinite(power) && power >= 0.0)) fail(ErrorKind::Domain, "power must be >= 0");
  // Neumaier's variant of Kahan summation.
  double sum = 0.0;
  double carry = 0.0;
  for (std::int64_t t = 1; t <= terms; ++t) {
    const double term = std::pow(static_cast<double>(t), -power);
    const double next = sum + term;
    if (std::fabs(sum) >= std::fabs(term))
      carry += (sum - next) + term;
    else
      carry += (term - next) + sum;
    sum = next;
  }
  return sum + carry;
}

void ContextModel::validate() const {
  if (!(std::isfinite(l_model) && l_model > 0.0)) fail(ErrorKind::Domain, "L(N) must be > 0");
  if (!(std::isfinite(l_unigram) && l_unigram >= l_model))
    fail(ErrorKind::Domain, "unigram loss must be >= L(N)");
  if (!(p > 0.0 && p <= 1.0)) fail(ErrorKind::Domain, "context exponent p must lie in (0, 1]");
  if (horizon < 1) fail(ErrorKind::Domain, "horizon T must be >= 1");
}

double context_loss(double t, const ContextModel& model) {
  model.validate();
  if (!(std::isfinite(t) && t >= 1.0)) fail(ErrorKind::Domain, "context position must be >= 1");
  return model.l_model + (model.l_unigram - model.l_model) / std::pow(t, model.p);
}

double context_mi(const ContextModel& model) {
  model.validate();
  const double h_t = gen_harmonic(model.horizon, model.p);
  const double h_2t = gen_harmonic(2 * model.horizon, model.p);
  return (2.0 * h_t - h_2t) * (model.l_unigram - model.l_model);
}

double context_infogain(const ContextModel& model) {
  model.validate();
  const double h_t = gen_harmonic(model.horizon, model.p);
  const double h_2t = gen_harmonic(2 * model.horizon, model.p);
  const double gap = model.l_unigram - model.l_model;
  const double denom = static_cast<double>(model.horizon) * model.l_model + (h_2t - h_t) * gap;
  if (!(denom > 0.0)) fail(ErrorKind::Domain, "context infogain denominator must be > 0");
  return (2.0 * h_t - h_2t) * gap / denom;
}

double context_infogain_limit(std::int64_t horizon, double p) {
  const double h_t = gen_harmonic(horizon, p);
  const double h_2t = gen_harmonic(2 * horizon, p);
  return (2.0 * h_t - h_2t) / (h_2t - h_t);
}

ContextModel fit_context_profile(std::span<const DataPoint> losses, const FitOptions& opts) {
  for (const auto& pt : losses)
    if (!(pt.x >= 1.0)) fail(ErrorKind::Domain, "context positions must be >= 1");
  const FitReport fit = fit_power_plus_const(losses, opts, Variable::ContextPosition);
  const ScalingLaw& law = fit.law();
  ContextModel m;
  m.l_model = law.irreducible;
  m.l_unigram = law.irreducible + reducible_at(law, 1.0);
  m.p = law.exponent;
  double max_t = 1.0;
  for (const auto& pt : losses) max_t = std::max(max_t, pt.x);
  m.horizon = static_cast<std::int64_t>(std::floor(max_t));
  return m;
}

}  // namespace scalefit
