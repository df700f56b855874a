#include "scalefit/powerfit.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <set>
#include <sstream>

#include "parallel.hpp"
#include "scalefit/error.hpp"

namespace scalefit {

void FitOptions::validate() const {
  if (max_iterations < 1) fail(ErrorKind::Domain, "max_iterations must be >= 1");
  if (!(tolerance > 0.0)) fail(ErrorKind::Domain, "tolerance must be > 0");
  if (irreducible_grid_points < 1) fail(ErrorKind::Domain, "irreducible grid needs >= 1 point");
  if (exponent_grid.empty()) fail(ErrorKind::Domain, "exponent grid is empty");
  for (double a : exponent_grid)
    if (!(a > 0.0)) fail(ErrorKind::Domain, "exponent grid values must be > 0");
  if (bootstrap_replicates < 1) fail(ErrorKind::Domain, "bootstrap_replicates must be >= 1");
  if (!(irreducible_headroom >= 0.0 && std::isfinite(irreducible_headroom)))
    fail(ErrorKind::Domain, "irreducible_headroom must be >= 0");
  if (!(asymmetry >= 1.0)) fail(ErrorKind::Domain, "asymmetry must be >= 1");
  if (!(ci_low_percentile >= 0.0 && ci_low_percentile < ci_high_percentile &&
        ci_high_percentile <= 100.0))
    fail(ErrorKind::Domain, "CI percentiles must satisfy 0 <= low < high <= 100");
}

std::string_view to_string(FitKind kind) noexcept {
  switch (kind) {
    case FitKind::PowerPlusConstant: return "power-plus-constant";
    case FitKind::PurePower: return "pure-power";
    case FitKind::BelowFrontier: return "below-frontier";
  }
  return "unknown";
}

const ScalingLaw& FitReport::law() const {
  if (const auto* l = std::get_if<ScalingLaw>(&model)) return *l;
  fail(ErrorKind::NotDecomposable, "fit holds a pure power law, not a power law plus constant");
}

const PurePowerLaw& FitReport::power() const {
  if (const auto* p = std::get_if<PurePowerLaw>(&model)) return *p;
  fail(ErrorKind::Domain, "fit holds a power law plus constant, not a pure power law");
}

std::vector<double> FitReport::parameters() const {
  if (is_law()) {
    const auto& l = law();
    return {l.irreducible, l.scale, l.exponent};
  }
  const auto& p = power();
  return {p.coefficient, p.exponent};
}

FitReport FitReport::from_law(const ScalingLaw& law) {
  law.validate();
  FitReport r;
  r.kind = FitKind::PowerPlusConstant;
  r.model = law;
  r.converged = true;
  r.selection_policy = "supplied";
  return r;
}

FitReport FitReport::from_power(const PurePowerLaw& power) {
  FitReport r;
  r.kind = FitKind::PurePower;
  r.model = power;
  r.converged = true;
  r.selection_policy = "supplied";
  return r;
}

std::vector<double> log_residuals(const ScalingLaw& law, std::span<const DataPoint> points) {
  std::vector<double> r;
  r.reserve(points.size());
  for (const auto& p : points) r.push_back(std::log(eval_law(law, p.x)) - std::log(p.y));
  return r;
}

namespace {

struct Prepared {
  std::vector<double> log_x;
  std::vector<double> y;
  std::vector<double> log_y;
  double min_y = 0.0;
  double max_y = 0.0;
  double upper = 0.0;  // upper bound of the irreducible loss
  std::size_t median_index = 0;  // index of the median-x point
};

void check_positive(std::span<const DataPoint> points) {
  for (const auto& p : points) {
    if (!(std::isfinite(p.x) && p.x > 0.0 && std::isfinite(p.y) && p.y > 0.0))
      fail(ErrorKind::Domain, "fit points must have finite, positive x and y");
  }
}

std::size_t distinct_x(std::span<const DataPoint> points) {
  std::set<double> xs;
  for (const auto& p : points) xs.insert(p.x);
  return xs.size();
}

Prepared prepare_law_fit(std::span<const DataPoint> points, double headroom) {
  if (points.size() < 4) fail(ErrorKind::InsufficientData, "need at least 4 points");
  check_positive(points);
  if (distinct_x(points) < 3) fail(ErrorKind::InsufficientData, "need at least 3 distinct x values");

  Prepared d;
  d.min_y = std::numeric_limits<double>::infinity();
  d.max_y = -d.min_y;
  for (const auto& p : points) {
    d.log_x.push_back(std::log(p.x));
    d.y.push_back(p.y);
    d.log_y.push_back(std::log(p.y));
    d.min_y = std::min(d.min_y, p.y);
    d.max_y = std::max(d.max_y, p.y);
  }
  if (d.max_y == d.min_y)
    fail(ErrorKind::DegenerateData, "all losses are equal; the exponent is unidentifiable");
  d.upper = d.min_y * (1.0 + headroom) - 1e-3 * (d.max_y - d.min_y);
  if (d.upper < 0.0) d.upper = 0.0;

  std::vector<std::size_t> order(points.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return d.log_x[a] < d.log_x[b]; });
  d.median_index = order[order.size() / 2];
  return d;
}

// Parameters: (irreducible, ln scale, ln exponent).
using Params = Eigen::Vector3d;

struct Evaluation {
  double cost = std::numeric_limits<double>::infinity();
  Eigen::VectorXd residual;  // weighted
  Eigen::MatrixXd jacobian;  // weighted
};

Evaluation evaluate(const Prepared& d, const Params& p, double asymmetry, bool with_jacobian) {
  const std::size_t n = d.y.size();
  Evaluation e;
  e.residual.resize(static_cast<Eigen::Index>(n));
  if (with_jacobian) e.jacobian.resize(static_cast<Eigen::Index>(n), 3);
  const double alpha = std::exp(p[2]);
  double cost = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double arg = std::min(alpha * (p[1] - d.log_x[i]), 700.0);
    const double red = std::exp(arg);
    const double model = p[0] + red;
    if (!(model > 0.0) || !std::isfinite(model)) return Evaluation{};
    const double r = std::log(model) - d.log_y[i];
    const double w = (r > 0.0) ? std::sqrt(asymmetry) : 1.0;
    const auto row = static_cast<Eigen::Index>(i);
    e.residual[row] = w * r;
    cost += w * w * r * r;
    if (with_jacobian) {
      e.jacobian(row, 0) = w / model;
      e.jacobian(row, 1) = w * alpha * red / model;
      e.jacobian(row, 2) = w * arg * red / model;
    }
  }
  if (!std::isfinite(cost)) return Evaluation{};
  e.cost = cost;
  return e;
}

struct LocalResult {
  Params params;
  double cost = std::numeric_limits<double>::infinity();
  bool converged = false;
  int iterations = 0;
};

LocalResult levenberg_marquardt(const Prepared& d, Params p, double asymmetry,
                                const FitOptions& opts) {
  LocalResult out;
  Evaluation cur = evaluate(d, p, asymmetry, true);
  if (!std::isfinite(cur.cost)) return out;
  double mu = 1e-3;
  int it = 0;
  bool converged = false;
  for (; it < opts.max_iterations; ++it) {
    const Eigen::Vector3d grad = cur.jacobian.transpose() * cur.residual;
    Eigen::Matrix3d jtj = cur.jacobian.transpose() * cur.jacobian;

    // Box constraint on the irreducible loss: freeze it when it sits on a
    // bound and the gradient points outward.
    const bool at_lower = p[0] <= 0.0 && grad[0] > 0.0;
    const bool at_upper = p[0] >= d.upper && grad[0] < 0.0;
    const bool freeze = at_lower || at_upper;

    bool accepted = false;
    while (!accepted) {
      Eigen::Vector3d step = Eigen::Vector3d::Zero();
      if (freeze) {
        Eigen::Matrix2d a = jtj.bottomRightCorner<2, 2>();
        for (int k = 0; k < 2; ++k) a(k, k) += mu * std::max(a(k, k), 1e-300);
        step.tail<2>() = a.ldlt().solve(-grad.tail<2>());
      } else {
        Eigen::Matrix3d a = jtj;
        for (int k = 0; k < 3; ++k) a(k, k) += mu * std::max(a(k, k), 1e-300);
        step = a.ldlt().solve(-grad);
      }
      if (!step.allFinite()) {
        mu *= 10.0;
        if (mu > 1e20) break;
        continue;
      }
      Params trial = p + step;
      trial[0] = std::clamp(trial[0], 0.0, d.upper);
      Evaluation next = evaluate(d, trial, asymmetry, true);
      if (next.cost < cur.cost) {
        const Eigen::Vector3d moved = trial - p;
        p = trial;
        const double old_cost = cur.cost;
        cur = std::move(next);
        mu = std::max(mu / 3.0, 1e-15);
        accepted = true;
        bool small = true;
        for (int k = 0; k < 3; ++k)
          small = small && std::fabs(moved[k]) <= opts.tolerance * (std::fabs(p[k]) + 1.0);
        if (small || old_cost - cur.cost <= 1e-15 * old_cost) converged = true;
      } else {
        mu *= 4.0;
        if (mu > 1e20) break;
      }
    }
    // No descent direction left at numerical precision: a stationary point.
    if (!accepted) {
      converged = true;
      break;
    }
    if (converged) {
      ++it;
      break;
    }
  }
  out.params = p;
  out.cost = cur.cost;
  out.converged = converged;
  out.iterations = it;
  return out;
}

ScalingLaw to_law(const Params& p, Variable variable) {
  return ScalingLaw::make(std::max(p[0], 0.0), std::exp(p[1]), std::exp(p[2]), variable);
}

double rms(const std::vector<double>& r) {
  double s = 0.0;
  for (double v : r) s += v * v;
  return std::sqrt(s / static_cast<double>(r.size()));
}

FitReport multistart_fit(std::span<const DataPoint> points, const Prepared& d,
                         const FitOptions& opts, double asymmetry, Variable variable) {
  std::vector<Params> starts;
  const int nl = opts.irreducible_grid_points;
  const double l_hi = 0.999 * d.min_y;
  for (int i = 0; i < nl; ++i) {
    const double frac = nl == 1 ? 0.0 : static_cast<double>(i) / (nl - 1);
    const double l0 = std::min(frac * l_hi, d.upper);
    for (double a0 : opts.exponent_grid) {
      const double red = d.y[d.median_index] - l0;
      const double c0 = d.log_x[d.median_index] + std::log(red) / a0;
      starts.emplace_back(l0, c0, std::log(a0));
    }
  }

  std::vector<LocalResult> results(starts.size());
  detail::parallel_for(starts.size(), opts.threads, [&](std::size_t i) {
    results[i] = levenberg_marquardt(d, starts[i], asymmetry, opts);
  });

  // Lowest cost, then smallest exponent, then smallest start index.
  int best = -1;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    if (!std::isfinite(r.cost)) continue;
    if (best < 0) {
      best = static_cast<int>(i);
      continue;
    }
    const auto& b = results[static_cast<std::size_t>(best)];
    const double tie = 1e-12 * std::max({r.cost, b.cost, 1e-300});
    if (r.cost < b.cost - tie || (std::fabs(r.cost - b.cost) <= tie && r.params[2] < b.params[2]))
      best = static_cast<int>(i);
  }

  FitReport report;
  report.kind = asymmetry == 1.0 ? FitKind::PowerPlusConstant : FitKind::BelowFrontier;
  report.n_points = points.size();
  report.asymmetry_used = asymmetry;
  report.selection_policy = "fit to supplied points";
  if (best < 0) {
    report.model = ScalingLaw{};
    report.converged = false;
    report.residual_rms = std::numeric_limits<double>::infinity();
    return report;
  }
  const auto& r = results[static_cast<std::size_t>(best)];
  const ScalingLaw law = to_law(r.params, variable);
  report.model = law;
  report.multistart_best_index = best;
  report.iterations = r.iterations;
  report.residual_rms = rms(log_residuals(law, points));
  report.converged = r.converged && std::isfinite(report.residual_rms);
  return report;
}

double max_overprediction(const ScalingLaw& law, std::span<const DataPoint> points) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& p : points) worst = std::max(worst, eval_law(law, p.x) - p.y);
  return worst;
}

}  // namespace

FitReport fit_power_plus_const(std::span<const DataPoint> points, const FitOptions& opts,
                               Variable variable) {
  opts.validate();
  const Prepared d = prepare_law_fit(points, opts.irreducible_headroom);
  return multistart_fit(points, d, opts, 1.0, variable);
}

FitReport fit_below_frontier(std::span<const DataPoint> hull, const FitOptions& opts,
                             Variable variable) {
  opts.validate();
  const Prepared d = prepare_law_fit(hull, opts.irreducible_headroom);
  // The asymmetric weight is escalated tenfold (at most three times) until
  // the fit lies below every hull point.
  double weight = opts.asymmetry;
  const int escalations = opts.asymmetry > 1.0 ? 3 : 0;
  FitReport report;
  for (int round = 0; round <= escalations; ++round, weight *= 10.0) {
    report = multistart_fit(hull, d, opts, weight, variable);
    if (opts.asymmetry == 1.0) report.kind = FitKind::BelowFrontier;
    if (!std::isfinite(report.residual_rms)) break;
    report.max_overprediction = max_overprediction(report.law(), hull);
    if (report.max_overprediction <= kFrontierSlack) break;
  }
  if (report.max_overprediction > kFrontierSlack) report.converged = false;
  return report;
}

FitReport fit_pure_power(std::span<const DataPoint> points, Variable input, Variable output) {
  check_positive(points);
  if (points.size() < 2 || distinct_x(points) < 2)
    fail(ErrorKind::InsufficientData, "pure power fit needs at least 2 distinct x values");
  const auto n = static_cast<double>(points.size());
  double mx = 0.0, my = 0.0;
  for (const auto& p : points) {
    mx += std::log(p.x);
    my += std::log(p.y);
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& p : points) {
    const double dx = std::log(p.x) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(p.y) - my);
  }
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;

  FitReport report;
  report.kind = FitKind::PurePower;
  report.model = PurePowerLaw{std::exp(intercept), slope, input, output};
  report.n_points = points.size();
  double ss = 0.0;
  for (const auto& p : points) {
    const double r = intercept + slope * std::log(p.x) - std::log(p.y);
    ss += r * r;
  }
  report.residual_rms = std::sqrt(ss / n);
  report.converged = std::isfinite(slope) && std::isfinite(intercept);
  report.multistart_best_index = 0;
  report.selection_policy = "fit to supplied points";
  return report;
}

namespace {

// Linear interpolation between closest ranks.
double percentile_of_sorted(const std::vector<double>& v, double pct) {
  if (v.size() == 1) return v.front();
  const double pos = pct / 100.0 * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] + frac * (v[hi] - v[lo]);
}

FitReport run_fit(std::span<const DataPoint> pts, FitKind kind, const FitOptions& opts,
                  Variable variable) {
  switch (kind) {
    case FitKind::PowerPlusConstant: return fit_power_plus_const(pts, opts, variable);
    case FitKind::BelowFrontier: return fit_below_frontier(pts, opts, variable);
    case FitKind::PurePower: return fit_pure_power(pts, variable);
  }
  fail(ErrorKind::Domain, "unknown fit kind");
}

}  // namespace

FitReport bootstrap_ci(std::span<const DataPoint> points, FitKind kind, const FitOptions& opts,
                       Variable variable) {
  opts.validate();
  if (opts.bootstrap_replicates < 50)
    fail(ErrorKind::Domain, "bootstrap needs at least 50 replicates");
  FitReport report = run_fit(points, kind, opts, variable);
  const std::vector<double> point_estimate = report.parameters();

  // Resample indices serially so the draw sequence is fixed by the seed.
  const auto reps = static_cast<std::size_t>(opts.bootstrap_replicates);
  std::mt19937_64 rng(opts.seed);
  std::uniform_int_distribution<std::size_t> pick(0, points.size() - 1);
  std::vector<std::vector<DataPoint>> samples(reps);
  for (auto& s : samples) {
    s.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) s.push_back(points[pick(rng)]);
  }

  FitOptions inner = opts;
  inner.threads = 1;
  std::vector<std::optional<std::vector<double>>> params(reps);
  detail::parallel_for(reps, opts.threads, [&](std::size_t i) {
    try {
      const FitReport r = run_fit(samples[i], kind, inner, variable);
      if (r.converged) params[i] = r.parameters();
    } catch (const Error&) {
      // counted as a failed replicate below
    }
  });

  int failures = 0;
  std::vector<std::vector<double>> columns(point_estimate.size());
  for (const auto& p : params) {
    if (!p) {
      ++failures;
      continue;
    }
    for (std::size_t k = 0; k < p->size(); ++k) columns[k].push_back((*p)[k]);
  }
  report.bootstrap_replicates = opts.bootstrap_replicates;
  report.bootstrap_failures = failures;
  if (failures * 5 > opts.bootstrap_replicates) {
    std::ostringstream os;
    os << failures << " of " << opts.bootstrap_replicates
       << " bootstrap replicates failed (more than 20%)";
    fail(ErrorKind::DegenerateData, os.str());
  }
  report.ci.clear();
  for (std::size_t k = 0; k < columns.size(); ++k) {
    auto& col = columns[k];
    std::sort(col.begin(), col.end());
    ParamInterval iv{percentile_of_sorted(col, opts.ci_low_percentile),
                     percentile_of_sorted(col, opts.ci_high_percentile)};
    // The interval always contains the full-sample estimate.
    iv.low = std::min(iv.low, point_estimate[k]);
    iv.high = std::max(iv.high, point_estimate[k]);
    report.ci.push_back(iv);
  }
  return report;
}

}  // namespace scalefit
