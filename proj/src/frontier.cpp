#include "scalefit/frontier.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "scalefit/error.hpp"

namespace scalefit {

namespace {

std::vector<double> median_smooth(const std::vector<double>& v, int window) {
  if (window <= 1) return v;
  const int half = window / 2;
  std::vector<double> out(v.size());
  const auto n = static_cast<int>(v.size());
  std::vector<double> buf;
  for (int i = 0; i < n; ++i) {
    buf.assign(v.begin() + std::max(0, i - half), v.begin() + std::min(n, i + half + 1));
    std::nth_element(buf.begin(), buf.begin() + static_cast<long>(buf.size() / 2), buf.end());
    out[static_cast<std::size_t>(i)] = buf[buf.size() / 2];
  }
  return out;
}

// z-component of (a - o) x (b - o) in log-log coordinates, with a rounding
// allowance scaled to the operands.
struct Turn {
  double cross;
  double tolerance;
};

Turn turn(const FrontierPoint& o, const FrontierPoint& a, const FrontierPoint& b) {
  const double ox = std::log(o.compute), oy = std::log(o.loss);
  const double ax = std::log(a.compute) - ox, ay = std::log(a.loss) - oy;
  const double bx = std::log(b.compute) - ox, by = std::log(b.loss) - oy;
  const double cross = ax * by - ay * bx;
  const double tol = 1e-10 * (std::fabs(ax * by) + std::fabs(ay * bx)) + 1e-300;
  return {cross, tol};
}

}  // namespace

Frontier build_pareto(std::span<const RunRecord> runs, const FrontierOptions& opts) {
  if (runs.empty()) fail(ErrorKind::InsufficientData, "no runs supplied");
  if (opts.smoothing_window < 1 || opts.smoothing_window % 2 == 0)
    fail(ErrorKind::Domain, "smoothing window must be a positive odd integer");

  std::vector<FrontierPoint> all;
  for (const auto& run : runs) {
    if (run.series.empty()) fail(ErrorKind::InsufficientData, "run '" + run.run_id + "' has no points");
    std::vector<double> tokens, losses;
    for (const auto& p : run.series) {
      if (auto l = RunRecord::loss(p, opts.split)) {
        tokens.push_back(p.tokens);
        losses.push_back(*l);
      }
    }
    losses = median_smooth(losses, opts.smoothing_window);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      all.push_back({compute_pf_days(static_cast<double>(run.n_params), tokens[i],
                                     opts.flops_per_pf_day),
                     losses[i], run.run_id, run.n_params});
    }
  }
  if (all.empty())
    fail(ErrorKind::InsufficientData,
         "no points logged for the " + std::string(to_string(opts.split)) + " split");

  // Ties in compute keep the lower loss, then the smaller model.
  std::sort(all.begin(), all.end(), [](const FrontierPoint& a, const FrontierPoint& b) {
    if (a.compute != b.compute) return a.compute < b.compute;
    if (a.loss != b.loss) return a.loss < b.loss;
    if (a.n_params != b.n_params) return a.n_params < b.n_params;
    return a.run_id < b.run_id;
  });

  Frontier f;
  for (auto& p : all) {
    if (f.pareto.empty() || p.loss < f.pareto.back().loss) f.pareto.push_back(std::move(p));
  }
  return f;
}

Frontier hull_points(Frontier frontier) {
  if (frontier.pareto.empty()) fail(ErrorKind::InsufficientData, "pareto frontier is empty");
  std::vector<FrontierPoint> hull;
  for (const auto& p : frontier.pareto) {
    while (hull.size() >= 2) {
      const Turn t = turn(hull[hull.size() - 2], hull.back(), p);
      if (t.cross < -t.tolerance)
        hull.pop_back();
      else
        break;
    }
    hull.push_back(p);
  }
  frontier.hull = std::move(hull);
  return frontier;
}

bool is_log_convex(std::span<const FrontierPoint> points) {
  for (std::size_t i = 2; i < points.size(); ++i) {
    const Turn t = turn(points[i - 2], points[i - 1], points[i]);
    if (t.cross < -t.tolerance) return false;
  }
  return true;
}

std::vector<DataPoint> as_points(std::span<const FrontierPoint> points) {
  std::vector<DataPoint> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back({p.compute, p.loss});
  return out;
}

FitReport fit_nopt(const Frontier& frontier, const NoptOptions& opts) {
  std::set<std::int64_t> sizes;
  for (const auto& p : frontier.hull) sizes.insert(p.n_params);
  if (frontier.hull.size() < 3 || sizes.size() < 3)
    fail(ErrorKind::InsufficientData, "N_opt fit needs at least 3 distinct model sizes on the hull");

  // The smallest and largest models own frontier segments that extend past
  // their optimal range, since no smaller or larger model competes there.
  const bool trim = opts.exclude_edge_models && sizes.size() >= 5;
  const std::int64_t smallest = *sizes.begin();
  const std::int64_t largest = *sizes.rbegin();
  std::vector<DataPoint> pts;
  for (const auto& p : frontier.hull) {
    if (trim && (p.n_params == smallest || p.n_params == largest)) continue;
    pts.push_back({p.compute, static_cast<double>(p.n_params)});
  }
  FitReport r = fit_pure_power(pts, Variable::Compute, Variable::ModelSize);
  r.selection_policy = trim ? "convex-hull points, smallest and largest model excluded"
                            : "convex-hull points of the compute frontier";
  return r;
}

double data_scaling_exponent(double beta) {
  if (!(beta > 0.0 && beta < 1.0)) fail(ErrorKind::Domain, "beta must lie in (0, 1)");
  return (1.0 - beta) / beta;
}

PurePowerLaw tokens_compute_law(const PurePowerLaw& nopt, double flops_per_pf_day) {
  const double beta = nopt.exponent;
  if (!(beta < 1.0))
    fail(ErrorKind::NoSolution, "C = 6 D N_opt(C) has no power-law solution for beta >= 1");
  if (!(beta > 0.0)) fail(ErrorKind::Domain, "beta must be > 0");
  if (!(nopt.coefficient > 0.0 && flops_per_pf_day > 0.0))
    fail(ErrorKind::Domain, "coefficient and FLOPs per PF-day must be > 0");
  const double power = 1.0 / (1.0 - beta);
  return PurePowerLaw{std::pow(6.0 * nopt.coefficient / flops_per_pf_day, power), power,
                      Variable::DatasetSize, Variable::Compute};
}

}  // namespace scalefit
