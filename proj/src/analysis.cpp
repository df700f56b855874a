#include "scalefit/analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include "parallel.hpp"
#include "scalefit/error.hpp"

namespace scalefit {

double forecast_x_for_reducible(const ScalingLaw& law, double target) {
  if (!(std::isfinite(target) && target > 0.0))
    fail(ErrorKind::Domain, "target reducible loss must be finite and > 0");
  return law.scale * std::pow(target, -1.0 / law.exponent);
}

Decomposition decompose(const ScalingLaw& law) {
  law.validate();
  Decomposition d;
  d.entropy_estimate = law.irreducible;
  d.kl_law = law;
  d.kl_law.irreducible = 0.0;
  if (law.variable == Variable::ModelSize) d.caveats.emplace_back(kModelSizeCaveat);
  return d;
}

Decomposition decompose(const FitReport& fit) {
  if (!fit.is_law())
    fail(ErrorKind::NotDecomposable, "a pure power law has no irreducible term to decompose");
  if (!fit.converged) fail(ErrorKind::Domain, "cannot decompose a non-converged fit");
  return decompose(fit.law());
}

namespace {

// ln(reducible L(D(C))) - ln(reducible L(C)) at u = ln C.
struct GapFunction {
  ScalingLaw data_law;
  ScalingLaw compute_law;
  PurePowerLaw c_of_d;

  double tokens_at(double u) const {
    // Inverse of C = a D^q.
    return std::exp((u - std::log(c_of_d.coefficient)) / c_of_d.exponent);
  }
  double operator()(double u) const {
    const double d = tokens_at(u);
    const double lhs = data_law.exponent * (std::log(data_law.scale) - std::log(d));
    const double rhs = compute_law.exponent * (std::log(compute_law.scale) - u);
    // Curves that coincide algebraically differ only by rounding; call that
    // zero so it cannot pass for a sign change.
    const double noise = 64.0 * std::numeric_limits<double>::epsilon() *
                         std::max({1.0, std::fabs(lhs), std::fabs(rhs), std::fabs(u)});
    return std::fabs(lhs - rhs) <= noise ? 0.0 : lhs - rhs;
  }
};

Intersection intersect(const GapFunction& gap, const ConsistencyOptions& opts) {
  Intersection out;
  const double u_lo = std::log(opts.bracket_low);
  const double u_hi = std::log(opts.bracket_high);
  const int n = std::max(opts.grid_points, 2);

  std::vector<double> us(static_cast<std::size_t>(n)), gs(us.size());
  for (int i = 0; i < n; ++i) {
    us[static_cast<std::size_t>(i)] = u_lo + (u_hi - u_lo) * i / (n - 1);
    gs[static_cast<std::size_t>(i)] = gap(us[static_cast<std::size_t>(i)]);
  }
  // First strict sign change between non-zero samples; an exact zero counts
  // only when its non-zero neighbours disagree in sign.
  std::optional<std::size_t> prev;
  double a = 0.0, b = 0.0;
  bool bracketed = false;
  for (std::size_t i = 0; i < us.size(); ++i) {
    if (gs[i] == 0.0 || !std::isfinite(gs[i])) continue;
    if (prev && std::signbit(gs[*prev]) != std::signbit(gs[i])) {
      a = us[*prev];
      b = us[i];
      bracketed = true;
      break;
    }
    prev = i;
  }
  if (!bracketed) return out;

  double ga = gap(a);
  while (b - a > opts.tolerance) {
    const double m = 0.5 * (a + b);
    const double gm = gap(m);
    if (gm == 0.0) {
      a = b = m;
      break;
    }
    if (std::signbit(gm) == std::signbit(ga)) {
      a = m;
      ga = gm;
    } else {
      b = m;
    }
  }
  const double u = 0.5 * (a + b);
  out.found = true;
  out.compute = std::exp(u);
  out.tokens = gap.tokens_at(u);
  out.residual = std::fabs(reducible_at(gap.data_law, out.tokens) -
                           reducible_at(gap.compute_law, out.compute));
  return out;
}

Intersection intersect_for_beta(const ScalingLaw& data_law, const PurePowerLaw& nopt, double beta,
                                const ScalingLaw& compute_law, const ConsistencyOptions& opts) {
  if (!(beta > 0.0 && beta < 1.0)) return {};
  PurePowerLaw perturbed = nopt;
  perturbed.exponent = beta;
  const GapFunction gap{data_law, compute_law, tokens_compute_law(perturbed, opts.flops_per_pf_day)};
  return intersect(gap, opts);
}

}  // namespace

ConsistencyReport consistency_check(const ScalingLaw& data_law, const PurePowerLaw& nopt,
                                    const ScalingLaw& compute_law, double perturb,
                                    const ConsistencyOptions& opts) {
  data_law.validate();
  compute_law.validate();
  if (data_law.variable != Variable::DatasetSize)
    fail(ErrorKind::Domain, "data law must be a function of dataset size");
  if (compute_law.variable != Variable::Compute)
    fail(ErrorKind::Domain, "compute law must be a function of compute");
  if (data_law.unit != compute_law.unit ||
      data_law.tokens_per_example != compute_law.tokens_per_example)
    fail(ErrorKind::Domain, "data and compute laws must share a loss unit");
  const double beta = nopt.exponent;
  if (!(beta > 0.0 && beta < 1.0)) fail(ErrorKind::Domain, "N_opt exponent must lie in (0, 1)");
  if (!(perturb >= 0.0 && perturb < 1.0)) fail(ErrorKind::Domain, "perturb must lie in [0, 1)");
  if (!(opts.bracket_low > 0.0 && opts.bracket_high > opts.bracket_low && opts.tolerance > 0.0))
    fail(ErrorKind::Domain, "invalid intersection bracket or tolerance");

  ConsistencyReport r;
  r.perturb = perturb;
  r.settings = opts;
  r.point = intersect_for_beta(data_law, nopt, beta, compute_law, opts);
  r.low = intersect_for_beta(data_law, nopt, beta * (1.0 - perturb), compute_law, opts);
  r.high = intersect_for_beta(data_law, nopt, beta * (1.0 + perturb), compute_law, opts);

  std::vector<double> band;
  if (r.low.found) band.push_back(r.low.compute);
  if (r.high.found) band.push_back(r.high.compute);
  if (!band.empty()) {
    r.band_low = *std::min_element(band.begin(), band.end());
    r.band_high = *std::max_element(band.begin(), band.end());
  }
  if (r.point.found && r.low.found && r.high.found) {
    r.bracketing = r.band_low <= r.point.compute && r.point.compute <= r.band_high;
    const double lo = r.low.compute, mid = r.point.compute, hi = r.high.compute;
    r.monotone = (lo <= mid && mid <= hi) || (lo >= mid && mid >= hi);
  }
  return r;
}

double nearest_rank_percentile(std::vector<double> values, double pct) {
  if (values.empty()) fail(ErrorKind::InsufficientData, "percentile of an empty sample");
  if (!(pct > 0.0 && pct <= 100.0)) fail(ErrorKind::Domain, "percentile must lie in (0, 100]");
  std::sort(values.begin(), values.end());
  const auto rank = static_cast<std::size_t>(std::ceil(pct / 100.0 * static_cast<double>(values.size())));
  return values[std::clamp<std::size_t>(rank, 1, values.size()) - 1];
}

std::vector<PercentileTrend> percentile_trends(const LossMatrix& matrix,
                                               std::span<const double> percentiles,
                                               const FitOptions& opts) {
  if (matrix.losses.size() != matrix.n_params.size())
    fail(ErrorKind::Domain, "loss matrix needs one row per model size");
  if (matrix.losses.size() < 4) fail(ErrorKind::InsufficientData, "need at least 4 model sizes");
  const std::size_t width = matrix.losses.front().size();
  for (const auto& row : matrix.losses)
    if (row.size() != width) fail(ErrorKind::Domain, "ragged loss matrix");
  if (width < 100) fail(ErrorKind::InsufficientData, "need at least 100 examples per model");
  for (double p : percentiles)
    if (!(p > 0.0 && p < 100.0)) fail(ErrorKind::Domain, "percentiles must lie in (0, 100)");

  std::vector<PercentileTrend> out(percentiles.size());
  FitOptions inner = opts;
  inner.threads = 1;
  detail::parallel_for(percentiles.size(), opts.threads, [&](std::size_t k) {
    PercentileTrend t;
    t.percentile = percentiles[k];
    for (std::size_t i = 0; i < matrix.losses.size(); ++i)
      t.points.push_back({matrix.n_params[i], nearest_rank_percentile(matrix.losses[i], t.percentile)});
    t.fit = fit_power_plus_const(t.points, inner, Variable::ModelSize);
    t.fit.selection_policy = "nearest-rank percentile across examples";
    out[k] = std::move(t);
  });
  return out;
}

std::string_view to_string(ScanStatus s) noexcept {
  switch (s) {
    case ScanStatus::Interior: return "interior";
    case ScanStatus::ClampedToRange: return "clamped-to-range";
    case ScanStatus::NoInteriorMinimum: return "no-interior-minimum";
  }
  return "unknown";
}

ScanOptimum scan_optimum(std::span<const DataPoint> points) {
  if (points.size() < 3) fail(ErrorKind::InsufficientData, "scan needs at least 3 points");
  std::vector<DataPoint> pts(points.begin(), points.end());
  for (const auto& p : pts)
    if (!(p.x > 0.0 && std::isfinite(p.x) && std::isfinite(p.y)))
      fail(ErrorKind::Domain, "scan ratios must be positive and losses finite");
  std::sort(pts.begin(), pts.end(), [](const DataPoint& a, const DataPoint& b) { return a.x < b.x; });
  for (std::size_t i = 1; i < pts.size(); ++i)
    if (pts[i].x == pts[i - 1].x) fail(ErrorKind::InsufficientData, "scan ratios must be distinct");

  std::vector<std::size_t> idx(pts.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return pts[a].y < pts[b].y; });
  const std::size_t best = idx[0];

  // Lagrange quadratic through the three lowest points in u = ln ratio.
  std::array<double, 3> u{}, y{};
  for (int k = 0; k < 3; ++k) {
    u[static_cast<std::size_t>(k)] = std::log(pts[idx[static_cast<std::size_t>(k)]].x);
    y[static_cast<std::size_t>(k)] = pts[idx[static_cast<std::size_t>(k)]].y;
  }
  const double d01 = (y[1] - y[0]) / (u[1] - u[0]);
  const double d12 = (y[2] - y[1]) / (u[2] - u[1]);
  const double a = (d12 - d01) / (u[2] - u[0]);
  const double b = d01 - a * (u[0] + u[1]);
  const double c = y[0] - a * u[0] * u[0] - b * u[0];

  ScanOptimum out;
  out.curvature = 2.0 * a;
  if (!(a > 0.0)) {
    out.status = ScanStatus::NoInteriorMinimum;
    out.ratio = pts[best].x;
    out.loss = pts[best].y;
    return out;
  }
  const double u_lo = std::log(pts.front().x);
  const double u_hi = std::log(pts.back().x);
  double u_star = -b / (2.0 * a);
  out.status = ScanStatus::Interior;
  out.ratio = std::exp(u_star);
  if (u_star <= u_lo || u_star >= u_hi) {
    out.status = ScanStatus::ClampedToRange;
    u_star = std::clamp(u_star, u_lo, u_hi);
    out.ratio = u_star == u_lo ? pts.front().x : pts.back().x;
  }
  out.loss = a * u_star * u_star + b * u_star + c;
  return out;
}

TransferGap transfer_gap(const ScalingLaw& transfer_law, std::optional<double> entropy) {
  transfer_law.validate();
  TransferGap g;
  g.asymptotic_loss = transfer_law.irreducible;
  if (!entropy) return g;
  if (!std::isfinite(*entropy)) fail(ErrorKind::Domain, "entropy must be finite");
  g.entropy = entropy;
  g.entropy_unknown = false;
  g.kl_estimate = g.asymptotic_loss - *entropy;
  g.negative_kl = *g.kl_estimate < 0.0;
  return g;
}

}  // namespace scalefit
