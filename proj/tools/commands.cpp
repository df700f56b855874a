#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "cli.hpp"
#include "scalefit/analysis.hpp"
#include "scalefit/catalog.hpp"
#include "scalefit/error.hpp"
#include "scalefit/frontier.hpp"
#include "scalefit/infotheory.hpp"
#include "scalefit/runlog.hpp"
#include "scalefit/synth.hpp"
#include "scalefit/tables.hpp"

namespace scalefit::cli {

namespace {

std::string g(double v, int prec = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, v);
  return buf;
}

std::string symbol(Variable v) {
  switch (v) {
    case Variable::ModelSize: return "N";
    case Variable::Compute: return "C";
    case Variable::DatasetSize: return "D";
    case Variable::ContextPosition: return "t";
  }
  return "x";
}

std::string law_text(const ScalingLaw& law) {
  const std::string x = symbol(law.variable);
  return "L(" + x + ") = " + g(law.irreducible) + " + (" + g(law.scale) + " / " + x + ")^" +
         g(law.exponent) + "  [" + std::string(to_string(law.unit)) + "]";
}

std::string power_text(const PurePowerLaw& p) {
  return symbol(p.output) + "(" + symbol(p.input) + ") = " + g(p.coefficient) + " " + symbol(p.input) +
         "^" + g(p.exponent);
}

std::string input_name(const std::string& path) { return path == "-" ? "<stdin>" : path; }

std::vector<RunRecord> load_runs(Report& r, const std::string& path) {
  const std::string content = read_input(path);
  r.add_input(input_name(path), content);
  std::istringstream is(content);
  return read_run_log(is, input_name(path));
}

Json load_json(Report& r, const std::string& path) {
  const std::string content = read_input(path);
  r.add_input(input_name(path), content);
  try {
    return Json::parse(content);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Parse, input_name(path) + ": " + e.what());
  }
}

ScalingLaw load_law(Report& r, const LawArgs& a) {
  if (!a.law_file.empty()) {
    if (a.irreducible || a.scale || a.exponent)
      fail(ErrorKind::Parse, "give either --law or --irreducible/--scale/--exponent, not both");
    return law_from_json(load_json(r, a.law_file));
  }
  if (!a.irreducible || !a.scale || !a.exponent)
    fail(ErrorKind::Parse, "a law needs --law FILE or all of --irreducible, --scale, --exponent");
  return ScalingLaw::make(*a.irreducible, *a.scale, *a.exponent, parse_variable(a.variable));
}

void add_fit_lines(Report& r, const FitReport& fit) {
  if (fit.is_law()) {
    r.add_line(law_text(fit.law()));
    static const char* names[] = {"irreducible", "scale", "exponent"};
    const auto values = fit.parameters();
    for (std::size_t i = 0; i < values.size(); ++i) {
      std::string line = std::string("  ") + names[i] + " " + g(values[i], 6);
      if (i < fit.ci.size()) line += "  CI [" + g(fit.ci[i].low, 6) + ", " + g(fit.ci[i].high, 6) + "]";
      r.add_line(line);
    }
  } else {
    r.add_line(power_text(fit.power()));
  }
  r.add_line("converged " + std::string(fit.converged ? "yes" : "no") + ", rms log residual " +
             g(fit.residual_rms, 3) + ", " + std::to_string(fit.n_points) + " points");
}

Json residual_table(const ScalingLaw& law, std::span<const DataPoint> pts) {
  const auto res = log_residuals(law, pts);
  Json a = Json::array();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    Json e;
    e["x"] = pts[i].x;
    e["loss"] = pts[i].y;
    e["predicted"] = eval_law(law, pts[i].x);
    e["log_residual"] = res[i];
    a.push_back(std::move(e));
  }
  return a;
}

std::pair<double, double> x_range(std::span<const DataPoint> pts) {
  double lo = HUGE_VAL, hi = -HUGE_VAL;
  for (const auto& p : pts) {
    lo = std::min(lo, p.x);
    hi = std::max(hi, p.x);
  }
  return {lo, hi};
}

/// Observed points plus the fitted curve, and the reducible-only view.
void add_law_plots(Output& out, const std::string& what, std::span<const DataPoint> pts,
                   const ScalingLaw& law, const std::string& x_label) {
  const auto [lo, hi] = x_range(pts);
  Plot loss{what, x_label, "loss (nats)", {}};
  loss.series.push_back({"observed", {pts.begin(), pts.end()}, false});
  loss.series.push_back({"fit", sample_law(law, lo, hi), true});
  out.plots.emplace_back("loss", std::move(loss));

  Plot red{what + " (reducible part)", x_label, "loss - irreducible (nats)", {}};
  std::vector<DataPoint> obs;
  for (const auto& p : pts)
    if (p.y > law.irreducible) obs.push_back({p.x, p.y - law.irreducible});
  std::vector<DataPoint> curve = sample_law(law, lo, hi);
  for (auto& p : curve) p.y -= law.irreducible;
  red.series.push_back({"observed", std::move(obs), false});
  red.series.push_back({"fit", std::move(curve), true});
  out.plots.emplace_back("reducible", std::move(red));
}

std::string frontier_table(const Frontier& f) {
  std::set<std::pair<double, std::string>> on_hull;
  for (const auto& p : f.hull) on_hull.insert({p.compute, p.run_id});
  std::ostringstream os;
  os << "run_id,n_params,compute,loss,on_hull\n";
  for (const auto& p : f.pareto)
    os << p.run_id << "," << p.n_params << "," << format_number(p.compute) << "," << format_number(p.loss)
       << "," << (on_hull.count({p.compute, p.run_id}) ? 1 : 0) << "\n";
  return os.str();
}

Json frontier_settings(const FrontierOptions& fo) {
  Json s;
  s["split"] = to_string(fo.split);
  s["smoothing_window"] = fo.smoothing_window;
  s["flops_per_pf_day"] = fo.flops_per_pf_day;
  s["compute_definition"] = "C = 6 N E / flops_per_pf_day";
  s["hull"] = "lower convex hull of the running-minimum frontier in (ln C, ln L)";
  return s;
}

std::vector<DataPoint> per_run_points(const std::vector<RunRecord>& runs, Variable var, Split split,
                                      const std::string& policy) {
  if (policy != "final" && policy != "min") fail(ErrorKind::Parse, "--policy must be 'final' or 'min'");
  std::vector<DataPoint> pts;
  for (const auto& run : runs) {
    std::optional<DataPoint> chosen;
    for (const auto& p : run.series) {
      const auto loss = RunRecord::loss(p, split);
      if (!loss) continue;
      const double x = var == Variable::ModelSize ? static_cast<double>(run.n_params) : p.tokens;
      if (policy == "final" || !chosen || *loss < chosen->y) chosen = DataPoint{x, *loss};
    }
    if (chosen) pts.push_back(*chosen);
  }
  return pts;
}

}  // namespace

// ingest-check ---------------------------------------------------------------

int run_ingest_check(const IngestArgs& a, const Common& c) {
  Output out{Report("ingest-check")};
  Report& r = out.report;
  const auto runs = load_runs(r, a.runs);
  r.parameters()["runs"] = input_name(a.runs);
  Json list = Json::array();
  std::size_t points = 0;
  for (const auto& run : runs) {
    Json e;
    e["run_id"] = run.run_id;
    e["n_params"] = run.n_params;
    e["points"] = run.series.size();
    e["splits"] = run.has_train_split() ? Json::array({"test", "train"}) : Json::array({"test"});
    if (!run.series.empty()) {
      e["final_tokens"] = run.series.back().tokens;
      e["final_test_loss"] = run.series.back().test_loss;
    }
    list.push_back(std::move(e));
    points += run.series.size();
    r.add_line(run.run_id + ": N=" + std::to_string(run.n_params) + ", " + std::to_string(run.series.size()) +
               " points" + (run.has_train_split() ? "" : ", test split only"));
  }
  r.results()["run_count"] = runs.size();
  r.results()["point_count"] = points;
  r.results()["runs"] = std::move(list);
  r.provenance()["runs"] = "supplied";
  r.add_line(std::to_string(runs.size()) + " runs, " + std::to_string(points) + " points, all valid");
  return emit(out, c);
}

// fit -----------------------------------------------------------------------

int run_fit(const FitArgs& a, const Common& c) {
  const FitOptions opts = resolve_fit_options(c);
  Output out{Report("fit")};
  Report& r = out.report;
  const Variable var = parse_variable(a.variable);
  const Split split = parse_split(a.split);
  if (a.runs.empty() == a.points.empty()) fail(ErrorKind::Parse, "fit: give exactly one of --runs or --points");

  std::vector<DataPoint> pts;
  std::optional<Frontier> frontier;
  std::string policy;
  FrontierOptions fo;
  fo.split = split;
  fo.smoothing_window = a.smoothing;
  if (!a.points.empty()) {
    const std::string content = read_input(a.points);
    r.add_input(input_name(a.points), content);
    std::istringstream is(content);
    static constexpr std::string_view kCols[] = {"x", "loss"};
    pts = read_xy_table(is, kCols, input_name(a.points));
    policy = "points as supplied";
  } else {
    const auto runs = load_runs(r, a.runs);
    if (var == Variable::Compute) {
      frontier = hull_points(build_pareto(runs, fo));
      pts = as_points(frontier->hull);
      policy = "compute-efficient frontier hull, " + std::string(to_string(split)) + " split";
    } else if (var == Variable::ModelSize || var == Variable::DatasetSize) {
      pts = per_run_points(runs, var, split, a.policy);
      policy = "one point per run: " + std::string(a.policy == "final" ? "loss at the final logged step" : "minimum loss") +
               ", " + std::string(to_string(split)) + " split";
    } else {
      fail(ErrorKind::Parse, "position fits take --points");
    }
  }

  r.parameters()["runs"] = a.runs.empty() ? Json(nullptr) : Json(input_name(a.runs));
  r.parameters()["points"] = a.points.empty() ? Json(nullptr) : Json(input_name(a.points));
  r.parameters()["variable"] = to_string(var);
  r.parameters()["split"] = to_string(split);
  r.parameters()["policy"] = a.policy;
  r.parameters()["below_frontier"] = a.below_frontier;
  r.parameters()["bootstrap"] = !a.no_bootstrap;
  r.settings()["fit"] = to_json(opts);
  r.settings()["objective"] = "least squares on ln(loss)";
  if (frontier) r.settings()["frontier"] = frontier_settings(fo);

  const FitKind kind = a.below_frontier ? FitKind::BelowFrontier : FitKind::PowerPlusConstant;
  FitReport fit = kind == FitKind::BelowFrontier ? fit_below_frontier(pts, opts, var)
                                                 : fit_power_plus_const(pts, opts, var);
  if (!a.no_bootstrap) {
    try {
      fit = bootstrap_ci(pts, kind, opts, var);
    } catch (const Error& e) {
      r.add_warning(std::string("bootstrap skipped: ") + e.what());
    }
  }
  fit.selection_policy = policy;

  r.results()["fit"] = to_json(fit);
  r.results()["residuals"] = residual_table(fit.law(), pts);
  r.provenance()["fit"] = "fitted";
  r.add_line(std::string(to_string(kind)) + " fit, " + policy);
  add_fit_lines(r, fit);
  if (fit.converged) {
    const auto d = decompose(fit);
    r.results()["decomposition"] = to_json(d);
    r.add_line("entropy estimate " + g(d.entropy_estimate, 6) + " nats");
    for (const auto& cav : d.caveats) r.add_warning(cav);
  }

  if (frontier) {
    r.results()["frontier"] = to_json(*frontier);
    out.files.emplace_back("fit-frontier.csv", frontier_table(*frontier));
    try {
      const FitReport nopt = fit_nopt(*frontier);
      r.results()["nopt"] = to_json(nopt);
      r.provenance()["nopt"] = "fitted";
      r.add_line(power_text(nopt.power()) + ", beta " + g(nopt.power().exponent, 4));
    } catch (const Error& e) {
      r.add_warning(std::string("N_opt fit skipped: ") + e.what());
    }
  }

  const std::string x_label = var == Variable::Compute ? "compute (PF-days)" : symbol(var);
  add_law_plots(out, "loss vs " + std::string(to_string(var)), pts, fit.law(), x_label);
  if (!fit.converged) {
    r.add_warning("fit did not converge");
    r.set_exit_code(kAnalysisFailure);
  }
  return emit(out, c);
}

// frontier ------------------------------------------------------------------

int run_frontier(const FrontierArgs& a, const Common& c) {
  Output out{Report("frontier")};
  Report& r = out.report;
  FrontierOptions fo;
  fo.split = parse_split(a.split);
  fo.smoothing_window = a.smoothing;
  const auto runs = load_runs(r, a.runs);
  const Frontier f = hull_points(build_pareto(runs, fo));
  r.parameters()["runs"] = input_name(a.runs);
  r.settings()["frontier"] = frontier_settings(fo);
  r.results()["frontier"] = to_json(f);
  r.results()["log_convex"] = is_log_convex(f.hull);
  r.provenance()["frontier"] = "derived";
  r.add_line(std::to_string(f.pareto.size()) + " frontier points, " + std::to_string(f.hull.size()) + " on the hull");
  if (!f.hull.empty())
    r.add_line("hull spans C = " + g(f.hull.front().compute) + " .. " + g(f.hull.back().compute) + " PF-days");
  out.files.emplace_back("frontier.csv", frontier_table(f));
  Plot p{"compute-efficient frontier", "compute (PF-days)", "loss (nats)", {}};
  p.series.push_back({"pareto", as_points(f.pareto), false});
  p.series.push_back({"hull", as_points(f.hull), false});
  out.plots.emplace_back("frontier", std::move(p));
  return emit(out, c);
}

// nopt ----------------------------------------------------------------------

int run_nopt(const NoptArgs& a, const Common& c) {
  Output out{Report("nopt")};
  Report& r = out.report;
  FitReport fit;
  std::optional<Frontier> frontier;
  if (!a.runs.empty()) {
    if (a.coefficient || a.exponent) fail(ErrorKind::Parse, "give either --runs or --coefficient/--exponent");
    FrontierOptions fo;
    fo.split = parse_split(a.split);
    frontier = hull_points(build_pareto(load_runs(r, a.runs), fo));
    fit = fit_nopt(*frontier, NoptOptions{!a.keep_edge_models});
    r.parameters()["runs"] = input_name(a.runs);
    r.settings()["frontier"] = frontier_settings(fo);
    r.settings()["exclude_edge_models"] = !a.keep_edge_models;
    r.provenance()["nopt"] = "fitted";
  } else {
    if (!a.coefficient || !a.exponent) fail(ErrorKind::Parse, "nopt needs --runs or both --coefficient and --exponent");
    fit = FitReport::from_power(PurePowerLaw{*a.coefficient, *a.exponent, Variable::Compute, Variable::ModelSize});
    r.parameters()["coefficient"] = *a.coefficient;
    r.parameters()["exponent"] = *a.exponent;
    r.provenance()["nopt"] = "supplied";
  }
  r.settings()["flops_per_pf_day"] = kFlopsPerPfDay;
  const PurePowerLaw& law = fit.power();
  const double beta = law.exponent;
  r.results()["nopt"] = to_json(fit);
  r.results()["beta"] = beta;
  r.add_line(power_text(law) + "  (C in PF-days)");
  r.add_line("beta " + g(beta, 4));
  if (beta > 0.0 && beta < 1.0) {
    const double de = data_scaling_exponent(beta);
    r.results()["data_exponent"] = de;
    r.add_line("D ~ N^" + g(de, 4) + (de < 1.0 ? " (sub-linear)" : ""));
  }
  try {
    const PurePowerLaw cd = tokens_compute_law(law);
    r.results()["tokens_compute_law"] = to_json(cd);
    r.provenance()["tokens_compute_law"] = "derived";
    r.add_line("C(D) = " + g(cd.coefficient) + " D^" + g(cd.exponent, 4) + "  (PF-days, D in tokens)");
  } catch (const Error& e) {
    r.add_warning(std::string("C(D) not available: ") + e.what());
  }

  if (frontier) {
    std::vector<DataPoint> cn;
    for (const auto& p : frontier->hull) cn.push_back({p.compute, static_cast<double>(p.n_params)});
    const auto [lo, hi] = x_range(cn);
    Plot p{"compute-optimal model size", "compute (PF-days)", "parameters", {}};
    p.series.push_back({"hull", cn, false});
    p.series.push_back({"fit", sample_power(law, lo, hi), true});
    out.plots.emplace_back("nopt", std::move(p));
  }
  if (!fit.converged) r.set_exit_code(kAnalysisFailure);
  return emit(out, c);
}

// forecast ------------------------------------------------------------------

int run_forecast(const ForecastArgs& a, const Common& c) {
  Output out{Report("forecast")};
  Report& r = out.report;
  const ScalingLaw law = load_law(r, a.law);
  if (a.targets.empty() && a.at.empty()) fail(ErrorKind::Parse, "forecast needs --target or --at");
  r.parameters()["law"] = to_json(law);
  r.parameters()["targets"] = a.targets;
  r.parameters()["at"] = a.at;
  r.provenance()["law"] = a.law.law_file.empty() ? "supplied" : "loaded";
  r.add_line(law_text(law));

  std::vector<double> xs;
  Json targets = Json::array();
  for (const double t : a.targets) {
    const double x = forecast_x_for_reducible(law, t);
    Json e;
    e["reducible"] = t;
    e["x"] = x;
    e["loss"] = eval_law(law, x);
    targets.push_back(std::move(e));
    xs.push_back(x);
    r.add_line("reducible " + g(t) + " nats at " + symbol(law.variable) + " = " + g(x, 6));
  }
  Json at = Json::array();
  for (const double x : a.at) {
    Json e;
    e["x"] = x;
    e["loss"] = eval_law(law, x);
    e["reducible"] = reducible_at(law, x);
    at.push_back(std::move(e));
    xs.push_back(x);
    r.add_line("L(" + g(x) + ") = " + g(eval_law(law, x), 6));
  }
  r.results()["targets"] = std::move(targets);
  r.results()["at"] = std::move(at);

  const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  Plot p{"forecast", symbol(law.variable), "loss (nats)", {}};
  std::vector<DataPoint> marks;
  for (const double x : xs) marks.push_back({x, eval_law(law, x)});
  p.series.push_back({"fit", sample_law(law, *lo / 10.0, *hi * 10.0), true});
  p.series.push_back({"forecast", std::move(marks), false});
  out.plots.emplace_back("law", std::move(p));
  return emit(out, c);
}

// rescale -------------------------------------------------------------------

int run_rescale(const RescaleArgs& a, const Common& c) {
  Output out{Report("rescale")};
  Report& r = out.report;
  Json rows = Json::array();
  Json discrepancies = Json::array();
  r.settings()["irreducible_relative_tolerance"] = catalog::kIrreducibleRelTol;
  r.settings()["scale_significant_figures"] = catalog::kScaleSignificantFigures;
  r.settings()["scale_rule"] = "consistent when within one unit of the last printed digit";

  if (!a.preset.empty()) {
    if (!a.law.law_file.empty() || a.law.irreducible) fail(ErrorKind::Parse, "give either --preset or a law");
    r.parameters()["preset"] = a.preset;
    std::vector<const catalog::PublishedDomain*> chosen;
    if (a.preset == "all") {
      for (const auto& d : catalog::domains())
        if (d.compute && d.tokens_per_example > 0.0) chosen.push_back(&d);
    } else {
      chosen.push_back(&catalog::find(a.preset));
    }
    for (const auto* d : chosen) {
      if (!d->compute || !(d->tokens_per_example > 0.0))
        fail(ErrorKind::Domain, std::string(d->name) + " has no per-example view");
      const double k = a.tokens_per_example.value_or(d->tokens_per_example);
      Json e;
      e["domain"] = d->name;
      e["per_token_law"] = to_json(*d->compute);
      e["tokens_per_example"] = k;
      r.add_line(std::string(d->name) + ": " + law_text(*d->compute));
      if (d->per_example_irreducible && d->per_example_scale && !a.tokens_per_example) {
        const auto check = catalog::cross_check_per_example(*d);
        e["per_example_law"] = to_json(check.derived);
        e["cross_check"] = to_json(check);
        r.add_line("  per example: " + law_text(check.derived));
        r.add_line("  irreducible " + g(check.irreducible.derived, 6) + " vs printed " +
                   g(check.irreducible.published, 6) + (check.irreducible.consistent ? " ok" : " DISCREPANCY"));
        r.add_line("  scale " + g(check.scale.derived, 4) + " vs printed " + g(check.scale.published, 4) +
                   (check.scale.consistent ? " ok" : " DISCREPANCY"));
        if (check.discrepancy()) discrepancies.push_back(d->name);
      } else {
        const ScalingLaw per = rescale_loss(*d->compute, k);
        e["per_example_law"] = to_json(per);
        r.add_line("  per example: " + law_text(per));
      }
      rows.push_back(std::move(e));
    }
    r.provenance()["per_token_laws"] = "published";
    r.provenance()["per_example_laws"] = "derived";
  } else {
    if (!a.tokens_per_example) fail(ErrorKind::Parse, "rescale needs --preset or a law with --tokens-per-example");
    const ScalingLaw law = load_law(r, a.law);
    const ScalingLaw per = rescale_loss(law, *a.tokens_per_example);
    Json e;
    e["per_token_law"] = to_json(law);
    e["tokens_per_example"] = *a.tokens_per_example;
    e["per_example_law"] = to_json(per);
    rows.push_back(std::move(e));
    r.parameters()["tokens_per_example"] = *a.tokens_per_example;
    r.provenance()["per_token_laws"] = "supplied";
    r.provenance()["per_example_laws"] = "derived";
    r.add_line(law_text(law));
    r.add_line("per example: " + law_text(per));
  }
  r.results()["conversions"] = std::move(rows);
  r.results()["discrepancy"] = !discrepancies.empty();
  r.results()["discrepant_domains"] = discrepancies;
  for (const auto& d : discrepancies)
    r.add_warning("printed per-example summary of " + d.get<std::string>() + " disagrees with its per-token law");
  return emit(out, c);
}

// consistency ---------------------------------------------------------------

int run_consistency(const ConsistencyArgs& a, const Common& c) {
  Output out{Report("consistency")};
  Report& r = out.report;
  if (a.ld.empty() || a.lc.empty() || a.nopt.empty())
    fail(ErrorKind::Parse, "consistency needs --ld, --lc and --nopt");
  const ScalingLaw ld = law_from_json(load_json(r, a.ld));
  const ScalingLaw lc = law_from_json(load_json(r, a.lc));
  const PurePowerLaw nopt = power_from_json(load_json(r, a.nopt));
  ConsistencyOptions opts;
  opts.bracket_low = a.bracket_low;
  opts.bracket_high = a.bracket_high;
  opts.grid_points = a.grid_points;
  opts.tolerance = a.tolerance;
  const ConsistencyReport cr = consistency_check(ld, nopt, lc, a.perturb, opts);

  r.parameters()["ld"] = to_json(ld);
  r.parameters()["lc"] = to_json(lc);
  r.parameters()["nopt"] = to_json(nopt);
  r.parameters()["perturb"] = a.perturb;
  r.settings() = to_json(cr)["settings"];
  r.results()["consistency"] = to_json(cr);
  const PurePowerLaw cd = tokens_compute_law(nopt, opts.flops_per_pf_day);
  r.results()["tokens_compute_law"] = to_json(cd);
  r.provenance()["laws"] = "loaded";
  r.provenance()["intersection"] = "derived";

  r.add_line("L(D): " + law_text(ld));
  r.add_line("L(C): " + law_text(lc));
  r.add_line("N_opt: " + power_text(nopt) + ";  C(D) = " + g(cd.coefficient) + " D^" + g(cd.exponent, 4));
  if (cr.point.found) {
    r.add_line("reducible losses meet at C* = " + g(cr.point.compute, 6) + " PF-days, D* = " + g(cr.point.tokens, 4) +
               " tokens (residual " + g(cr.point.residual, 2) + " nats)");
    if (cr.low.found && cr.high.found)
      r.add_line("beta +-" + g(100 * a.perturb, 3) + "% band: " + g(cr.band_low, 4) + " .. " + g(cr.band_high, 4) +
                 " PF-days" + (cr.monotone ? "" : " (not monotone)") + (cr.bracketing ? "" : " (does not bracket C*)"));
    else
      r.add_warning("no intersection for at least one perturbed beta");
  } else {
    r.add_line("no intersection in [" + g(opts.bracket_low) + ", " + g(opts.bracket_high) + "] PF-days");
    r.set_exit_code(kAnalysisFailure);
  }

  // Reducible curves around the intersection, or over the whole bracket.
  double lo = opts.bracket_low, hi = opts.bracket_high;
  if (cr.point.found) {
    lo = std::max(lo, std::min(cr.point.compute, cr.band_low) / 1e3);
    hi = std::min(hi, std::max(cr.point.compute, cr.band_high) * 1e3);
  }
  Plot p{"reducible loss: data vs compute laws", "compute (PF-days)", "reducible loss (nats)", {}};
  std::vector<DataPoint> c_curve, d_curve;
  for (const double x : log_spaced(lo, hi, 200)) {
    c_curve.push_back({x, reducible_at(lc, x)});
    d_curve.push_back({x, reducible_at(ld, std::pow(x / cd.coefficient, 1.0 / cd.exponent))});
  }
  p.series.push_back({"fit-compute", std::move(c_curve), true});
  p.series.push_back({"fit-data", std::move(d_curve), true});
  if (cr.point.found) p.series.push_back({"intersection", {{cr.point.compute, reducible_at(lc, cr.point.compute)}}, false});
  out.plots.emplace_back("reducible", std::move(p));
  return emit(out, c);
}

// percentiles ---------------------------------------------------------------

int run_percentiles(const PercentileArgs& a, const Common& c) {
  const FitOptions opts = resolve_fit_options(c);
  Output out{Report("percentiles")};
  Report& r = out.report;
  const std::string content = read_input(a.matrix);
  r.add_input(input_name(a.matrix), content);
  std::istringstream is(content);
  const LossMatrix m = read_loss_matrix(is, input_name(a.matrix));
  const std::vector<double> pcts = a.percentiles.empty() ? kDefaultPercentiles : a.percentiles;
  const auto trends = percentile_trends(m, pcts, opts);

  r.parameters()["matrix"] = input_name(a.matrix);
  r.parameters()["percentiles"] = pcts;
  r.settings()["fit"] = to_json(opts);
  r.settings()["percentile_definition"] = "nearest rank";
  Json list = Json::array();
  Plot p{"per-example loss percentiles", "parameters", "loss (nats)", {}};
  bool all_converged = true;
  for (const auto& t : trends) {
    Json e;
    e["percentile"] = t.percentile;
    Json pts = Json::array();
    for (const auto& q : t.points) pts.push_back(Json::array({q.x, q.y}));
    e["points"] = std::move(pts);
    e["fit"] = to_json(t.fit);
    list.push_back(std::move(e));
    all_converged = all_converged && t.fit.converged;
    r.add_line("p" + g(t.percentile, 3) + ": " + law_text(t.fit.law()) + (t.fit.converged ? "" : " (not converged)"));
    const auto [lo, hi] = x_range(t.points);
    p.series.push_back({"p" + g(t.percentile, 3), t.points, false});
    p.series.push_back({"fit-p" + g(t.percentile, 3), sample_law(t.fit.law(), lo, hi), true});
  }
  r.results()["trends"] = std::move(list);
  r.provenance()["trends"] = "fitted";
  out.plots.emplace_back("trends", std::move(p));
  if (!all_converged) r.set_exit_code(kAnalysisFailure);
  return emit(out, c);
}

// mi ------------------------------------------------------------------------

int run_mi(const MIArgs& a, const Common& c) {
  Output out{Report("mi")};
  Report& r = out.report;
  if (a.trend != "mi" && a.trend != "infogain") fail(ErrorKind::Parse, "--trend must be 'mi' or 'infogain'");
  if (a.pairs.empty() && a.points.empty()) fail(ErrorKind::Parse, "mi needs --pairs or --point");
  r.parameters()["pairs"] = a.pairs.empty() ? Json(nullptr) : Json(input_name(a.pairs));
  r.parameters()["points"] = a.points;
  r.parameters()["trend"] = a.trend;
  r.parameters()["target"] = a.target ? Json(*a.target) : Json(nullptr);
  r.parameters()["nats_per_word"] = a.nats_per_word ? Json(*a.nats_per_word) : Json(nullptr);
  r.settings()["log_base"] = "natural";

  std::vector<DataPoint> trend;
  Json rows = Json::array();
  if (!a.pairs.empty()) {
    const std::string content = read_input(a.pairs);
    r.add_input(input_name(a.pairs), content);
    std::istringstream is(content);
    for (const auto& row : read_paired_losses(is, input_name(a.pairs))) {
      const MIEstimate mi = mutual_info(row.loss_unconditioned, row.loss_conditioned);
      const MIEstimate ig = infogain(mi.mi, row.loss_text);
      Json e;
      e["n_params"] = row.n_params;
      e["estimate"] = to_json(ig);
      if (a.nats_per_word) e["words_equivalent"] = words_equivalent(mi.mi, *a.nats_per_word);
      rows.push_back(std::move(e));
      r.add_line("N=" + g(row.n_params) + ": MI " + g(mi.mi, 5) + " nats, infogain " + g(*ig.infogain, 4) +
                 (mi.negative ? " (negative MI)" : "") + (ig.over_unity ? " (infogain > 1)" : ""));
      trend.push_back({row.n_params, a.trend == "mi" ? mi.mi : *ig.infogain});
    }
  }
  for (const auto& s : a.points) {
    const auto colon = s.find(':');
    double n = 0, v = 0;
    try {
      if (colon == std::string::npos) throw std::invalid_argument(s);
      n = std::stod(s.substr(0, colon));
      v = std::stod(s.substr(colon + 1));
    } catch (const std::exception&) {
      fail(ErrorKind::Parse, "--point expects N:value, got '" + s + "'");
    }
    trend.push_back({n, v});
  }
  r.results()["rows"] = std::move(rows);
  r.provenance()["estimates"] = "derived";

  std::set<double> distinct;
  for (const auto& p : trend) distinct.insert(p.x);
  if (distinct.size() >= 2) {
    const LogMIFit fit = fit_log_mi(trend);
    r.results()["trend_fit"] = to_json(fit);
    r.provenance()["trend_fit"] = "fitted";
    r.add_line(a.trend + " = " + g(fit.lambda, 5) + " ln(N / " + g(fit.n_c, 5) + ")" +
               (fit.increasing ? "" : " (non-increasing)"));
    if (!fit.increasing) r.add_warning("trend is not increasing in N");
    if (a.target) {
      const double n = invert_log_mi(fit, *a.target);
      r.results()["target_n_params"] = n;
      r.add_line(a.trend + " " + g(*a.target) + " reached at N = " + g(n, 5));
    }
    const auto [lo, hi] = x_range(trend);
    Plot p{a.trend + " vs model size", "parameters", a.trend, {}};
    p.series.push_back({"observed", trend, false});
    std::vector<DataPoint> curve;
    for (const double x : log_spaced(lo, hi, 200)) curve.push_back({x, fit(x)});
    p.series.push_back({"fit", std::move(curve), true});
    out.plots.emplace_back("trend", std::move(p));
  } else if (a.target) {
    fail(ErrorKind::InsufficientData, "--target needs at least two distinct model sizes");
  }
  return emit(out, c);
}

// context -------------------------------------------------------------------

int run_context(const ContextArgs& a, const Common& c) {
  const FitOptions opts = resolve_fit_options(c);
  Output out{Report("context")};
  Report& r = out.report;
  ContextModel model;
  std::vector<DataPoint> profile;
  if (!a.profile.empty()) {
    const std::string content = read_input(a.profile);
    r.add_input(input_name(a.profile), content);
    std::istringstream is(content);
    static constexpr std::string_view kCols[] = {"position", "loss"};
    profile = read_xy_table(is, kCols, input_name(a.profile));
    model = fit_context_profile(profile, opts);
    r.provenance()["model"] = "fitted";
    r.settings()["fit"] = to_json(opts);
  } else {
    if (!a.l_model || !a.l_unigram || !a.p || !a.horizon)
      fail(ErrorKind::Parse, "context needs --profile or all of --l-model, --l-unigram, --p, --horizon");
    r.provenance()["model"] = "supplied";
  }
  if (a.l_model) model.l_model = *a.l_model;
  if (a.l_unigram) model.l_unigram = *a.l_unigram;
  if (a.p) model.p = *a.p;
  if (a.horizon) model.horizon = *a.horizon;
  model.validate();

  r.parameters()["profile"] = a.profile.empty() ? Json(nullptr) : Json(input_name(a.profile));
  r.parameters()["model"] = to_json(model);
  const double mi = context_mi(model);
  const double ig = context_infogain(model);
  const double limit = context_infogain_limit(model.horizon, model.p);
  r.results()["model"] = to_json(model);
  r.results()["mi"] = mi;
  r.results()["infogain"] = ig;
  r.results()["infogain_limit"] = limit;
  r.results()["harmonic_T"] = gen_harmonic(model.horizon, model.p);
  r.results()["harmonic_2T"] = gen_harmonic(2 * model.horizon, model.p);
  r.add_line("L(t) = " + g(model.l_model, 6) + " + (" + g(model.l_unigram, 6) + " - " + g(model.l_model, 6) +
             ") / t^" + g(model.p, 4) + ", T = " + std::to_string(model.horizon));
  r.add_line("MI between halves " + g(mi, 6) + " nats, infogain " + g(ig, 5) + " (bound as L -> 0: " + g(limit, 5) + ")");

  Plot p{"loss by context position", "position", "loss (nats)", {}};
  if (!profile.empty()) p.series.push_back({"observed", profile, false});
  std::vector<DataPoint> curve;
  for (const double t : log_spaced(1.0, static_cast<double>(std::max<std::int64_t>(model.horizon, 2)), 200))
    curve.push_back({t, context_loss(t, model)});
  p.series.push_back({"fit", std::move(curve), true});
  out.plots.emplace_back("profile", std::move(p));
  return emit(out, c);
}

// scan-opt ------------------------------------------------------------------

int run_scan_opt(const ScanArgs& a, const Common& c) {
  Output out{Report("scan-opt")};
  Report& r = out.report;
  const std::string content = read_input(a.scan);
  r.add_input(input_name(a.scan), content);
  std::istringstream is(content);
  static constexpr std::string_view kCols[] = {"aspect_ratio", "loss"};
  const auto pts = read_xy_table(is, kCols, input_name(a.scan));
  const ScanOptimum s = scan_optimum(pts);
  r.parameters()["scan"] = input_name(a.scan);
  r.settings()["method"] = "quadratic in ln(ratio) through the three lowest-loss points, clamped to the scanned range";
  r.results()["optimum"] = to_json(s);
  r.provenance()["optimum"] = "derived";
  r.add_line("optimum ratio " + g(s.ratio, 5) + ", loss " + g(s.loss, 6) + ", curvature " + g(s.curvature, 4) +
             " (" + std::string(to_string(s.status)) + ")");
  Plot p{"hyperparameter scan", "aspect ratio", "loss (nats)", {}};
  p.series.push_back({"observed", pts, false});
  p.series.push_back({"optimum", {{s.ratio, s.loss}}, false});
  out.plots.emplace_back("scan", std::move(p));
  return emit(out, c);
}

// synth ---------------------------------------------------------------------

int run_synth(const SynthArgs& a, const Common& c) {
  const FitOptions opts = resolve_fit_options(c);
  Output out{Report("synth")};
  Report& r = out.report;
  SynthPreset ps;
  if (!a.preset.empty()) {
    ps = preset(a.preset);
  } else {
    ps.name = "custom";
    ps.family = SynthFamily{1.5, 1e3, 0.3, 1e6, 0.7};
    ps.model_sizes = log_spaced(1e5, 1e9, 20);
    ps.tokens_grid = log_spaced(1e6, 1e13, 200);
  }
  SynthFamily& f = ps.family;
  if (a.l_inf) f.l_inf = *a.l_inf;
  if (a.n_scale) f.n_scale = *a.n_scale;
  if (a.alpha_n) f.alpha_n = *a.alpha_n;
  if (a.e_scale) f.e_scale = *a.e_scale;
  if (a.alpha_e) f.alpha_e = *a.alpha_e;
  f.noise_sigma = a.noise;
  f.seed = opts.seed;
  f.validate();

  const auto runs = gen_curves(f, ps.model_sizes, ps.tokens_grid);
  std::ostringstream os;
  write_run_log(os, runs);
  const std::string jsonl = os.str();
  if (a.output == "-") {
    std::cout << jsonl << std::flush;
  } else {
    write_text_file(a.output, jsonl);
  }

  Json fam;
  fam["l_inf"] = f.l_inf;
  fam["n_scale"] = f.n_scale;
  fam["alpha_n"] = f.alpha_n;
  fam["e_scale"] = f.e_scale;
  fam["alpha_e"] = f.alpha_e;
  fam["noise_sigma"] = f.noise_sigma;
  fam["seed"] = f.seed;
  r.parameters()["preset"] = std::string(ps.name);
  r.parameters()["family"] = std::move(fam);
  r.parameters()["model_sizes"] = ps.model_sizes.size();
  r.parameters()["tokens_grid"] = ps.tokens_grid.size();
  r.results()["runs"] = runs.size();
  r.results()["analytic_beta"] = analytic_beta(f.alpha_n, f.alpha_e);
  r.results()["output_sha256"] = sha256_hex(jsonl);
  r.provenance()["runs"] = "synthetic";
  r.add_line("generated " + std::to_string(runs.size()) + " runs (" + std::string(ps.name) + "), analytic beta " +
             g(analytic_beta(f.alpha_n, f.alpha_e), 4));
  out.summary_to_stderr = a.output == "-";
  return emit(out, c);
}

// report --------------------------------------------------------------------

namespace {

Plot plot_from_csv(const std::string& content, const std::string& title) {
  Plot p{title, "x", "y", {}};
  std::istringstream is(content);
  std::string line;
  std::getline(is, line);
  if (line != "series,x,y") fail(ErrorKind::Parse, title + ": not a plot CSV");
  while (std::getline(is, line)) {
    const auto c1 = line.find(','), c2 = line.rfind(',');
    if (c1 == std::string::npos || c1 == c2) fail(ErrorKind::Parse, title + ": malformed row");
    const std::string name = line.substr(0, c1);
    if (p.series.empty() || p.series.back().name != name)
      p.series.push_back({name, {}, name.rfind("fit", 0) == 0});
    p.series.back().points.push_back({std::stod(line.substr(c1 + 1, c2 - c1 - 1)), std::stod(line.substr(c2 + 1))});
  }
  return p;
}

}  // namespace

int run_report(const ReportArgs& a, const Common& c) {
  Report dummy("report");
  const Json doc = load_json(dummy, a.in);
  if (!doc.is_object() || !doc.contains("command") || !doc.contains("summary"))
    fail(ErrorKind::Parse, a.in + ": not a scalefit report");
  const std::string command = doc["command"].get<std::string>();
  if (!c.quiet) {
    std::cout << kToolName << " " << doc.value("version", "?") << " " << command << "\n";
    for (const auto& l : doc["summary"]) std::cout << l.get<std::string>() << "\n";
    for (const auto& w : doc.value("warnings", Json::array())) std::cout << "warning: " << w.get<std::string>() << "\n";
  }

  int code = kOk;
  if (!a.verify.empty()) {
    const Json& inputs = doc["inputs"];
    if (inputs.size() != a.verify.size()) {
      std::cerr << "report lists " << inputs.size() << " inputs, " << a.verify.size() << " given\n";
      code = kInvariant;
    }
    std::string joined;
    for (std::size_t i = 0; i < a.verify.size(); ++i) {
      const std::string digest = sha256_hex(read_input(a.verify[i]));
      joined += digest;
      if (i < inputs.size() && inputs[i]["sha256"].get<std::string>() != digest) {
        std::cerr << a.verify[i] << ": content differs from the input recorded as " << inputs[i]["name"].get<std::string>()
                  << "\n";
        code = kInvariant;
      }
    }
    if (code == kOk && sha256_hex(joined) != doc["input_digest"].get<std::string>()) code = kInvariant;
    std::cout << (code == kOk ? "inputs verified" : "input verification FAILED") << "\n";
  }

  if (c.svg) {
    namespace fs = std::filesystem;
    const fs::path base = fs::path(a.in).parent_path();
    const std::string prefix = command + "-";
    std::vector<fs::path> csvs;
    for (const auto& entry : fs::directory_iterator(base.empty() ? fs::path(".") : base)) {
      const std::string name = entry.path().filename().string();
      if (name.rfind(prefix, 0) == 0 && entry.path().extension() == ".csv") csvs.push_back(entry.path());
    }
    std::sort(csvs.begin(), csvs.end());
    for (const auto& p : csvs) {
      Plot plot;
      try {
        plot = plot_from_csv(read_input(p.string()), p.stem().string());
      } catch (const Error&) {
        continue;  // tables that are not plot data
      }
      auto svg = p;
      svg.replace_extension(".svg");
      write_text_file(svg, plot_svg(plot));
      if (!c.quiet) std::cout << "wrote " << svg.string() << "\n";
    }
  }
  return code;
}

}  // namespace scalefit::cli
