// scalefit: fit, decompose, cross-check and extrapolate scaling laws.
//
// Exit codes: 0 success, 1 analysis-level failure (non-convergence, no
// intersection), 2 parse or usage error, 3 invariant violation in the inputs.

#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "cli.hpp"
#include "scalefit/error.hpp"

using namespace scalefit;
using namespace scalefit::cli;

namespace {

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse:
    case ErrorKind::Domain:
      return kUsage;
    case ErrorKind::Invariant:
    case ErrorKind::InsufficientData:
    case ErrorKind::DegenerateData:
    case ErrorKind::NotDecomposable:
      return kInvariant;
    case ErrorKind::NoSolution:
      return kAnalysisFailure;
  }
  return kUsage;
}

void add_law_options(CLI::App* cmd, LawArgs& law) {
  cmd->add_option("--law", law.law_file, "JSON file holding a law, or a report containing one");
  cmd->add_option("--irreducible", law.irreducible, "irreducible loss (nats)");
  cmd->add_option("--scale", law.scale, "scale x0 of the reducible term");
  cmd->add_option("--exponent", law.exponent, "exponent alpha");
  cmd->add_option("--variable", law.variable, "model-size, compute, data or position");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"scalefit: scaling-law fitting and analysis"};
  app.set_version_flag("--version", std::string(tool_version()));
  app.require_subcommand(1);
  app.fallthrough();

  Common common;
  app.add_option("--out", common.out_dir, "directory for reports and plot data")->capture_default_str();
  app.add_option("--config", common.config, "key = value file with fit options");
  app.add_option("--seed", common.seed, "random seed (overrides SCALEFIT_SEED and --config)");
  app.add_option("--threads", common.threads, "worker threads, 0 = all cores");
  app.add_option("--bootstrap", common.bootstrap, "bootstrap replicates");
  app.add_flag("--svg", common.svg, "also write SVG charts");
  app.add_flag("--json", common.json, "print the report document instead of the text summary");
  app.add_flag("--quiet", common.quiet, "print nothing on success");
  app.add_flag("--no-timestamp", common.no_timestamp, "omit generated_at from the report");

  std::function<int()> action;

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest-check", "validate a run log");
  c_ingest->add_option("--runs", ingest.runs, "run log (JSONL), - for stdin")->capture_default_str();
  c_ingest->callback([&] { action = [&] { return run_ingest_check(ingest, common); }; });

  FitArgs fit;
  auto* c_fit = app.add_subcommand("fit", "fit L = L_inf + (x0/x)^alpha");
  c_fit->add_option("--runs", fit.runs, "run log (JSONL), - for stdin");
  c_fit->add_option("--points", fit.points, "CSV with header x,loss");
  c_fit->add_option("--variable", fit.variable, "compute, model-size or data")->capture_default_str();
  c_fit->add_option("--split", fit.split, "test or train")->capture_default_str();
  c_fit->add_option("--policy", fit.policy, "per-run point for model-size/data fits: final or min")->capture_default_str();
  c_fit->add_option("--smoothing", fit.smoothing, "odd median window applied to curves before the frontier")->capture_default_str();
  c_fit->add_flag("--below-frontier", fit.below_frontier, "penalise over-prediction so the fit stays below the points");
  c_fit->add_flag("--no-bootstrap", fit.no_bootstrap, "skip confidence intervals");
  c_fit->callback([&] {
    if (fit.runs.empty() && fit.points.empty()) fit.runs = "-";
    action = [&] { return run_fit(fit, common); };
  });

  FrontierArgs front;
  auto* c_front = app.add_subcommand("frontier", "compute-efficient frontier and its convex hull");
  c_front->add_option("--runs", front.runs, "run log (JSONL), - for stdin")->capture_default_str();
  c_front->add_option("--split", front.split, "test or train")->capture_default_str();
  c_front->add_option("--smoothing", front.smoothing, "odd median window")->capture_default_str();
  c_front->callback([&] { action = [&] { return run_frontier(front, common); }; });

  NoptArgs nopt;
  auto* c_nopt = app.add_subcommand("nopt", "compute-optimal model size N_opt(C) and derived data scaling");
  c_nopt->add_option("--runs", nopt.runs, "run log (JSONL), - for stdin");
  c_nopt->add_option("--coefficient", nopt.coefficient, "N_opt coefficient (C in PF-days)");
  c_nopt->add_option("--exponent", nopt.exponent, "N_opt exponent beta");
  c_nopt->add_option("--split", nopt.split, "test or train")->capture_default_str();
  c_nopt->add_flag("--keep-edge-models", nopt.keep_edge_models, "fit over every hull point");
  c_nopt->callback([&] { action = [&] { return run_nopt(nopt, common); }; });

  ForecastArgs fc;
  auto* c_fc = app.add_subcommand("forecast", "invert or evaluate a law");
  add_law_options(c_fc, fc.law);
  c_fc->add_option("--target", fc.targets, "reducible loss (nats) to reach; repeatable");
  c_fc->add_option("--at", fc.at, "abscissa at which to evaluate; repeatable");
  c_fc->callback([&] { action = [&] { return run_forecast(fc, common); }; });

  RescaleArgs rs;
  auto* c_rs = app.add_subcommand("rescale", "per-token to per-example law conversion");
  c_rs->add_option("--preset", rs.preset, "published domain name, or 'all'");
  add_law_options(c_rs, rs.law);
  c_rs->add_option("--tokens-per-example", rs.tokens_per_example, "tokens folded into one example");
  c_rs->callback([&] { action = [&] { return run_rescale(rs, common); }; });

  ConsistencyArgs cs;
  auto* c_cs = app.add_subcommand("consistency", "intersection of L(D(C)) and L(C)");
  c_cs->add_option("--ld", cs.ld, "law over dataset size (JSON)")->required();
  c_cs->add_option("--lc", cs.lc, "law over compute (JSON)")->required();
  c_cs->add_option("--nopt", cs.nopt, "N_opt(C) power law (JSON)")->required();
  c_cs->add_option("--perturb", cs.perturb, "relative change of beta for the band")->capture_default_str();
  c_cs->add_option("--bracket-low", cs.bracket_low, "lowest compute searched (PF-days)")->capture_default_str();
  c_cs->add_option("--bracket-high", cs.bracket_high, "highest compute searched (PF-days)")->capture_default_str();
  c_cs->add_option("--grid-points", cs.grid_points, "log grid for the sign-change scan")->capture_default_str();
  c_cs->add_option("--tolerance", cs.tolerance, "bisection tolerance in ln C")->capture_default_str();
  c_cs->callback([&] { action = [&] { return run_consistency(cs, common); }; });

  PercentileArgs pc;
  auto* c_pc = app.add_subcommand("percentiles", "per-percentile trends of per-example losses");
  c_pc->add_option("--matrix", pc.matrix, "CSV n_params,example_0,...")->required();
  c_pc->add_option("--percentiles", pc.percentiles, "percentiles to fit (default 1 5 20 50 80 95 99)")->delimiter(',');
  c_pc->callback([&] { action = [&] { return run_percentiles(pc, common); }; });

  MIArgs mi;
  auto* c_mi = app.add_subcommand("mi", "mutual information and infogain from paired losses");
  c_mi->add_option("--pairs", mi.pairs, "CSV n_params,loss_unconditioned,loss_conditioned,loss_text");
  c_mi->add_option("--point", mi.points, "extra trend point N:value; repeatable");
  c_mi->add_option("--trend", mi.trend, "quantity fitted against ln N: mi or infogain")->capture_default_str();
  c_mi->add_option("--target", mi.target, "trend value to reach; reports the N needed");
  c_mi->add_option("--nats-per-word", mi.nats_per_word, "express MI in words");
  c_mi->callback([&] { action = [&] { return run_mi(mi, common); }; });

  ContextArgs cx;
  auto* c_cx = app.add_subcommand("context", "context-position loss model, MI and infogain");
  c_cx->add_option("--profile", cx.profile, "CSV position,loss");
  c_cx->add_option("--l-model", cx.l_model, "asymptotic per-token loss");
  c_cx->add_option("--l-unigram", cx.l_unigram, "loss at position 1");
  c_cx->add_option("--p", cx.p, "power of the position decay");
  c_cx->add_option("--horizon", cx.horizon, "context length T");
  c_cx->callback([&] { action = [&] { return run_context(cx, common); }; });

  ScanArgs sc;
  auto* c_sc = app.add_subcommand("scan-opt", "optimum of a hyperparameter scan");
  c_sc->add_option("--scan", sc.scan, "CSV aspect_ratio,loss")->required();
  c_sc->callback([&] { action = [&] { return run_scan_opt(sc, common); }; });

  SynthArgs sy;
  auto* c_sy = app.add_subcommand("synth", "synthetic learning curves as a run log");
  c_sy->add_option("--preset", sy.preset, "beta07, beta05 or beta056");
  c_sy->add_option("--output", sy.output, "run log path, - for stdout")->capture_default_str();
  c_sy->add_option("--l-inf", sy.l_inf);
  c_sy->add_option("--n-scale", sy.n_scale);
  c_sy->add_option("--alpha-n", sy.alpha_n);
  c_sy->add_option("--e-scale", sy.e_scale);
  c_sy->add_option("--alpha-e", sy.alpha_e);
  c_sy->add_option("--noise", sy.noise, "lognormal noise sigma")->capture_default_str();
  c_sy->callback([&] { action = [&] { return run_synth(sy, common); }; });

  ReportArgs rp;
  auto* c_rp = app.add_subcommand("report", "print a report, verify its inputs, render SVG charts");
  c_rp->add_option("--in", rp.in, "report JSON")->required();
  c_rp->add_option("--verify", rp.verify, "input files, in recorded order; exit 3 on mismatch");
  c_rp->callback([&] { action = [&] { return run_report(rp, common); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  try {
    return action();
  } catch (const Error& e) {
    std::string msg = e.what();
    while (!msg.empty() && msg.back() == '\n') msg.pop_back();
    std::cerr << "error (" << to_string(e.kind()) << "): " << msg << "\n";
    return exit_code_for(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
}
