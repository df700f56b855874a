#include "scalefit/serialize.hpp"

#include <initializer_list>

#include "scalefit/error.hpp"

namespace scalefit {

namespace {

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json param(const char* name, double value, const FitReport& fit, std::size_t i) {
  Json p;
  p["name"] = name;
  p["value"] = value;
  if (i < fit.ci.size()) {
    p["ci_low"] = fit.ci[i].low;
    p["ci_high"] = fit.ci[i].high;
  }
  return p;
}

double required_number(const Json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number())
    fail(ErrorKind::Parse, std::string("law field '") + key + "' missing or not a number");
  return j[key].get<double>();
}

const Json* descend(const Json& j, std::initializer_list<std::string_view> keys) {
  for (const auto k : keys) {
    const std::string key(k);
    if (j.is_object() && j.contains(key) && j[key].is_object()) return &j[key];
  }
  return nullptr;
}

}  // namespace

Json to_json(const ScalingLaw& law) {
  Json j;
  j["irreducible"] = law.irreducible;
  j["scale"] = law.scale;
  j["exponent"] = law.exponent;
  j["variable"] = to_string(law.variable);
  j["unit"] = to_string(law.unit);
  j["tokens_per_example"] = law.tokens_per_example;
  return j;
}

Json to_json(const PurePowerLaw& law) {
  Json j;
  j["coefficient"] = law.coefficient;
  j["exponent"] = law.exponent;
  j["input"] = to_string(law.input);
  j["output"] = to_string(law.output);
  return j;
}

Json to_json(const FitReport& fit) {
  Json j;
  j["kind"] = to_string(fit.kind);
  Json params = Json::array();
  if (fit.is_law()) {
    j["law"] = to_json(fit.law());
    params.push_back(param("irreducible", fit.law().irreducible, fit, 0));
    params.push_back(param("scale", fit.law().scale, fit, 1));
    params.push_back(param("exponent", fit.law().exponent, fit, 2));
  } else {
    j["power"] = to_json(fit.power());
    params.push_back(param("coefficient", fit.power().coefficient, fit, 0));
    params.push_back(param("exponent", fit.power().exponent, fit, 1));
  }
  j["parameters"] = std::move(params);
  j["converged"] = fit.converged;
  j["n_points"] = fit.n_points;
  j["residual_rms_log"] = fit.residual_rms;
  j["iterations"] = fit.iterations;
  j["multistart_best_index"] = fit.multistart_best_index;
  j["bootstrap_replicates"] = fit.bootstrap_replicates;
  j["bootstrap_failures"] = fit.bootstrap_failures;
  if (fit.kind == FitKind::BelowFrontier) {
    j["max_overprediction"] = fit.max_overprediction;
    j["asymmetry_used"] = fit.asymmetry_used;
  }
  j["selection_policy"] = fit.selection_policy;
  return j;
}

Json to_json(const FitOptions& o) {
  Json j;
  j["max_iterations"] = o.max_iterations;
  j["tolerance"] = o.tolerance;
  j["irreducible_grid_points"] = o.irreducible_grid_points;
  j["exponent_grid"] = o.exponent_grid;
  j["irreducible_headroom"] = o.irreducible_headroom;
  j["bootstrap_replicates"] = o.bootstrap_replicates;
  j["seed"] = o.seed;
  j["asymmetry"] = o.asymmetry;
  j["ci_low_percentile"] = o.ci_low_percentile;
  j["ci_high_percentile"] = o.ci_high_percentile;
  // Thread count is deliberately omitted: results do not depend on it.
  return j;
}

Json to_json(const Frontier& frontier) {
  auto points = [](const std::vector<FrontierPoint>& pts) {
    Json a = Json::array();
    for (const auto& p : pts) {
      Json q;
      q["compute"] = p.compute;
      q["loss"] = p.loss;
      q["run_id"] = p.run_id;
      q["n_params"] = p.n_params;
      a.push_back(std::move(q));
    }
    return a;
  };
  Json j;
  j["pareto"] = points(frontier.pareto);
  j["hull"] = points(frontier.hull);
  return j;
}

Json to_json(const Intersection& p) {
  Json j;
  j["found"] = p.found;
  if (p.found) {
    j["compute"] = p.compute;
    j["tokens"] = p.tokens;
    j["residual"] = p.residual;
  }
  return j;
}

Json to_json(const ConsistencyReport& r) {
  Json j;
  j["intersection"] = to_json(r.point);
  j["perturb"] = r.perturb;
  j["beta_low"] = to_json(r.low);
  j["beta_high"] = to_json(r.high);
  if (r.point.found && r.low.found && r.high.found) {
    j["band"] = Json::array({r.band_low, r.band_high});
  } else {
    j["band"] = nullptr;
  }
  j["bracketing"] = r.bracketing;
  j["monotone"] = r.monotone;
  Json s;
  s["bracket_low"] = r.settings.bracket_low;
  s["bracket_high"] = r.settings.bracket_high;
  s["grid_points"] = r.settings.grid_points;
  s["tolerance_ln_compute"] = r.settings.tolerance;
  s["flops_per_pf_day"] = r.settings.flops_per_pf_day;
  j["settings"] = std::move(s);
  return j;
}

Json to_json(const Decomposition& d) {
  Json j;
  j["entropy_estimate"] = d.entropy_estimate;
  j["kl_law"] = to_json(d.kl_law);
  j["caveats"] = d.caveats;
  return j;
}

Json to_json(const MIEstimate& e) {
  Json j;
  j["mi"] = e.mi;
  j["infogain"] = optional_number(e.infogain);
  j["negative"] = e.negative;
  j["over_unity"] = e.over_unity;
  j["source"] = e.source == MISource::PairedLoss ? "paired-loss" : "context-model";
  return j;
}

Json to_json(const LogMIFit& fit) {
  Json j;
  j["lambda"] = fit.lambda;
  j["n_c"] = fit.n_c;
  j["residual_rms"] = fit.residual_rms;
  j["increasing"] = fit.increasing;
  return j;
}

Json to_json(const ContextModel& m) {
  Json j;
  j["l_model"] = m.l_model;
  j["l_unigram"] = m.l_unigram;
  j["p"] = m.p;
  j["horizon"] = m.horizon;
  return j;
}

Json to_json(const ScanOptimum& s) {
  Json j;
  j["ratio"] = s.ratio;
  j["loss"] = s.loss;
  j["curvature"] = s.curvature;
  j["status"] = to_string(s.status);
  return j;
}

Json to_json(const PublishedCheck& c) {
  Json j;
  j["derived"] = c.derived;
  j["published"] = c.published;
  j["relative_error"] = c.relative_error;
  j["consistent"] = c.consistent;
  return j;
}

Json to_json(const catalog::PerExampleCrossCheck& c) {
  Json j;
  j["derived"] = to_json(c.derived);
  j["irreducible"] = to_json(c.irreducible);
  j["scale"] = to_json(c.scale);
  j["discrepancy"] = c.discrepancy();
  return j;
}

ScalingLaw law_from_json(const Json& j, std::string_view key) {
  if (j.is_object() && j.contains("irreducible")) {
    ScalingLaw law;
    law.irreducible = required_number(j, "irreducible");
    law.scale = required_number(j, "scale");
    law.exponent = required_number(j, "exponent");
    try {
      if (j.contains("variable")) law.variable = parse_variable(j["variable"].get<std::string>());
      if (j.contains("unit")) law.unit = parse_loss_unit(j["unit"].get<std::string>());
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::Parse, std::string("law: ") + e.what());
    } catch (const Error& e) {
      fail(ErrorKind::Parse, std::string("law: ") + e.what());
    }
    if (j.contains("tokens_per_example")) law.tokens_per_example = required_number(j, "tokens_per_example");
    try {
      law.validate();
    } catch (const Error& e) {
      fail(ErrorKind::Parse, std::string("law: ") + e.what());
    }
    return law;
  }
  if (const Json* child = descend(j, {key, "results", "fit", "law"})) return law_from_json(*child, key);
  fail(ErrorKind::Parse, "no scaling law found (expected irreducible/scale/exponent)");
}

PurePowerLaw power_from_json(const Json& j, std::string_view key) {
  if (j.is_object() && j.contains("coefficient")) {
    PurePowerLaw p;
    p.coefficient = required_number(j, "coefficient");
    p.exponent = required_number(j, "exponent");
    try {
      if (j.contains("input")) p.input = parse_variable(j["input"].get<std::string>());
      if (j.contains("output")) p.output = parse_variable(j["output"].get<std::string>());
    } catch (const std::exception& e) {
      fail(ErrorKind::Parse, std::string("power law: ") + e.what());
    }
    if (!(p.coefficient > 0.0)) fail(ErrorKind::Parse, "power law: coefficient must be > 0");
    return p;
  }
  if (const Json* child = descend(j, {key, "results", "nopt", "fit", "power"}))
    return power_from_json(*child, key);
  fail(ErrorKind::Parse, "no power law found (expected coefficient/exponent)");
}

}  // namespace scalefit
