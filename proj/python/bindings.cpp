// Python bindings for the scalefit core. Laws, fits and frontier points are
// exposed as classes; composite reports come back as dicts with the same
// layout as the CLI's JSON reports.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "scalefit/analysis.hpp"
#include "scalefit/catalog.hpp"
#include "scalefit/error.hpp"
#include "scalefit/frontier.hpp"
#include "scalefit/infotheory.hpp"
#include "scalefit/lawcore.hpp"
#include "scalefit/powerfit.hpp"
#include "scalefit/report.hpp"
#include "scalefit/runlog.hpp"
#include "scalefit/serialize.hpp"
#include "scalefit/synth.hpp"

namespace py = pybind11;
using namespace scalefit;

namespace {

PyObject* g_error_type = nullptr;

py::object as_python(const Json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

std::vector<DataPoint> points(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) fail(ErrorKind::Domain, "x and y must have the same length");
  std::vector<DataPoint> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = {x[i], y[i]};
  return out;
}

FitKind parse_fit_kind(const std::string& name) {
  if (name == "power-plus-constant") return FitKind::PowerPlusConstant;
  if (name == "pure-power") return FitKind::PurePower;
  if (name == "below-frontier") return FitKind::BelowFrontier;
  fail(ErrorKind::Domain, "unknown fit kind '" + name + "'");
}

FitOptions options_or_default(const std::optional<FitOptions>& o) { return o.value_or(FitOptions{}); }

std::string law_repr(const ScalingLaw& l) {
  std::ostringstream os;
  os << "ScalingLaw(irreducible=" << l.irreducible << ", scale=" << l.scale << ", exponent=" << l.exponent
     << ", variable='" << to_string(l.variable) << "')";
  return os.str();
}

std::vector<RunRecord> runs_from_text(const std::string& text) {
  std::istringstream in(text);
  return read_run_log(in, "<string>");
}

}  // namespace

PYBIND11_MODULE(_scalefit, m) {
  m.doc() = "Scaling-law fitting and analysis";
  m.attr("__version__") = std::string(tool_version());

  g_error_type = PyErr_NewException("scalefit.ScalefitError", PyExc_ValueError, nullptr);
  m.attr("ScalefitError") = py::handle(g_error_type);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object inst = py::reinterpret_steal<py::object>(PyObject_CallFunction(g_error_type, "s", e.what()));
      if (!inst) return;
      inst.attr("kind") = to_string(e.kind());
      PyErr_SetObject(g_error_type, inst.ptr());
    }
  });

  // Laws --------------------------------------------------------------------

  py::class_<ScalingLaw>(m, "ScalingLaw", "L(x) = irreducible + (scale / x)^exponent")
      .def(py::init([](double irreducible, double scale, double exponent, const std::string& variable,
                       const std::string& unit, double tokens_per_example) {
             return ScalingLaw::make(irreducible, scale, exponent, parse_variable(variable), parse_loss_unit(unit),
                                     tokens_per_example);
           }),
           py::arg("irreducible"), py::arg("scale"), py::arg("exponent"), py::arg("variable") = "compute",
           py::arg("unit") = "nats-per-token", py::arg("tokens_per_example") = 1.0)
      .def_readonly("irreducible", &ScalingLaw::irreducible)
      .def_readonly("scale", &ScalingLaw::scale)
      .def_readonly("exponent", &ScalingLaw::exponent)
      .def_readonly("tokens_per_example", &ScalingLaw::tokens_per_example)
      .def_property_readonly("variable", [](const ScalingLaw& l) { return std::string(to_string(l.variable)); })
      .def_property_readonly("unit", [](const ScalingLaw& l) { return std::string(to_string(l.unit)); })
      .def("__call__", &eval_law, py::arg("x"))
      .def("reducible", &reducible_at, py::arg("x"))
      .def("to_dict", [](const ScalingLaw& l) { return as_python(to_json(l)); })
      .def("__eq__", [](const ScalingLaw& a, const ScalingLaw& b) { return a == b; })
      .def("__repr__", &law_repr);

  py::class_<PurePowerLaw>(m, "PurePowerLaw", "y = coefficient * x^exponent")
      .def(py::init([](double coefficient, double exponent, const std::string& input, const std::string& output) {
             return PurePowerLaw{coefficient, exponent, parse_variable(input), parse_variable(output)};
           }),
           py::arg("coefficient"), py::arg("exponent"), py::arg("input") = "compute",
           py::arg("output") = "model-size")
      .def_readonly("coefficient", &PurePowerLaw::coefficient)
      .def_readonly("exponent", &PurePowerLaw::exponent)
      .def("__call__", &PurePowerLaw::operator(), py::arg("x"))
      .def("to_dict", [](const PurePowerLaw& l) { return as_python(to_json(l)); })
      .def("__repr__", [](const PurePowerLaw& l) {
        std::ostringstream os;
        os << "PurePowerLaw(coefficient=" << l.coefficient << ", exponent=" << l.exponent << ")";
        return os.str();
      });

  m.def("rescale_loss", &rescale_loss, py::arg("law"), py::arg("tokens_per_example"));
  m.def("compute_pf_days", [](double n, double tokens) { return compute_pf_days(n, tokens); }, py::arg("n_params"),
        py::arg("tokens"));
  m.attr("FLOPS_PER_PF_DAY") = kFlopsPerPfDay;

  // Fitting -----------------------------------------------------------------

  py::class_<FitOptions>(m, "FitOptions")
      .def(py::init<>())
      .def_readwrite("max_iterations", &FitOptions::max_iterations)
      .def_readwrite("tolerance", &FitOptions::tolerance)
      .def_readwrite("irreducible_grid_points", &FitOptions::irreducible_grid_points)
      .def_readwrite("exponent_grid", &FitOptions::exponent_grid)
      .def_readwrite("irreducible_headroom", &FitOptions::irreducible_headroom)
      .def_readwrite("bootstrap_replicates", &FitOptions::bootstrap_replicates)
      .def_readwrite("seed", &FitOptions::seed)
      .def_readwrite("asymmetry", &FitOptions::asymmetry)
      .def_readwrite("ci_low_percentile", &FitOptions::ci_low_percentile)
      .def_readwrite("ci_high_percentile", &FitOptions::ci_high_percentile)
      .def_readwrite("threads", &FitOptions::threads);

  py::class_<FitReport>(m, "FitReport")
      .def_property_readonly("kind", [](const FitReport& f) { return std::string(to_string(f.kind)); })
      .def_property_readonly("law", [](const FitReport& f) -> py::object {
        return f.is_law() ? py::cast(f.law()) : py::none();
      })
      .def_property_readonly("power", [](const FitReport& f) -> py::object {
        return f.is_law() ? py::none() : py::cast(f.power());
      })
      .def_property_readonly("parameters", &FitReport::parameters)
      .def_property_readonly("ci", [](const FitReport& f) {
        std::vector<std::pair<double, double>> out;
        for (const auto& c : f.ci) out.emplace_back(c.low, c.high);
        return out;
      })
      .def_readonly("converged", &FitReport::converged)
      .def_readonly("residual_rms", &FitReport::residual_rms)
      .def_readonly("n_points", &FitReport::n_points)
      .def_readonly("iterations", &FitReport::iterations)
      .def_readonly("bootstrap_replicates", &FitReport::bootstrap_replicates)
      .def_readonly("bootstrap_failures", &FitReport::bootstrap_failures)
      .def_readonly("max_overprediction", &FitReport::max_overprediction)
      .def("to_dict", [](const FitReport& f) { return as_python(to_json(f)); });

  m.def(
      "fit_power_plus_const",
      [](const std::vector<double>& x, const std::vector<double>& y, std::optional<FitOptions> o,
         const std::string& variable) {
        const auto pts = points(x, y);
        const auto opts = options_or_default(o);
        py::gil_scoped_release release;
        return fit_power_plus_const(pts, opts, parse_variable(variable));
      },
      py::arg("x"), py::arg("y"), py::arg("options") = py::none(), py::arg("variable") = "compute");
  m.def(
      "fit_pure_power",
      [](const std::vector<double>& x, const std::vector<double>& y, const std::string& input,
         const std::string& output) { return fit_pure_power(points(x, y), parse_variable(input), parse_variable(output)); },
      py::arg("x"), py::arg("y"), py::arg("input") = "compute", py::arg("output") = "model-size");
  m.def(
      "fit_below_frontier",
      [](const std::vector<double>& x, const std::vector<double>& y, std::optional<FitOptions> o,
         const std::string& variable) {
        const auto pts = points(x, y);
        const auto opts = options_or_default(o);
        py::gil_scoped_release release;
        return fit_below_frontier(pts, opts, parse_variable(variable));
      },
      py::arg("x"), py::arg("y"), py::arg("options") = py::none(), py::arg("variable") = "compute");
  m.def(
      "bootstrap_ci",
      [](const std::vector<double>& x, const std::vector<double>& y, const std::string& kind,
         std::optional<FitOptions> o, const std::string& variable) {
        const auto pts = points(x, y);
        const auto opts = options_or_default(o);
        const auto k = parse_fit_kind(kind);
        py::gil_scoped_release release;
        return bootstrap_ci(pts, k, opts, parse_variable(variable));
      },
      py::arg("x"), py::arg("y"), py::arg("kind") = "power-plus-constant", py::arg("options") = py::none(),
      py::arg("variable") = "compute");

  // Runs and frontiers ------------------------------------------------------

  py::class_<RunRecord>(m, "RunRecord")
      .def_readonly("run_id", &RunRecord::run_id)
      .def_readonly("n_params", &RunRecord::n_params)
      .def_readonly("batch_tokens", &RunRecord::batch_tokens)
      .def_property_readonly("series", [](const RunRecord& r) {
        std::vector<std::tuple<std::int64_t, double, double, std::optional<double>>> out;
        for (const auto& p : r.series) out.emplace_back(p.step, p.tokens, p.test_loss, p.train_loss);
        return out;
      })
      .def("to_json_line", &to_json_line);

  m.def("read_runs", &runs_from_text, py::arg("text"), "Parse a JSONL run log held in a string.");
  m.def("read_runs_file", &read_run_log_file, py::arg("path"));
  m.def(
      "write_runs",
      [](const std::vector<RunRecord>& runs) {
        std::ostringstream os;
        write_run_log(os, runs);
        return os.str();
      },
      py::arg("runs"));

  py::class_<FrontierPoint>(m, "FrontierPoint")
      .def_readonly("compute", &FrontierPoint::compute)
      .def_readonly("loss", &FrontierPoint::loss)
      .def_readonly("run_id", &FrontierPoint::run_id)
      .def_readonly("n_params", &FrontierPoint::n_params)
      .def("__repr__", [](const FrontierPoint& p) {
        std::ostringstream os;
        os << "FrontierPoint(compute=" << p.compute << ", loss=" << p.loss << ", run_id='" << p.run_id << "')";
        return os.str();
      });

  py::class_<Frontier>(m, "Frontier")
      .def_readonly("pareto", &Frontier::pareto)
      .def_readonly("hull", &Frontier::hull)
      .def("to_dict", [](const Frontier& f) { return as_python(to_json(f)); });

  m.def(
      "build_frontier",
      [](const std::vector<RunRecord>& runs, const std::string& split, int smoothing) {
        FrontierOptions o;
        o.split = parse_split(split);
        o.smoothing_window = smoothing;
        return hull_points(build_pareto(runs, o));
      },
      py::arg("runs"), py::arg("split") = "test", py::arg("smoothing") = 1,
      "Pareto frontier of loss against compute with its lower convex hull.");
  m.def(
      "fit_nopt",
      [](const Frontier& f, bool exclude_edge_models) { return fit_nopt(f, NoptOptions{exclude_edge_models}); },
      py::arg("frontier"), py::arg("exclude_edge_models") = true);
  m.def("data_scaling_exponent", &data_scaling_exponent, py::arg("beta"));
  m.def("tokens_compute_law", &tokens_compute_law, py::arg("nopt"), py::arg("flops_per_pf_day") = kFlopsPerPfDay);

  // Analysis ----------------------------------------------------------------

  m.def("forecast", &forecast_x_for_reducible, py::arg("law"), py::arg("target"),
        "Abscissa at which the reducible loss reaches `target`.");
  m.def("decompose", [](const ScalingLaw& law) { return as_python(to_json(decompose(law))); }, py::arg("law"));
  m.def(
      "consistency_check",
      [](const ScalingLaw& data_law, const PurePowerLaw& nopt, const ScalingLaw& compute_law, double perturb,
         double flops_per_pf_day) {
        ConsistencyOptions o;
        o.flops_per_pf_day = flops_per_pf_day;
        return as_python(to_json(consistency_check(data_law, nopt, compute_law, perturb, o)));
      },
      py::arg("data_law"), py::arg("nopt"), py::arg("compute_law"), py::arg("perturb") = 0.05,
      py::arg("flops_per_pf_day") = kFlopsPerPfDay);
  m.def("nearest_rank_percentile", &nearest_rank_percentile, py::arg("values"), py::arg("percentile"));
  m.def(
      "percentile_trends",
      [](const std::vector<double>& n_params, const std::vector<std::vector<double>>& losses,
         const std::vector<double>& percentiles, std::optional<FitOptions> o) {
        const LossMatrix matrix{n_params, losses};
        py::list out;
        for (const auto& t : percentile_trends(matrix, percentiles, options_or_default(o))) {
          py::dict d;
          d["percentile"] = t.percentile;
          d["fit"] = t.fit;
          out.append(d);
        }
        return out;
      },
      py::arg("n_params"), py::arg("losses"), py::arg("percentiles") = kDefaultPercentiles,
      py::arg("options") = py::none());
  m.def(
      "scan_optimum",
      [](const std::vector<double>& ratio, const std::vector<double>& loss) {
        return as_python(to_json(scan_optimum(points(ratio, loss))));
      },
      py::arg("ratio"), py::arg("loss"));

  // Information theory ------------------------------------------------------

  m.def("mutual_info", [](double lu, double lc) { return as_python(to_json(mutual_info(lu, lc))); },
        py::arg("loss_unconditioned"), py::arg("loss_conditioned"));
  m.def("infogain", [](double mi, double lt) { return as_python(to_json(infogain(mi, lt))); }, py::arg("mi"),
        py::arg("loss_text"));
  m.def("words_equivalent", &words_equivalent, py::arg("mi"), py::arg("nats_per_word"));

  py::class_<LogMIFit>(m, "LogMIFit")
      .def_readonly("lam", &LogMIFit::lambda)
      .def_readonly("n_c", &LogMIFit::n_c)
      .def_readonly("residual_rms", &LogMIFit::residual_rms)
      .def_readonly("increasing", &LogMIFit::increasing)
      .def("__call__", &LogMIFit::operator(), py::arg("n_params"))
      .def("invert", &invert_log_mi, py::arg("target"));
  m.def(
      "fit_log_mi", [](const std::vector<double>& n, const std::vector<double>& v) { return fit_log_mi(points(n, v)); },
      py::arg("n_params"), py::arg("values"));

  m.def("gen_harmonic", &gen_harmonic, py::arg("terms"), py::arg("power"));

  py::class_<ContextModel>(m, "ContextModel")
      .def(py::init([](double l_model, double l_unigram, double p, std::int64_t horizon) {
             ContextModel c{l_model, l_unigram, p, horizon};
             c.validate();
             return c;
           }),
           py::arg("l_model"), py::arg("l_unigram"), py::arg("p"), py::arg("horizon"))
      .def_readonly("l_model", &ContextModel::l_model)
      .def_readonly("l_unigram", &ContextModel::l_unigram)
      .def_readonly("p", &ContextModel::p)
      .def_readonly("horizon", &ContextModel::horizon)
      .def("loss", [](const ContextModel& c, double t) { return context_loss(t, c); }, py::arg("t"))
      .def("mi", &context_mi)
      .def("infogain", &context_infogain);
  m.def("context_infogain_limit", &context_infogain_limit, py::arg("horizon"), py::arg("p"));
  m.def(
      "fit_context_profile",
      [](const std::vector<double>& t, const std::vector<double>& loss) { return fit_context_profile(points(t, loss)); },
      py::arg("positions"), py::arg("losses"));

  // Synthetic data and published laws ---------------------------------------

  m.def("analytic_beta", &analytic_beta, py::arg("alpha_n"), py::arg("alpha_e"));
  m.def(
      "gen_curves",
      [](double l_inf, double n_scale, double alpha_n, double e_scale, double alpha_e,
         const std::vector<double>& model_sizes, const std::vector<double>& tokens, double noise, std::uint64_t seed) {
        return gen_curves(SynthFamily{l_inf, n_scale, alpha_n, e_scale, alpha_e, noise, seed}, model_sizes, tokens);
      },
      py::arg("l_inf"), py::arg("n_scale"), py::arg("alpha_n"), py::arg("e_scale"), py::arg("alpha_e"),
      py::arg("model_sizes"), py::arg("tokens"), py::arg("noise") = 0.0, py::arg("seed") = 0);
  m.def(
      "preset_curves",
      [](const std::string& name) {
        const auto p = preset(name);
        return gen_curves(p.family, p.model_sizes, p.tokens_grid);
      },
      py::arg("name"));
  m.def("preset_names", [] {
    std::vector<std::string> out;
    for (const auto n : preset_names()) out.emplace_back(n);
    return out;
  });
  m.def("log_spaced", &log_spaced, py::arg("lo"), py::arg("hi"), py::arg("count"));

  m.def("published_domains", [] {
    std::vector<std::string> out;
    for (const auto& d : catalog::domains()) out.emplace_back(d.name);
    return out;
  });
  m.def("published_compute_law", [](const std::string& name) -> py::object {
    const auto& d = catalog::find(name);
    return d.compute ? py::cast(*d.compute) : py::none();
  }, py::arg("name"));
  m.def(
      "cross_check_per_example",
      [](const std::string& name) { return as_python(to_json(catalog::cross_check_per_example(catalog::find(name)))); },
      py::arg("name"));
}
