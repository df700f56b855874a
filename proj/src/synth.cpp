#include "scalefit/synth.hpp"

#include <cmath>
#include <random>
#include <string>

#include "scalefit/error.hpp"

namespace scalefit {

void SynthFamily::validate() const {
  if (!(l_inf >= 0.0 && std::isfinite(l_inf))) fail(ErrorKind::Domain, "l_inf must be >= 0");
  if (!(n_scale > 0.0 && alpha_n > 0.0 && e_scale > 0.0 && alpha_e > 0.0))
    fail(ErrorKind::Domain, "synthetic scales and exponents must be > 0");
  if (!(noise_sigma >= 0.0 && std::isfinite(noise_sigma)))
    fail(ErrorKind::Domain, "noise sigma must be >= 0");
}

double SynthFamily::loss(double n_params, double tokens) const {
  return l_inf + std::pow(n_scale / n_params, alpha_n) + std::pow(e_scale / tokens, alpha_e);
}

namespace {

void require_grid(std::span<const double> grid, const char* what) {
  if (grid.empty()) fail(ErrorKind::Domain, std::string(what) + " grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(std::isfinite(grid[i]) && grid[i] > 0.0))
      fail(ErrorKind::Domain, std::string(what) + " grid values must be > 0");
    if (i > 0 && !(grid[i] > grid[i - 1]))
      fail(ErrorKind::Domain, std::string(what) + " grid must be strictly increasing");
  }
}

}  // namespace

std::vector<RunRecord> gen_curves(const SynthFamily& family, std::span<const double> model_sizes,
                                  std::span<const double> tokens_grid) {
  family.validate();
  require_grid(model_sizes, "model size");
  require_grid(tokens_grid, "token");
  if (model_sizes.back() >= 9.2e18) fail(ErrorKind::Domain, "model sizes must fit a 64-bit parameter count");
  std::mt19937_64 rng(family.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<RunRecord> runs;
  runs.reserve(model_sizes.size());
  for (std::size_t i = 0; i < model_sizes.size(); ++i) {
    RunRecord run;
    run.run_id = "synth-" + std::to_string(i);
    run.n_params = std::max<std::int64_t>(1, std::llround(model_sizes[i]));
    const auto n = static_cast<double>(run.n_params);
    for (std::size_t j = 0; j < tokens_grid.size(); ++j) {
      double loss = family.loss(n, tokens_grid[j]);
      if (family.noise_sigma > 0.0) loss *= std::exp(family.noise_sigma * normal(rng));
      run.series.push_back({static_cast<std::int64_t>(j + 1), tokens_grid[j], loss, std::nullopt});
    }
    runs.push_back(std::move(run));
  }
  return runs;
}

double analytic_beta(double alpha_n, double alpha_e) {
  if (!(alpha_n > 0.0 && alpha_e > 0.0)) fail(ErrorKind::Domain, "exponents must be > 0");
  return alpha_e / (alpha_n + alpha_e);
}

LossMatrix gen_example_matrix(const SynthFamily& base, std::size_t n_examples,
                              std::pair<double, double> l_inf_spread,
                              std::span<const double> model_sizes) {
  base.validate();
  require_grid(model_sizes, "model size");
  const auto [low, high] = l_inf_spread;
  if (!(std::isfinite(low) && std::isfinite(high) && low >= 0.0 && low <= high))
    fail(ErrorKind::Domain, "l_inf spread must satisfy 0 <= low <= high");
  if (n_examples < 1) fail(ErrorKind::Domain, "need at least one example");

  std::mt19937_64 rng(base.seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> l_inf(n_examples);
  for (auto& v : l_inf) v = low + (high - low) * uniform(rng);

  LossMatrix m;
  m.n_params.assign(model_sizes.begin(), model_sizes.end());
  for (double n : model_sizes) {
    const double reducible = std::pow(base.n_scale / n, base.alpha_n);
    std::vector<double> row(n_examples);
    for (std::size_t j = 0; j < n_examples; ++j) {
      row[j] = l_inf[j] + reducible;
      if (base.noise_sigma > 0.0) row[j] *= std::exp(base.noise_sigma * normal(rng));
    }
    m.losses.push_back(std::move(row));
  }
  return m;
}

std::vector<double> log_spaced(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0 && hi >= lo) || count == 0) fail(ErrorKind::Domain, "invalid log-spaced range");
  std::vector<double> v(count);
  if (count == 1) {
    v[0] = lo;
    return v;
  }
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < count; ++i)
    v[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
  v.back() = hi;
  return v;
}

std::vector<std::string_view> preset_names() { return {"beta07", "beta05", "beta056"}; }

SynthPreset preset(std::string_view name) {
  auto make = [&](double alpha_n, double alpha_e) {
    SynthPreset p;
    for (auto known : preset_names())
      if (known == name) p.name = known;
    p.family = SynthFamily{1.5, 1e3, alpha_n, 1e6, alpha_e, 0.0, 0};
    p.model_sizes = log_spaced(1e5, 1e9, 20);
    p.tokens_grid = log_spaced(1e6, 1e13, 200);
    return p;
  };
  if (name == "beta07") return make(0.3, 0.7);
  if (name == "beta05") return make(0.5, 0.5);
  if (name == "beta056") return make(0.19, 0.24);
  fail(ErrorKind::Domain, "unknown synth preset '" + std::string(name) + "'");
}

}  // namespace scalefit
