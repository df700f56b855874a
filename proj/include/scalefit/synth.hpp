#pragma once

// Known-answer synthetic learning curves used to validate fitting, frontier
// and percentile machinery:
//
//   loss(N, E) = l_inf + (n_scale / N)^alpha_n + (e_scale / E)^alpha_e
//
// multiplied by exp(noise_sigma * z), z ~ N(0, 1) from a seeded generator.

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "scalefit/analysis.hpp"
#include "scalefit/lawcore.hpp"

namespace scalefit {

struct SynthFamily {
  double l_inf = 1.0;
  double n_scale = 1e3;
  double alpha_n = 0.3;
  double e_scale = 1e6;
  double alpha_e = 0.7;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
  /// Noiseless loss.
  double loss(double n_params, double tokens) const;
};

/// One run per model size; run ids are "synth-<index>", steps count from 1.
std::vector<RunRecord> gen_curves(const SynthFamily& family, std::span<const double> model_sizes,
                                  std::span<const double> tokens_grid);

/// Compute-optimal allocation exponent alpha_e / (alpha_n + alpha_e) under
/// C proportional to N E.
double analytic_beta(double alpha_n, double alpha_e);

/// Per-example losses at convergence: example j draws its own l_inf
/// uniformly from `l_inf_spread` and shares the family's model-size term.
LossMatrix gen_example_matrix(const SynthFamily& base, std::size_t n_examples,
                              std::pair<double, double> l_inf_spread,
                              std::span<const double> model_sizes);

std::vector<double> log_spaced(double lo, double hi, std::size_t count);

/// Named families plus grids used by `scalefit synth --preset`.
struct SynthPreset {
  std::string_view name;
  SynthFamily family;
  std::vector<double> model_sizes;
  std::vector<double> tokens_grid;
};

std::vector<std::string_view> preset_names();
/// Throws Error(Domain) for an unknown name.
SynthPreset preset(std::string_view name);

}  // namespace scalefit
