#pragma once

// Published per-token scaling laws for the autoregressive image, video,
// multimodal and math models, together with the per-image summaries that
// were printed alongside them. Used by `scalefit rescale --preset` and by
// the cross-checks in the acceptance suite.

#include <optional>
#include <span>
#include <string_view>

#include "scalefit/lawcore.hpp"

namespace scalefit::catalog {

struct PublishedDomain {
  std::string_view name;
  std::optional<ScalingLaw> model_size;  // L(N), nats/token
  std::optional<ScalingLaw> compute;     // L(C), nats/token, C in PF-days
  std::optional<PurePowerLaw> nopt;      // N_opt(C)
  double tokens_per_example = 0.0;       // 0 when no per-example view exists
  // Printed per-example summary of the compute law, if any.
  std::optional<double> per_example_irreducible;
  std::optional<double> per_example_scale;
};

std::span<const PublishedDomain> domains();
/// Throws Error(Domain) for an unknown name.
const PublishedDomain& find(std::string_view name);

/// Outcome of converting a per-token compute law to a per-example one and
/// comparing against the printed per-example summary.
struct PerExampleCrossCheck {
  ScalingLaw derived;
  PublishedCheck irreducible;  // relative, 0.5%
  PublishedCheck scale;        // 2 significant figures
  bool discrepancy() const { return irreducible.discrepancy() || scale.discrepancy(); }
};

inline constexpr double kIrreducibleRelTol = 5e-3;
inline constexpr int kScaleSignificantFigures = 2;

PerExampleCrossCheck cross_check_per_example(const PublishedDomain& domain);

}  // namespace scalefit::catalog
