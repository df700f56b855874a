#include "scalefit/catalog.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "scalefit/error.hpp"

namespace scalefit::catalog {

namespace {

ScalingLaw per_token(double irreducible, double scale, double exponent, Variable v) {
  return ScalingLaw::make(irreducible, scale, exponent, v, LossUnit::NatsPerToken);
}

// N_opt printed as (C / c0)^beta.
PurePowerLaw nopt_from_denominator(double c0, double beta) {
  return PurePowerLaw{std::pow(c0, -beta), beta, Variable::Compute, Variable::ModelSize};
}

std::vector<PublishedDomain> build() {
  using V = Variable;
  std::vector<PublishedDomain> d;
  d.push_back({"language", per_token(0.0, 1.47e14, 0.070, V::ModelSize),
               per_token(0.0, 3.47e8, 0.048, V::Compute), nopt_from_denominator(3.3e-13, 0.73),
               0.0, std::nullopt, std::nullopt});
  d.push_back({"image-8x8", per_token(3.12, 8.0e1, 0.24, V::ModelSize),
               per_token(3.13, 1.8e-8, 0.19, V::Compute), nopt_from_denominator(5.3e-14, 0.64),
               192.0, 602.0, 1.9e3});
  d.push_back({"image-16x16", per_token(2.64, 2.8e2, 0.22, V::ModelSize),
               per_token(2.64, 1.6e-8, 0.16, V::Compute), nopt_from_denominator(4.8e-12, 0.75),
               768.0, 2026.0, 1.7e10});
  d.push_back({"image-32x32", per_token(2.20, 6.3e1, 0.13, V::ModelSize),
               per_token(2.21, 3.6e-9, 0.1, V::Compute), nopt_from_denominator(1.6e-13, 0.65),
               3072.0, 6806.0, 2.7e26});
  d.push_back({"image-vq16", per_token(3.99, 2.7e4, 0.13, V::ModelSize),
               per_token(4.09, 6.1e-7, 0.11, V::Compute), nopt_from_denominator(6.2e-14, 0.64),
               256.0, 1047.0, 4.7e15});
  d.push_back({"image-vq32", per_token(3.07, 1.9e4, 0.14, V::ModelSize),
               per_token(3.17, 2.6e-6, 0.12, V::Compute), nopt_from_denominator(9.4e-13, 0.7),
               1024.0, 3246.0, 3.1e19});
  d.push_back({"text-to-image-text", per_token(0.0, 5.6e8, 0.037, V::ModelSize), std::nullopt,
               std::nullopt, 0.0, std::nullopt, std::nullopt});
  d.push_back({"text-to-image-image", per_token(2.0, 5.1e3, 0.16, V::ModelSize),
               per_token(1.93, 1.5e-6, 0.15, V::Compute), nopt_from_denominator(9.4e-13, 0.7),
               0.0, std::nullopt, std::nullopt});
  d.push_back({"image-to-text-text", per_token(0.0, 7.0e8, 0.039, V::ModelSize), std::nullopt,
               std::nullopt, 0.0, std::nullopt, std::nullopt});
  d.push_back({"image-to-text-image", per_token(2.0, 5.5e3, 0.15, V::ModelSize),
               per_token(1.97, 1.5e-6, 0.16, V::Compute), nopt_from_denominator(3.3e-12, 0.72),
               0.0, std::nullopt, std::nullopt});
  d.push_back({"video-vq16", per_token(1.01, 3.7e4, 0.24, V::ModelSize),
               per_token(0.95, 2.2e-5, 0.14, V::Compute), nopt_from_denominator(1.13e-12, 0.71),
               0.0, std::nullopt, std::nullopt});
  d.push_back({"math-extrapolate", per_token(0.28, 1.1e4, 0.16, V::ModelSize),
               per_token(0.14, 1.4e-5, 0.17, V::Compute), nopt_from_denominator(2.3e-12, 0.69),
               0.0, std::nullopt, std::nullopt});
  return d;
}

}  // namespace

std::span<const PublishedDomain> domains() {
  static const std::vector<PublishedDomain> table = build();
  return table;
}

const PublishedDomain& find(std::string_view name) {
  for (const auto& d : domains())
    if (d.name == name) return d;
  fail(ErrorKind::Domain, "unknown published domain '" + std::string(name) + "'");
}

PerExampleCrossCheck cross_check_per_example(const PublishedDomain& domain) {
  if (!domain.compute || domain.tokens_per_example <= 0.0 || !domain.per_example_irreducible ||
      !domain.per_example_scale)
    fail(ErrorKind::Domain,
         "domain '" + std::string(domain.name) + "' has no per-example summary to check");
  PerExampleCrossCheck out{rescale_loss(*domain.compute, domain.tokens_per_example), {}, {}};
  out.irreducible = check_relative(out.derived.irreducible, *domain.per_example_irreducible,
                                   kIrreducibleRelTol);
  out.scale = check_significant_figures(out.derived.scale, *domain.per_example_scale,
                                        kScaleSignificantFigures);
  return out;
}

}  // namespace scalefit::catalog
