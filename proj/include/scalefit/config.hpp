#pragma once

// FitOptions from `key = value` files, with `#` comments. Keys are the
// FitOptions field names; `exponent_grid` takes a comma-separated list.
//
// Precedence, lowest first: built-in defaults, config file, the
// SCALEFIT_SEED environment variable, command-line flags.

#include <iosfwd>
#include <optional>
#include <string_view>

#include "scalefit/powerfit.hpp"

namespace scalefit {

inline constexpr const char* kSeedEnvVar = "SCALEFIT_SEED";

/// Applies the file's settings on top of `base`. Unknown keys and bad
/// values are Error(Parse) with a line number.
FitOptions read_fit_config(std::istream& in, FitOptions base = {},
                           std::string_view source = "<config>");

/// Seed from SCALEFIT_SEED, if set. A malformed value is Error(Parse).
std::optional<std::uint64_t> seed_from_env();

}  // namespace scalefit
