#pragma once

// JSON encodings of the domain types, as embedded in report documents.
// Field order is fixed so that documents compare byte-for-byte.

#include "json.hpp"
#include "scalefit/analysis.hpp"
#include "scalefit/catalog.hpp"
#include "scalefit/frontier.hpp"
#include "scalefit/infotheory.hpp"
#include "scalefit/powerfit.hpp"

namespace scalefit {

using Json = nlohmann::ordered_json;

Json to_json(const ScalingLaw& law);
Json to_json(const PurePowerLaw& law);
Json to_json(const FitReport& fit);
Json to_json(const FitOptions& opts);
Json to_json(const Frontier& frontier);
Json to_json(const Intersection& point);
Json to_json(const ConsistencyReport& report);
Json to_json(const Decomposition& d);
Json to_json(const MIEstimate& e);
Json to_json(const LogMIFit& fit);
Json to_json(const ContextModel& model);
Json to_json(const ScanOptimum& s);
Json to_json(const PublishedCheck& c);
Json to_json(const catalog::PerExampleCrossCheck& c);

/// Accepts a bare law object ({"irreducible", "scale", "exponent", ...}) or
/// a report document whose results hold one under `key` (e.g. "law").
/// Throws Error(Parse) when neither shape matches.
ScalingLaw law_from_json(const Json& j, std::string_view key = "law");
/// Same for pure power laws ({"coefficient", "exponent", ...}).
PurePowerLaw power_from_json(const Json& j, std::string_view key = "nopt");

}  // namespace scalefit
