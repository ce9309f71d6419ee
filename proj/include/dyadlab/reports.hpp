#pragma once

// JSON forms of the library's report structs.  Keys are emitted in sorted
// order and doubles in shortest round-trip form, so equal reports dump to
// equal bytes.

#include <json.hpp>

#include "dyadlab/additive.hpp"
#include "dyadlab/planar.hpp"
#include "dyadlab/scan.hpp"
#include "dyadlab/scenery.hpp"
#include "dyadlab/transversality.hpp"

namespace dyadlab {

nlohmann::json report_json(const EntropyProfile& p);
nlohmann::json report_json(const DipReport& r);
nlohmann::json report_json(const TransversalityReport& r);
nlohmann::json report_json(const AssouadEstimate& a);
nlohmann::json report_json(const UniformEntropyResult& r);
nlohmann::json report_json(const SpreadingReport& r, bool with_points = false);
nlohmann::json report_json(const HypothesisFlags& h);
nlohmann::json report_json(const GrowthReport& g);
nlohmann::json report_json(const ExperimentReport& r);
nlohmann::json report_json(const AdversarialReport& r);
nlohmann::json report_json(const BsgBridge& b);
nlohmann::json report_json(const RegularizationResult& r, const RegularizationCheck& c);
nlohmann::json report_json(const PorosityResult& r);

/// dump(2) plus a trailing newline.
std::string dump_report(const nlohmann::json& j);

}  // namespace dyadlab
