#ifndef LONGWATCH_EXPORT_HPP
#define LONGWATCH_EXPORT_HPP

#include <string>
#include <vector>

#include "longwatch/amplify.hpp"
#include "longwatch/areas.hpp"
#include "longwatch/curation.hpp"
#include "longwatch/evaluate.hpp"
#include "longwatch/simulate.hpp"
#include "longwatch/tagging.hpp"

// Text renderers for every artifact the CLI writes. All output is deterministic for a given
// input: keys keep insertion order and doubles print in shortest round-trip form.
namespace longwatch {

std::string verdicts_csv(const std::vector<CellVerdict>& verdicts);

/// FeatureCollection of cell polygons; `confirmed_only` drops cells that never confirmed.
std::string verdicts_geojson(const std::vector<CellVerdict>& verdicts, const GridConfig& cfg, bool confirmed_only);

std::string pr_curve_csv(const std::vector<AmplifiedMetrics>& curve);
std::string threshold_json(const BaseMetrics& base, const AmplifiedMetrics& selected);

std::string report_json(const EvaluationReport& report);
std::string per_borough_csv(const EvaluationReport& report);
std::string clusters_geojson(const EvaluationReport& report, const GridConfig& cfg);

/// Operator summary: tagged, out of scope, unpermitted, and missed with percentages.
std::string report_summary(const EvaluationReport& report);

std::string impact_csv(const std::vector<ImpactFactor>& factors);
std::string impact_geojson(const std::vector<ImpactFactor>& factors, const AreaSet& areas);

std::string selection_csv(const std::vector<FrameRecord>& frames, const std::vector<PermitMatch>& matches,
                          const std::vector<Candidate>& candidates);

std::string end_to_end_json(const EndToEndReport& report, const EndToEndParams& params);

}  // namespace longwatch

#endif  // LONGWATCH_EXPORT_HPP
