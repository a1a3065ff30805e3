#ifndef LONGWATCH_CLI_HPP
#define LONGWATCH_CLI_HPP

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "longwatch/amplify.hpp"
#include "longwatch/curation.hpp"
#include "longwatch/evaluate.hpp"
#include "longwatch/geo.hpp"
#include "longwatch/ingest.hpp"
#include "longwatch/tagging.hpp"

namespace longwatch::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kInternal = 3 };

/// Everything a command may need. Resolved as flags > config file > environment > defaults.
struct RunConfig {
    std::vector<std::string> frames;
    std::string permits;
    std::string boroughs;
    std::string borough_property = "borough";
    std::string areas;
    std::string area_property = "nta2020";
    std::string column_map;
    std::string out;
    std::string as_of;
    std::string window_start;
    std::string window_end;
    std::uint64_t seed = 0;
    unsigned workers = 1;

    GridConfig grid;
    TaggingParams tagging;
    CurationConfig curation;
    double confidence_threshold = 0.85;
    BaseMetrics base;
    std::size_t min_coverage_frames = 20;
    std::string confirmation = "last_window";
    std::size_t curate_total = 2214;
    bool all_cells = false;

    std::string endpoint;  // open-data CSV resource URL
    std::size_t page_size = 50'000;
    std::string app_token;

    std::size_t sim_permitted = 500;
    std::size_t sim_unpermitted = 0;
    std::size_t sim_passes = 20;
    std::size_t sim_background = 0;
    double sim_false_positive_rate = 0.0;
};

/// Overlays keys from a JSON config document onto `cfg`. Throws UsageError on bad JSON.
void apply_config_json(RunConfig& cfg, const std::string& text);

/// Runs one invocation; args[0] is the program name. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace longwatch::cli

#endif  // LONGWATCH_CLI_HPP
