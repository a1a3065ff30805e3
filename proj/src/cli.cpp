#include "longwatch/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "longwatch/csv.hpp"
#include "longwatch/errors.hpp"
#include "longwatch/export.hpp"
#include "longwatch/simulate.hpp"

namespace longwatch::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kTokenEnv = "LONGWATCH_APP_TOKEN";

// ---------------------------------------------------------------------------
// Flag plumbing: options bind to a scratch RunConfig; only flags the user actually
// passed are copied over the resolved config.

class Flags {
public:
    template <typename Access>
    CLI::Option* add(CLI::App* app, const std::string& name, Access access, const std::string& desc) {
        CLI::Option* opt = app->add_option(name, access(parsed_), desc);
        bindings_.push_back({opt, [access](RunConfig& dst, RunConfig& src) { access(dst) = access(src); }});
        return opt;
    }

    template <typename Access>
    CLI::Option* add_flag(CLI::App* app, const std::string& name, Access access, const std::string& desc) {
        CLI::Option* opt = app->add_flag(name, access(parsed_), desc);
        bindings_.push_back({opt, [access](RunConfig& dst, RunConfig& src) { access(dst) = access(src); }});
        return opt;
    }

    void apply(RunConfig& dst) {
        for (auto& b : bindings_) {
            if (b.option->count() > 0) b.copy(dst, parsed_);
        }
    }

private:
    struct Binding {
        CLI::Option* option;
        std::function<void(RunConfig&, RunConfig&)> copy;
    };
    RunConfig parsed_;
    std::vector<Binding> bindings_;
};

#define LW_FIELD(expr) [](RunConfig& c) -> auto& { return c.expr; }

void add_grid_options(CLI::App* app, Flags& f) {
    f.add(app, "--origin-lat", LW_FIELD(grid.origin.lat), "projection origin latitude");
    f.add(app, "--origin-lon", LW_FIELD(grid.origin.lon), "projection origin longitude");
    f.add(app, "--cell-size", LW_FIELD(grid.cell_size_ft), "grid cell size in feet (80)");
    f.add(app, "--displacement", LW_FIELD(grid.displacement_ft), "look-ahead displacement in feet (60)");
    f.add(app, "--region-size", LW_FIELD(grid.region_size_ft), "permit region side in feet (320)");
    f.add(app, "--visibility", LW_FIELD(grid.visibility_radius_ft), "coverage radius in feet (120)");
}

void add_frame_options(CLI::App* app, Flags& f, bool required) {
    auto* opt = f.add(app, "--frames", LW_FIELD(frames), "frame metadata file(s), .jsonl or .csv");
    if (required) opt->required(false);
    f.add(app, "--confidence", LW_FIELD(confidence_threshold), "minimum detector confidence (0.85)");
    f.add(app, "--window-start", LW_FIELD(window_start), "study window start (ISO-8601 UTC)");
    f.add(app, "--window-end", LW_FIELD(window_end), "study window end, exclusive (ISO-8601 UTC)");
    f.add(app, "--workers", LW_FIELD(workers), "worker threads (1)");
}

void add_tagging_options(CLI::App* app, Flags& f) {
    f.add(app, "--window", LW_FIELD(tagging.window), "rolling window length (20)");
    f.add(app, "--threshold", LW_FIELD(tagging.threshold), "positives required in the window (6)");
}

void add_permit_options(CLI::App* app, Flags& f) {
    f.add(app, "--permits", LW_FIELD(permits), "DOB sheds permit CSV");
    f.add(app, "--column-map", LW_FIELD(column_map), "JSON column map for the permit CSV");
    f.add(app, "--as-of", LW_FIELD(as_of), "reference date YYYY-MM-DD for active permits");
}

// ---------------------------------------------------------------------------
// Input/output helpers

void require_set(const std::string& value, const char* flag) {
    if (value.empty()) throw UsageError(std::string(flag) + " is required");
}

void require_file(const std::string& path, const char* what) {
    if (path.empty()) throw UsageError(std::string(what) + " path is required");
    if (!fs::is_regular_file(path)) throw UsageError(std::string(what) + " file not found: " + path);
}

std::string read_file(const std::string& path, const char* what) {
    require_file(path, what);
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError(std::string("cannot read ") + what + " file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path output_dir(const RunConfig& cfg) {
    require_set(cfg.out, "--out");
    std::error_code ec;
    fs::create_directories(cfg.out, ec);
    if (ec || !fs::is_directory(cfg.out)) throw UsageError("cannot create output directory " + cfg.out);
    return fs::path(cfg.out);
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) throw UsageError("cannot write " + path.string());
}

Date as_of_date(const RunConfig& cfg) {
    require_set(cfg.as_of, "--as-of");
    auto d = parse_date(cfg.as_of);
    if (!d) throw UsageError("--as-of must be YYYY-MM-DD, got " + cfg.as_of);
    return *d;
}

std::optional<Timestamp> optional_timestamp(const std::string& text, const char* flag) {
    if (text.empty()) return std::nullopt;
    auto ts = parse_timestamp(text);
    if (!ts) throw UsageError(std::string(flag) + " must be an ISO-8601 UTC timestamp, got " + text);
    return ts;
}

DetectionDataset load_frames(const RunConfig& cfg) {
    if (cfg.frames.empty()) throw UsageError("--frames is required");
    for (const auto& p : cfg.frames) require_file(p, "frames");
    IngestOptions opts;
    opts.confidence_threshold = cfg.confidence_threshold;
    opts.window_start = optional_timestamp(cfg.window_start, "--window-start");
    opts.window_end = optional_timestamp(cfg.window_end, "--window-end");
    opts.bounds = cfg.grid.bounds;
    return parse_frame_files(cfg.frames, std::nullopt, opts, cfg.workers);
}

PermitLoad load_permits(const RunConfig& cfg) {
    require_file(cfg.permits, "permits");
    ColumnMap columns;
    if (!cfg.column_map.empty()) columns = ColumnMap::from_json(read_file(cfg.column_map, "column map"));
    std::ifstream in(cfg.permits, std::ios::binary);
    try {
        return parse_permits(in, columns, cfg.grid.bounds);
    } catch (const DataError& e) {
        throw DataError(cfg.permits + ": " + e.what());
    }
}

std::optional<AreaSet> load_areas(const std::string& path, const std::string& property, const char* what) {
    if (path.empty()) return std::nullopt;
    try {
        return AreaSet::from_geojson(read_file(path, what), property);
    } catch (const DataError& e) {
        throw DataError(path + ": " + e.what());
    }
}

EvaluationConfig evaluation_config(const RunConfig& cfg) {
    EvaluationConfig eval;
    eval.grid = cfg.grid;
    eval.min_coverage_frames = cfg.min_coverage_frames;
    if (cfg.confirmation == "last_window") {
        eval.mode = ConfirmationMode::LastWindow;
    } else if (cfg.confirmation == "any_window") {
        eval.mode = ConfirmationMode::AnyWindow;
    } else {
        throw UsageError("--confirmation must be last_window or any_window");
    }
    return eval;
}

std::string pad(std::string s, std::size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

// ---------------------------------------------------------------------------
// Commands

int cmd_validate(const RunConfig& cfg, std::ostream& out) {
    cfg.grid.validate();
    const DetectionDataset ds = load_frames(cfg);
    std::optional<PermitLoad> permits;
    if (!cfg.permits.empty()) permits = load_permits(cfg);
    const auto boroughs = load_areas(cfg.boroughs, cfg.borough_property, "boroughs");

    nlohmann::ordered_json doc;
    out << "frames: " << ds.frames.size() << " loaded, " << ds.rejected << " rejected, " << ds.demoted
        << " detections demoted below confidence " << format_number(cfg.confidence_threshold) << "\n";
    for (const auto& r : ds.first_rejections) out << "  rejected line " << r.line << ": " << r.reason << "\n";
    doc["frames"] = {{"loaded", ds.frames.size()},
                     {"rejected", ds.rejected},
                     {"demoted", ds.demoted},
                     {"source_digest", ds.source_digest},
                     {"records_digest", ds.records_digest()}};
    if (!ds.frames.empty()) {
        const auto first = format_timestamp(ds.frames.front().captured_at);
        const auto last = format_timestamp(ds.frames.back().captured_at);
        out << "time range: " << first << " .. " << last << "\n";
        doc["frames"]["first"] = first;
        doc["frames"]["last"] = last;
    }
    if (permits) {
        out << "permits: " << permits->permits.size() << " loaded, " << permits->rejected << " rejected, "
            << permits->duplicates << " duplicate rows merged";
        doc["permits"] = {{"loaded", permits->permits.size()},
                          {"rejected", permits->rejected},
                          {"duplicates", permits->duplicates}};
        if (!cfg.as_of.empty()) {
            const auto active = filter_active(permits->permits, as_of_date(cfg));
            out << ", " << active.size() << " active on " << cfg.as_of;
            doc["permits"]["active"] = active.size();
        }
        out << "\n";
        for (const auto& r : permits->first_rejections) out << "  rejected line " << r.line << ": " << r.reason << "\n";
    }

    if (boroughs) {
        std::map<Borough, double> frame_counts;
        for (Borough b : kAllBoroughs) frame_counts[b] = 0;
        std::size_t unassigned = 0;
        for (const auto& f : ds.frames) {
            auto id = boroughs->locate(f.location);
            auto b = id ? parse_borough(*id) : std::nullopt;
            if (b) {
                frame_counts[*b] += 1;
            } else {
                ++unassigned;
            }
        }
        BoroughDistribution frame_dist(frame_counts);
        std::optional<BoroughDistribution> permit_dist;
        if (permits && !permits->permits.empty()) permit_dist = BoroughDistribution::of_permits(permits->permits);
        out << "\nBorough          Frames  Frame share  Permit share\n";
        nlohmann::ordered_json table = nlohmann::ordered_json::object();
        for (Borough b : kAllBoroughs) {
            double share = frame_dist.total() > 0 ? frame_dist.normalized(b) : 0.0;
            out << pad(std::string(to_string(b)), 17) << pad(std::to_string(static_cast<std::size_t>(frame_counts[b])), 8)
                << pad(format_fixed(share, 3), 13) << (permit_dist ? format_fixed(permit_dist->normalized(b), 3) : "-")
                << "\n";
            table[std::string(to_string(b))] = {{"frames", static_cast<std::size_t>(frame_counts[b])}, {"share", share}};
        }
        if (unassigned) out << "(outside all boroughs: " << unassigned << ")\n";
        doc["borough_distribution"] = table;
        if (permit_dist && frame_dist.total() > 0) {
            for (int dir = 0; dir < 2; ++dir) {
                const auto& p = dir == 0 ? *permit_dist : frame_dist;
                const auto& q = dir == 0 ? frame_dist : *permit_dist;
                const char* label = dir == 0 ? "KL(permits || frames)" : "KL(frames || permits)";
                try {
                    double kl = kl_divergence(p, q);
                    out << label << " = " << format_fixed(kl, 6) << "\n";
                    doc[dir == 0 ? "kl_permits_frames" : "kl_frames_permits"] = kl;
                } catch (const UndefinedDivergenceError&) {
                    out << label << " undefined (zero share where the reference is positive)\n";
                }
            }
        }
    }

    // Detections by month with distinct days of coverage.
    struct Month {
        std::size_t detections = 0;
        std::set<std::int32_t> days;
    };
    std::map<std::pair<int, unsigned>, Month> months;
    for (const auto& f : ds.frames) {
        int y;
        unsigned m, d;
        const Date day = date_of(f.captured_at);
        civil_from_date(day, y, m, d);
        auto& row = months[{y, m}];
        row.days.insert(day.days);
        if (f.detected) ++row.detections;
    }
    static const char* kMonthNames[] = {"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                        "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
    out << "\nPeriod     Detections  Days of coverage\n";
    nlohmann::ordered_json monthly = nlohmann::ordered_json::array();
    for (const auto& [ym, row] : months) {
        const std::string period = std::string(kMonthNames[ym.second - 1]) + " " + std::to_string(ym.first);
        out << pad(period, 11) << pad(std::to_string(row.detections), 12) << row.days.size() << "\n";
        monthly.push_back({{"period", period}, {"detections", row.detections}, {"days", row.days.size()}});
    }
    doc["monthly"] = monthly;

    if (!cfg.out.empty()) write_file(output_dir(cfg) / "validate.json", doc.dump(2) + "\n");
    return kOk;
}

int cmd_curate(const RunConfig& cfg, std::ostream& out) {
    cfg.grid.validate();
    cfg.curation.validate();
    const fs::path dir = output_dir(cfg);
    const DetectionDataset ds = load_frames(cfg);
    const auto active = filter_active(load_permits(cfg).permits, as_of_date(cfg));
    const auto boroughs = load_areas(cfg.boroughs, cfg.borough_property, "boroughs");

    const auto matches = near_permit_filter(ds.frames, active, cfg.curation, cfg.grid);
    std::vector<Candidate> candidates;
    candidates.reserve(matches.size());
    for (const auto& m : matches) {
        Borough b = m.permit.borough;
        if (boroughs) {
            if (auto id = boroughs->locate(m.frame.location)) b = parse_borough(*id).value_or(b);
        }
        candidates.push_back({m.frame, b});
    }
    const BoroughDistribution target = BoroughDistribution::of_permits(active);
    const SampleResult sample = stratified_sample(candidates, target, cfg.curate_total, cfg.seed);

    std::map<Borough, double> picked;
    for (Borough b : kAllBoroughs) picked[b] = static_cast<double>(sample.selected.at(b));
    const BoroughDistribution sample_dist(picked);

    nlohmann::ordered_json doc;
    doc["active_permits"] = active.size();
    doc["candidates"] = candidates.size();
    doc["total"] = cfg.curate_total;
    doc["redistributed"] = sample.redistributed;
    nlohmann::ordered_json per = nlohmann::ordered_json::object();
    for (Borough b : kAllBoroughs) {
        per[std::string(to_string(b))] = {{"quota", sample.quotas.at(b)}, {"selected", sample.selected.at(b)}};
    }
    doc["boroughs"] = per;
    auto kl_or_null = [](const BoroughDistribution& p, const BoroughDistribution& q) -> nlohmann::ordered_json {
        try {
            return kl_divergence(p, q);
        } catch (const DataError&) {
            return nullptr;
        }
    };
    doc["kl_permits_sample"] = cfg.curate_total ? kl_or_null(target, sample_dist) : nullptr;
    doc["kl_sample_permits"] = cfg.curate_total ? kl_or_null(sample_dist, target) : nullptr;

    write_file(dir / "selection.csv", selection_csv(sample.frames, matches, candidates));
    write_file(dir / "curation.json", doc.dump(2) + "\n");
    out << "candidates near active permits: " << candidates.size() << "\n"
        << "selected for annotation: " << sample.frames.size() << " (redistributed " << sample.redistributed << ")\n";
    return kOk;
}

int cmd_tag(const RunConfig& cfg, std::ostream& out) {
    cfg.tagging.validate();
    const fs::path dir = output_dir(cfg);
    const DetectionDataset ds = load_frames(cfg);
    const auto verdicts = run_tagging(ds, cfg.grid, cfg.tagging, cfg.workers);
    std::size_t confirmed = 0, last = 0;
    for (const auto& v : verdicts) {
        confirmed += v.confirmed ? 1 : 0;
        last += v.last_window_confirmed ? 1 : 0;
    }
    write_file(dir / "verdicts.csv", verdicts_csv(verdicts));
    write_file(dir / "verdicts.geojson", verdicts_geojson(verdicts, cfg.grid, !cfg.all_cells));
    out << "frames: " << ds.frames.size() << ", cells: " << verdicts.size() << ", confirmed: " << confirmed
        << ", confirmed in final window: " << last << "\n";
    return kOk;
}

int cmd_thresholds(const RunConfig& cfg, std::ostream& out) {
    cfg.base.validate();
    const auto curve = pr_curve(cfg.base, cfg.tagging.window);
    const auto selected = select_threshold(cfg.base, cfg.tagging.window);
    const std::string csv = pr_curve_csv(curve);
    const std::string json = threshold_json(cfg.base, selected);
    out << csv << "\n" << json;
    if (!cfg.out.empty()) {
        const fs::path dir = output_dir(cfg);
        write_file(dir / "pr_curve.csv", csv);
        write_file(dir / "threshold.json", json);
    }
    return kOk;
}

int cmd_evaluate(const RunConfig& cfg, std::ostream& out) {
    cfg.tagging.validate();
    const EvaluationConfig eval = evaluation_config(cfg);
    const fs::path dir = output_dir(cfg);
    const Date as_of = as_of_date(cfg);
    const DetectionDataset ds = load_frames(cfg);
    const auto active = filter_active(load_permits(cfg).permits, as_of);
    const auto boroughs = load_areas(cfg.boroughs, cfg.borough_property, "boroughs");
    const auto areas = load_areas(cfg.areas, cfg.area_property, "areas");

    const auto verdicts = run_tagging(ds, cfg.grid, cfg.tagging, cfg.workers);
    const EvaluationReport report = build_report(verdicts, active, ds.frames, eval, boroughs ? &*boroughs : nullptr);

    write_file(dir / "report.json", report_json(report));
    write_file(dir / "per_borough.csv", per_borough_csv(report));
    write_file(dir / "unpermitted.geojson", clusters_geojson(report, cfg.grid));
    write_file(dir / "verdicts.csv", verdicts_csv(verdicts));
    if (areas) {
        const auto factors = impact_factor(active, *areas, as_of);
        write_file(dir / "impact.geojson", impact_geojson(factors, *areas));
        write_file(dir / "impact.csv", impact_csv(factors));
    }
    out << report_summary(report);
    return kOk;
}

int cmd_fetch(const RunConfig& cfg, std::ostream& out) {
    require_set(cfg.endpoint, "--endpoint");
    const fs::path dir = output_dir(cfg);
    FetchOptions opts;
    opts.endpoint = cfg.endpoint;
    opts.page_size = cfg.page_size;
    if (!cfg.app_token.empty()) opts.app_token = cfg.app_token;
    ColumnMap columns;
    if (!cfg.column_map.empty()) columns = ColumnMap::from_json(read_file(cfg.column_map, "column map"));
    const FetchResult res = fetch_permits(opts, columns, cfg.grid.bounds);
    write_file(dir / "permits.csv", res.csv);
    out << "fetched " << res.load.rows << " rows in " << res.requests << " requests: " << res.load.permits.size()
        << " permits, " << res.load.rejected << " rejected, " << res.load.duplicates << " duplicates\n";
    return kOk;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
    EndToEndParams p;
    p.n_permitted = cfg.sim_permitted;
    p.n_unpermitted = cfg.sim_unpermitted;
    p.passes_per_shed = cfg.sim_passes;
    p.background_frames = cfg.sim_background;
    p.detector.recall = cfg.base.recall;
    p.detector.false_positive_rate = cfg.sim_false_positive_rate;
    p.detector.visibility_ft = cfg.grid.visibility_radius_ft;
    p.tagging = cfg.tagging;
    p.grid = cfg.grid;
    p.seed = cfg.seed;
    p.workers = cfg.workers;
    p.tagging.validate();
    if (p.tagging.window > kMaxWindow) throw UsageError("--window must be <= 64");

    const EndToEndReport r = end_to_end_check(p);
    const std::string json = end_to_end_json(r, p);
    if (!cfg.out.empty()) write_file(output_dir(cfg) / "simulate.json", json);
    out << (r.passed() ? "PASS" : "FAIL") << ": " << r.confirmed_sheds << "/" << r.sheds
        << " sheds confirmed, empirical " << format_fixed(r.empirical, 4) << " vs analytic "
        << format_fixed(r.analytic, 4) << " (delta " << format_fixed(r.delta, 4) << ", 4 sigma "
        << format_fixed(p.sigma_limit * r.std_error, 4) << "); unpermitted clusters " << r.recovered_unpermitted
        << "/" << r.planted_unpermitted << "\n";
    for (const auto& f : r.failures) out << "  " << f << "\n";
    return r.passed() ? kOk : kInternal;
}

int cmd_impact(const RunConfig& cfg, std::ostream& out) {
    const fs::path dir = output_dir(cfg);
    const Date as_of = as_of_date(cfg);
    const auto areas = load_areas(cfg.areas, cfg.area_property, "areas");
    if (!areas) throw UsageError("--areas is required");
    const auto factors = impact_factor(load_permits(cfg).permits, *areas, as_of);
    write_file(dir / "impact.csv", impact_csv(factors));
    write_file(dir / "impact.geojson", impact_geojson(factors, *areas));
    for (const auto& f : factors) out << pad(f.area_id, 24) << f.summed_age_days << "\n";
    return kOk;
}

void print_error(std::ostream& err, const char* kind, const std::string& message) {
    nlohmann::ordered_json e = {{"error", kind}, {"message", message}};
    err << e.dump() << "\n";
}

}  // namespace

void apply_config_json(RunConfig& cfg, const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(std::string("invalid config file: ") + e.what());
    }
    if (!doc.is_object()) throw UsageError("config file must hold a JSON object");
    try {
        auto get = [&](const nlohmann::json& obj, const char* key, auto& dst) {
            if (obj.contains(key)) dst = obj.at(key).get<std::decay_t<decltype(dst)>>();
        };
        if (doc.contains("frames")) {
            const auto& f = doc.at("frames");
            cfg.frames = f.is_array() ? f.get<std::vector<std::string>>() : std::vector<std::string>{f.get<std::string>()};
        }
        get(doc, "permits", cfg.permits);
        get(doc, "boroughs", cfg.boroughs);
        get(doc, "borough_property", cfg.borough_property);
        get(doc, "areas", cfg.areas);
        get(doc, "area_property", cfg.area_property);
        get(doc, "column_map", cfg.column_map);
        get(doc, "out", cfg.out);
        get(doc, "as_of", cfg.as_of);
        get(doc, "window_start", cfg.window_start);
        get(doc, "window_end", cfg.window_end);
        get(doc, "seed", cfg.seed);
        get(doc, "workers", cfg.workers);
        get(doc, "confidence_threshold", cfg.confidence_threshold);
        get(doc, "min_coverage_frames", cfg.min_coverage_frames);
        get(doc, "confirmation", cfg.confirmation);
        get(doc, "curate_total", cfg.curate_total);
        get(doc, "endpoint", cfg.endpoint);
        get(doc, "page_size", cfg.page_size);
        get(doc, "app_token", cfg.app_token);
        get(doc, "recall", cfg.base.recall);
        get(doc, "precision", cfg.base.precision);
        if (doc.contains("grid")) {
            const auto& g = doc.at("grid");
            get(g, "origin_lat", cfg.grid.origin.lat);
            get(g, "origin_lon", cfg.grid.origin.lon);
            get(g, "cell_size_ft", cfg.grid.cell_size_ft);
            get(g, "displacement_ft", cfg.grid.displacement_ft);
            get(g, "region_size_ft", cfg.grid.region_size_ft);
            get(g, "visibility_radius_ft", cfg.grid.visibility_radius_ft);
            if (g.contains("bounds")) {
                const auto& b = g.at("bounds");
                get(b, "min_lat", cfg.grid.bounds.min_lat);
                get(b, "max_lat", cfg.grid.bounds.max_lat);
                get(b, "min_lon", cfg.grid.bounds.min_lon);
                get(b, "max_lon", cfg.grid.bounds.max_lon);
            }
        }
        if (doc.contains("tagging")) {
            get(doc.at("tagging"), "window", cfg.tagging.window);
            get(doc.at("tagging"), "threshold", cfg.tagging.threshold);
        }
        if (doc.contains("curation")) {
            get(doc.at("curation"), "max_distance_m", cfg.curation.max_distance_m);
            get(doc.at("curation"), "angle_tolerance_deg", cfg.curation.angle_tolerance_deg);
        }
        if (doc.contains("simulate")) {
            const auto& s = doc.at("simulate");
            get(s, "permitted", cfg.sim_permitted);
            get(s, "unpermitted", cfg.sim_unpermitted);
            get(s, "passes", cfg.sim_passes);
            get(s, "background", cfg.sim_background);
            get(s, "false_positive_rate", cfg.sim_false_positive_rate);
        }
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(std::string("invalid config value: ") + e.what());
    }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"longwatch: confirm static street objects from longitudinal dashcam detections"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "JSON config file (flags override it)");
    Flags flags;

    auto* validate = app.add_subcommand("validate", "parse inputs and summarize them");
    add_frame_options(validate, flags, true);
    add_permit_options(validate, flags);
    add_grid_options(validate, flags);
    flags.add(validate, "--boroughs", LW_FIELD(boroughs), "borough boundary GeoJSON");
    flags.add(validate, "--borough-property", LW_FIELD(borough_property), "borough id property (borough)");
    flags.add(validate, "--out", LW_FIELD(out), "optional output directory for validate.json");

    auto* curate = app.add_subcommand("curate", "select frames near active permits for annotation");
    add_frame_options(curate, flags, true);
    add_permit_options(curate, flags);
    add_grid_options(curate, flags);
    flags.add(curate, "--boroughs", LW_FIELD(boroughs), "borough boundary GeoJSON");
    flags.add(curate, "--borough-property", LW_FIELD(borough_property), "borough id property (borough)");
    flags.add(curate, "--total", LW_FIELD(curate_total), "frames to select (2214)");
    flags.add(curate, "--max-distance-m", LW_FIELD(curation.max_distance_m), "permit search radius in meters (100)");
    flags.add(curate, "--angle-tolerance", LW_FIELD(curation.angle_tolerance_deg), "heading tolerance in degrees (45)");
    flags.add(curate, "--seed", LW_FIELD(seed), "sampling seed");
    flags.add(curate, "--out", LW_FIELD(out), "output directory");

    auto* tag = app.add_subcommand("tag", "run rolling-window tagging over the grid");
    add_frame_options(tag, flags, true);
    add_tagging_options(tag, flags);
    add_grid_options(tag, flags);
    flags.add_flag(tag, "--all-cells", LW_FIELD(all_cells), "include unconfirmed cells in the GeoJSON");
    flags.add(tag, "--out", LW_FIELD(out), "output directory");

    auto* thresholds = app.add_subcommand("thresholds", "amplified precision/recall per threshold");
    flags.add(thresholds, "--recall", LW_FIELD(base.recall), "base detector recall (0.5676)");
    flags.add(thresholds, "--precision", LW_FIELD(base.precision), "base detector precision (0.9329)");
    flags.add(thresholds, "--window", LW_FIELD(tagging.window), "window length (20)");
    flags.add(thresholds, "--out", LW_FIELD(out), "optional output directory");

    auto* evaluate = app.add_subcommand("evaluate", "match tags to permits and estimate unpermitted sheds");
    add_frame_options(evaluate, flags, true);
    add_permit_options(evaluate, flags);
    add_tagging_options(evaluate, flags);
    add_grid_options(evaluate, flags);
    flags.add(evaluate, "--boroughs", LW_FIELD(boroughs), "borough boundary GeoJSON");
    flags.add(evaluate, "--borough-property", LW_FIELD(borough_property), "borough id property (borough)");
    flags.add(evaluate, "--areas", LW_FIELD(areas), "neighborhood GeoJSON for impact factors");
    flags.add(evaluate, "--area-property", LW_FIELD(area_property), "neighborhood id property (nta2020)");
    flags.add(evaluate, "--min-coverage", LW_FIELD(min_coverage_frames), "frames within radius for scope (20)");
    flags.add(evaluate, "--confirmation", LW_FIELD(confirmation), "last_window or any_window");
    flags.add(evaluate, "--out", LW_FIELD(out), "output directory");

    auto* fetch = app.add_subcommand("fetch-permits", "download permits from an open-data CSV endpoint");
    flags.add(fetch, "--endpoint", LW_FIELD(endpoint), "CSV resource URL");
    flags.add(fetch, "--page-size", LW_FIELD(page_size), "rows per request (50000)");
    flags.add(fetch, "--app-token", LW_FIELD(app_token), "application token (or LONGWATCH_APP_TOKEN)");
    flags.add(fetch, "--column-map", LW_FIELD(column_map), "JSON column map");
    flags.add(fetch, "--out", LW_FIELD(out), "output directory");

    auto* simulate = app.add_subcommand("simulate", "synthetic end-to-end check of tagging vs the binomial model");
    flags.add(simulate, "--sheds", LW_FIELD(sim_permitted), "permitted sheds (500)");
    flags.add(simulate, "--unpermitted", LW_FIELD(sim_unpermitted), "unpermitted sheds (0)");
    flags.add(simulate, "--passes", LW_FIELD(sim_passes), "frames per shed (20)");
    flags.add(simulate, "--background", LW_FIELD(sim_background), "background frames (0)");
    flags.add(simulate, "--recall", LW_FIELD(base.recall), "detector recall (0.5676)");
    flags.add(simulate, "--fp", LW_FIELD(sim_false_positive_rate), "background false-positive rate (0)");
    flags.add(simulate, "--seed", LW_FIELD(seed), "world seed");
    flags.add(simulate, "--workers", LW_FIELD(workers), "worker threads (1)");
    add_tagging_options(simulate, flags);
    flags.add(simulate, "--out", LW_FIELD(out), "optional output directory");

    auto* impact = app.add_subcommand("impact", "summed permit age per neighborhood");
    add_permit_options(impact, flags);
    flags.add(impact, "--areas", LW_FIELD(areas), "neighborhood GeoJSON");
    flags.add(impact, "--area-property", LW_FIELD(area_property), "neighborhood id property (nta2020)");
    flags.add(impact, "--out", LW_FIELD(out), "output directory");

    std::vector<std::string> argv(args.begin() + (args.empty() ? 0 : 1), args.end());
    std::reverse(argv.begin(), argv.end());  // CLI11 consumes a reversed vector
    try {
        app.parse(argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        RunConfig cfg;
        if (const char* token = std::getenv(kTokenEnv)) cfg.app_token = token;
        if (!config_path.empty()) apply_config_json(cfg, read_file(config_path, "config"));
        flags.apply(cfg);

        if (validate->parsed()) return cmd_validate(cfg, out);
        if (curate->parsed()) return cmd_curate(cfg, out);
        if (tag->parsed()) return cmd_tag(cfg, out);
        if (thresholds->parsed()) return cmd_thresholds(cfg, out);
        if (evaluate->parsed()) return cmd_evaluate(cfg, out);
        if (fetch->parsed()) return cmd_fetch(cfg, out);
        if (simulate->parsed()) return cmd_simulate(cfg, out);
        if (impact->parsed()) return cmd_impact(cfg, out);
        return kUsage;
    } catch (const UsageError& e) {
        print_error(err, "usage", e.what());
        return kUsage;
    } catch (const DataError& e) {
        print_error(err, "data", e.what());
        return kData;
    } catch (const InvariantError& e) {
        print_error(err, "invariant", e.what());
        return kInternal;
    } catch (const std::exception& e) {
        print_error(err, "internal", e.what());
        return kInternal;
    }
}

}  // namespace longwatch::cli
