#include "longwatch/export.hpp"

#include <unordered_map>

#include <json.hpp>

#include "longwatch/csv.hpp"

namespace longwatch {

namespace {

using ojson = nlohmann::ordered_json;

ojson position(GeoPoint p) { return ojson::array({p.lon, p.lat}); }

ojson cell_polygon(GridCell c, const GridConfig& cfg) {
    const PlanePoint o = cell_origin(c, cfg);
    const double s = cfg.cell_size_ft;
    ojson ring = ojson::array();
    for (PlanePoint corner : {o, PlanePoint{o.x + s, o.y}, PlanePoint{o.x + s, o.y + s}, PlanePoint{o.x, o.y + s}, o}) {
        ring.push_back(position(unproject(corner, cfg)));
    }
    return {{"type", "Polygon"}, {"coordinates", ojson::array({ring})}};
}

ojson area_geometry(const Area& area) {
    ojson polys = ojson::array();
    for (const auto& poly : area.parts) {
        ojson rings = ojson::array();
        for (const auto& ring : poly.rings) {
            ojson r = ojson::array();
            for (const auto& p : ring) r.push_back(position(p));
            r.push_back(position(ring.front()));
            rings.push_back(std::move(r));
        }
        polys.push_back(std::move(rings));
    }
    if (polys.size() == 1) return {{"type", "Polygon"}, {"coordinates", polys[0]}};
    return {{"type", "MultiPolygon"}, {"coordinates", polys}};
}

ojson collection(ojson features) { return {{"type", "FeatureCollection"}, {"features", std::move(features)}}; }

ojson counts_json(const ReportCounts& c) {
    return {{"tagged_total", c.tagged_total},
            {"confirmed_permitted", c.confirmed_permitted},
            {"unpermitted_clusters", c.unpermitted_clusters},
            {"out_of_scope_permits", c.out_of_scope_permits},
            {"missed_permits", c.missed_permits}};
}

std::string percent(std::size_t part, std::size_t whole) {
    return whole == 0 ? "n/a" : format_fixed(100.0 * static_cast<double>(part) / static_cast<double>(whole), 1) + "%";
}

}  // namespace

std::string verdicts_csv(const std::vector<CellVerdict>& verdicts) {
    std::string out =
        "ix,iy,confirmed,last_window_confirmed,insufficient_coverage,first_confirmed_at,observation_count,"
        "positive_count\n";
    for (const auto& v : verdicts) {
        out += csv_line({std::to_string(v.cell.ix), std::to_string(v.cell.iy), v.confirmed ? "true" : "false",
                         v.last_window_confirmed ? "true" : "false", v.insufficient_coverage ? "true" : "false",
                         v.first_confirmed_at ? format_timestamp(*v.first_confirmed_at) : "",
                         std::to_string(v.observation_count), std::to_string(v.positive_count)}) +
               "\n";
    }
    return out;
}

std::string verdicts_geojson(const std::vector<CellVerdict>& verdicts, const GridConfig& cfg, bool confirmed_only) {
    ojson features = ojson::array();
    for (const auto& v : verdicts) {
        if (confirmed_only && !v.confirmed) continue;
        features.push_back({{"type", "Feature"},
                            {"geometry", cell_polygon(v.cell, cfg)},
                            {"properties",
                             {{"ix", v.cell.ix},
                              {"iy", v.cell.iy},
                              {"confirmed", v.confirmed},
                              {"last_window_confirmed", v.last_window_confirmed},
                              {"insufficient_coverage", v.insufficient_coverage},
                              {"first_confirmed_at",
                               v.first_confirmed_at ? ojson(format_timestamp(*v.first_confirmed_at)) : ojson(nullptr)},
                              {"observation_count", v.observation_count},
                              {"positive_count", v.positive_count}}}});
    }
    return collection(std::move(features)).dump(1) + "\n";
}

std::string pr_curve_csv(const std::vector<AmplifiedMetrics>& curve) {
    std::string out = "threshold,recall,precision\n";
    for (const auto& m : curve) {
        out += std::to_string(m.threshold) + "," + format_fixed(m.recall, 6) + "," + format_fixed(m.precision, 6) + "\n";
    }
    return out;
}

std::string threshold_json(const BaseMetrics& base, const AmplifiedMetrics& selected) {
    ojson doc = {{"base_recall", base.recall},
                 {"base_precision", base.precision},
                 {"window", selected.window},
                 {"selected_threshold", selected.threshold},
                 {"recall", selected.recall},
                 {"precision", selected.precision},
                 {"f1", selected.f1()},
                 {"rule", "max harmonic mean, ties to larger threshold"}};
    return doc.dump(2) + "\n";
}

std::string report_json(const EvaluationReport& report) {
    ojson boroughs = ojson::object();
    for (const auto& [name, c] : report.per_borough) boroughs[name] = counts_json(c);
    ojson doc = counts_json(report.counts);
    doc["total_permits"] = report.total_permits;
    doc["in_scope_permits"] = report.in_scope_permits();
    doc["confirmed_out_of_scope"] = report.confirmed_out_of_scope;
    doc["per_borough"] = std::move(boroughs);
    doc["confirmed_permit_ids"] = report.confirmed_permit_ids;
    doc["missed_permit_ids"] = report.missed_permit_ids;
    return doc.dump(2) + "\n";
}

std::string per_borough_csv(const EvaluationReport& report) {
    std::string out = "borough,tagged_total,confirmed_permitted,unpermitted_clusters,out_of_scope_permits,missed_permits\n";
    auto row = [&](const std::string& name, const ReportCounts& c) {
        out += csv_line({name, std::to_string(c.tagged_total), std::to_string(c.confirmed_permitted),
                         std::to_string(c.unpermitted_clusters), std::to_string(c.out_of_scope_permits),
                         std::to_string(c.missed_permits)}) +
               "\n";
    };
    for (const auto& [name, c] : report.per_borough) row(name, c);
    row("Total", report.counts);
    return out;
}

std::string clusters_geojson(const EvaluationReport& report, const GridConfig& cfg) {
    ojson features = ojson::array();
    for (std::size_t i = 0; i < report.clusters.size(); ++i) {
        const auto& cl = report.clusters[i];
        ojson cells = ojson::array();
        for (const auto& c : cl.cells) cells.push_back(ojson::array({c.ix, c.iy}));
        features.push_back({{"type", "Feature"},
                            {"geometry", {{"type", "Point"}, {"coordinates", position(unproject(cl.centroid, cfg))}}},
                            {"properties",
                             {{"cluster", i},
                              {"borough", i < report.cluster_boroughs.size() ? report.cluster_boroughs[i] : ""},
                              {"cell_count", cl.cells.size()},
                              {"cells", std::move(cells)}}}});
    }
    return collection(std::move(features)).dump(1) + "\n";
}

std::string report_summary(const EvaluationReport& r) {
    const auto& c = r.counts;
    std::string s;
    s += "Known sheds:            " + std::to_string(r.total_permits) + "\n";
    s += "Out of scope (coverage): " + std::to_string(c.out_of_scope_permits) + " (" +
         percent(c.out_of_scope_permits, r.total_permits) + ")\n";
    s += "Confirmed permitted:    " + std::to_string(c.confirmed_permitted) + " (" +
         percent(c.confirmed_permitted, r.total_permits) + ")\n";
    s += "Missed:                 " + std::to_string(c.missed_permits) + " (" +
         percent(c.missed_permits, r.total_permits) + ")\n";
    s += "Unpermitted (clusters): " + std::to_string(c.unpermitted_clusters) + " (" +
         percent(c.unpermitted_clusters, c.tagged_total) + " of tagged)\n";
    s += "Tagged total:           " + std::to_string(c.tagged_total) + "\n";
    if (r.confirmed_out_of_scope) {
        s += "Tagged but below the coverage ceiling: " + std::to_string(r.confirmed_out_of_scope) + "\n";
    }
    return s;
}

std::string impact_csv(const std::vector<ImpactFactor>& factors) {
    std::string out = "area_id,summed_age_days,permits\n";
    for (const auto& f : factors) {
        out += csv_line({f.area_id, std::to_string(f.summed_age_days), std::to_string(f.permits)}) + "\n";
    }
    return out;
}

std::string impact_geojson(const std::vector<ImpactFactor>& factors, const AreaSet& areas) {
    std::unordered_map<std::string, const Area*> by_id;
    for (const auto& a : areas.areas()) by_id[a.id] = &a;
    ojson features = ojson::array();
    for (const auto& f : factors) {
        auto it = by_id.find(f.area_id);
        features.push_back({{"type", "Feature"},
                            {"geometry", it == by_id.end() ? ojson(nullptr) : area_geometry(*it->second)},
                            {"properties",
                             {{"area_id", f.area_id}, {"summed_age_days", f.summed_age_days}, {"permits", f.permits}}}});
    }
    return collection(std::move(features)).dump(1) + "\n";
}

std::string selection_csv(const std::vector<FrameRecord>& frames, const std::vector<PermitMatch>& matches,
                          const std::vector<Candidate>& candidates) {
    std::unordered_map<std::string, const PermitMatch*> match_of;
    for (const auto& m : matches) match_of[m.frame.frame_id] = &m;
    std::unordered_map<std::string, Borough> borough_of;
    for (const auto& c : candidates) borough_of[c.frame.frame_id] = c.borough;

    std::string out = "frame_id,captured_at,borough,permit_id,distance_m,bearing_gap_deg\n";
    for (const auto& f : frames) {
        const PermitMatch* m = match_of.count(f.frame_id) ? match_of[f.frame_id] : nullptr;
        out += csv_line({f.frame_id, format_timestamp(f.captured_at),
                         borough_of.count(f.frame_id) ? std::string(to_string(borough_of[f.frame_id])) : "",
                         m ? m->permit.permit_id : "", m ? format_fixed(m->distance_m, 3) : "",
                         m ? format_fixed(m->bearing_gap_deg, 3) : ""}) +
               "\n";
    }
    return out;
}

std::string end_to_end_json(const EndToEndReport& r, const EndToEndParams& p) {
    ojson failures = ojson::array();
    for (const auto& f : r.failures) failures.push_back(f);
    ojson doc = {{"verdict", r.passed() ? "PASS" : "FAIL"},
                 {"params",
                  {{"permitted_sheds", p.n_permitted},
                   {"unpermitted_sheds", p.n_unpermitted},
                   {"passes_per_shed", p.passes_per_shed},
                   {"background_frames", p.background_frames},
                   {"recall", p.detector.recall},
                   {"false_positive_rate", p.detector.false_positive_rate},
                   {"window", p.tagging.window},
                   {"threshold", p.tagging.threshold},
                   {"seed", p.seed}}},
                 {"sheds", r.sheds},
                 {"confirmed_sheds", r.confirmed_sheds},
                 {"empirical_recall", r.empirical},
                 {"analytic_recall", r.analytic},
                 {"std_error", r.std_error},
                 {"delta", r.delta},
                 {"sigma_limit", p.sigma_limit},
                 {"recall_ok", r.recall_ok},
                 {"identities_ok", r.identities_ok},
                 {"planted_unpermitted", r.planted_unpermitted},
                 {"recovered_unpermitted", r.recovered_unpermitted},
                 {"unpermitted_ok", r.unpermitted_ok},
                 {"frames", r.frames},
                 {"rejected_records", r.rejected_frames},
                 {"evaluation", counts_json(r.evaluation.counts)},
                 {"failures", std::move(failures)}};
    return doc.dump(2) + "\n";
}

}  // namespace longwatch
