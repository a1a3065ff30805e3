#include "longwatch/ingest.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <map>
#include <streambuf>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "longwatch/csv.hpp"
#include "longwatch/errors.hpp"

namespace longwatch {

namespace {

constexpr std::size_t kMaxListedRejections = 10;

/// Input filter that hashes every byte it hands to the reader.
class HashingBuf : public std::streambuf {
public:
    explicit HashingBuf(std::streambuf* source) : source_(source) {}
    const Fnv1a& hash() const noexcept { return hash_; }

protected:
    int_type underflow() override {
        if (gptr() < egptr()) return traits_type::to_int_type(*gptr());
        std::streamsize n = source_->sgetn(buffer_.data(), static_cast<std::streamsize>(buffer_.size()));
        if (n <= 0) return traits_type::eof();
        hash_.update(std::string_view(buffer_.data(), static_cast<std::size_t>(n)));
        setg(buffer_.data(), buffer_.data(), buffer_.data() + n);
        return traits_type::to_int_type(*gptr());
    }

private:
    std::streambuf* source_;
    Fnv1a hash_;
    std::array<char, 1 << 16> buffer_{};
};

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::string lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::optional<double> parse_double(std::string_view text) {
    std::string t = trim(text);
    if (t.empty()) return std::nullopt;
    const char* first = t.data();
    if (*first == '+') ++first;
    double v = 0.0;
    auto res = std::from_chars(first, t.data() + t.size(), v);
    if (res.ec != std::errc{} || res.ptr != t.data() + t.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

std::optional<bool> parse_flag(std::string_view text) {
    std::string t = lower(trim(text));
    if (t == "true" || t == "1" || t == "y" || t == "yes") return true;
    if (t == "false" || t == "0" || t == "n" || t == "no") return false;
    return std::nullopt;
}

/// Field values extracted from one record before validation.
struct RawFrame {
    std::string frame_id;
    std::string captured_at;
    double lat = 0, lon = 0, heading = 0;
    bool detected = false;
    std::optional<double> confidence;
};

/// Validates and normalizes; returns the rejection reason on failure.
std::optional<std::string> finalize(const RawFrame& raw, const IngestOptions& opts, FrameRecord& out,
                                    bool& demoted) {
    if (raw.frame_id.empty()) return "empty frame_id";
    auto ts = parse_timestamp(raw.captured_at);
    if (!ts) return "unparseable captured_at \"" + raw.captured_at + "\"";
    if ((opts.window_start && *ts < *opts.window_start) || (opts.window_end && *ts >= *opts.window_end)) {
        return "captured_at outside the study window";
    }
    GeoPoint loc{raw.lat, raw.lon};
    if (!is_valid(loc) || !opts.bounds.contains(loc)) return "location outside the bounding box";
    if (!std::isfinite(raw.heading)) return "non-finite heading";
    if (raw.confidence && !(*raw.confidence >= 0.0 && *raw.confidence <= 1.0)) {
        return "confidence outside [0, 1]";
    }
    if (raw.detected && !raw.confidence) return "detection without confidence";

    out.frame_id = raw.frame_id;
    out.captured_at = *ts;
    out.location = loc;
    out.heading = Heading(raw.heading);
    out.detected = raw.detected;
    out.confidence = raw.detected ? raw.confidence : std::nullopt;
    demoted = false;
    if (out.detected && *out.confidence < opts.confidence_threshold) {
        out.detected = false;
        out.confidence.reset();
        demoted = true;
    }
    return std::nullopt;
}

std::optional<std::string> raw_from_json(std::string_view line, RawFrame& raw) {
    nlohmann::json obj;
    try {
        obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
        return "invalid JSON";
    }
    if (!obj.is_object()) return "record is not a JSON object";
    auto number = [&](const char* key, double& dst) -> std::optional<std::string> {
        auto it = obj.find(key);
        if (it == obj.end() || !it->is_number()) return std::string("missing or non-numeric ") + key;
        dst = it->get<double>();
        return std::nullopt;
    };
    auto id = obj.find("frame_id");
    if (id == obj.end() || !(id->is_string() || id->is_number_integer())) return "missing frame_id";
    raw.frame_id = id->is_string() ? id->get<std::string>() : id->dump();
    auto ts = obj.find("captured_at");
    if (ts == obj.end() || !ts->is_string()) return "missing captured_at";
    raw.captured_at = ts->get<std::string>();
    if (auto e = number("lat", raw.lat)) return e;
    if (auto e = number("lon", raw.lon)) return e;
    if (auto e = number("heading_deg", raw.heading)) return e;
    auto det = obj.find("detected");
    if (det == obj.end() || !det->is_boolean()) return "missing or non-boolean detected";
    raw.detected = det->get<bool>();
    auto conf = obj.find("confidence");
    if (conf != obj.end() && !conf->is_null()) {
        if (!conf->is_number()) return "non-numeric confidence";
        raw.confidence = conf->get<double>();
    }
    return std::nullopt;
}

constexpr std::array<const char*, 7> kFrameColumns{"frame_id", "captured_at", "lat",       "lon",
                                                   "heading_deg", "detected", "confidence"};

std::optional<std::string> raw_from_csv(const std::vector<std::string>& fields,
                                        const std::array<std::size_t, 7>& idx, RawFrame& raw) {
    auto at = [&](std::size_t k) -> std::string_view {
        return idx[k] < fields.size() ? std::string_view(fields[idx[k]]) : std::string_view();
    };
    raw.frame_id = trim(at(0));
    raw.captured_at = trim(at(1));
    auto lat = parse_double(at(2)), lon = parse_double(at(3)), hd = parse_double(at(4));
    if (!lat || !lon) return "unparseable lat/lon";
    if (!hd) return "unparseable heading_deg";
    raw.lat = *lat;
    raw.lon = *lon;
    raw.heading = *hd;
    auto det = parse_flag(at(5));
    if (!det) return "unparseable detected";
    raw.detected = *det;
    if (idx[6] != SIZE_MAX && !trim(at(6)).empty()) {
        auto c = parse_double(at(6));
        if (!c) return "unparseable confidence";
        raw.confidence = *c;
    }
    return std::nullopt;
}

void sort_and_check(DetectionDataset& ds) {
    std::sort(ds.frames.begin(), ds.frames.end(), chronological);
    std::unordered_set<std::string_view> seen;
    seen.reserve(ds.frames.size());
    for (const auto& f : ds.frames) {
        if (!seen.insert(f.frame_id).second) throw DataError("duplicate frame_id \"" + f.frame_id + "\"");
    }
}

void enforce_reject_budget(const DetectionDataset& ds, const IngestOptions& opts) {
    if (static_cast<double>(ds.rejected) <= opts.max_malformed_fraction * static_cast<double>(ds.records_seen)) {
        return;
    }
    std::string msg = std::to_string(ds.rejected) + " of " + std::to_string(ds.records_seen) +
                      " frame records are malformed; first offenders:";
    for (const auto& r : ds.first_rejections) msg += "\n  line " + std::to_string(r.line) + ": " + r.reason;
    throw DataError(msg);
}

}  // namespace

void Fnv1a::update(std::string_view bytes) noexcept {
    for (unsigned char c : bytes) {
        state_ ^= c;
        state_ *= 0x100000001b3ULL;
    }
}

std::string Fnv1a::hex() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(state_));
    return buf;
}

bool chronological(const FrameRecord& a, const FrameRecord& b) noexcept {
    if (a.captured_at != b.captured_at) return a.captured_at < b.captured_at;
    return a.frame_id < b.frame_id;
}

std::string DetectionDataset::records_digest() const {
    Fnv1a h;
    for (const auto& f : frames) {
        std::string row = f.frame_id + '\t' + std::to_string(f.captured_at.millis) + '\t' +
                          format_number(f.location.lat) + '\t' + format_number(f.location.lon) + '\t' +
                          format_number(f.heading.degrees()) + '\t' + (f.detected ? "1" : "0") + '\t' +
                          (f.confidence ? format_number(*f.confidence) : "") + '\n';
        h.update(row);
    }
    return h.hex();
}

DetectionDataset parse_frames(std::istream& in, FrameFormat format, const IngestOptions& opts) {
    HashingBuf buf(in.rdbuf());
    std::istream src(&buf);
    DetectionDataset ds;

    auto reject = [&](std::size_t line, std::string reason) {
        ++ds.rejected;
        if (ds.first_rejections.size() < kMaxListedRejections) ds.first_rejections.push_back({line, std::move(reason)});
    };
    auto accept = [&](std::size_t line, const RawFrame& raw) {
        FrameRecord rec;
        bool demoted = false;
        if (auto why = finalize(raw, opts, rec, demoted)) {
            reject(line, *why);
            return;
        }
        if (demoted) ++ds.demoted;
        ds.frames.push_back(std::move(rec));
    };

    if (format == FrameFormat::Jsonl) {
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(src, line)) {
            ++lineno;
            if (trim(line).empty()) continue;
            ++ds.records_seen;
            RawFrame raw;
            if (auto why = raw_from_json(line, raw)) {
                reject(lineno, *why);
                continue;
            }
            accept(lineno, raw);
        }
    } else {
        CsvReader reader(src);
        std::vector<std::string> fields;
        if (reader.next(fields)) {
            std::array<std::size_t, 7> idx;
            idx.fill(SIZE_MAX);
            for (std::size_t i = 0; i < fields.size(); ++i) {
                std::string name = trim(fields[i]);
                if (i == 0 && name.rfind("\xEF\xBB\xBF", 0) == 0) name.erase(0, 3);
                for (std::size_t k = 0; k < kFrameColumns.size(); ++k) {
                    if (name == kFrameColumns[k]) idx[k] = i;
                }
            }
            std::string missing;
            for (std::size_t k = 0; k < 6; ++k) {
                if (idx[k] == SIZE_MAX) missing += (missing.empty() ? "" : ", ") + std::string(kFrameColumns[k]);
            }
            if (!missing.empty()) throw DataError("frame CSV is missing required columns: " + missing);
            while (reader.next(fields)) {
                if (fields.size() == 1 && trim(fields[0]).empty()) continue;
                ++ds.records_seen;
                RawFrame raw;
                if (auto why = raw_from_csv(fields, idx, raw)) {
                    reject(reader.line(), *why);
                    continue;
                }
                accept(reader.line(), raw);
            }
        }
    }
    ds.source_digest = buf.hash().hex();
    enforce_reject_budget(ds, opts);
    sort_and_check(ds);
    return ds;
}

FrameFormat frame_format_for(std::string_view path) {
    std::string p = lower(path);
    return p.size() >= 4 && p.compare(p.size() - 4, 4, ".csv") == 0 ? FrameFormat::Csv : FrameFormat::Jsonl;
}

DetectionDataset parse_frame_files(const std::vector<std::string>& paths, std::optional<FrameFormat> format,
                                   const IngestOptions& opts, unsigned workers) {
    auto load = [&](const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw UsageError("cannot open frames file " + path);
        try {
            return parse_frames(in, format.value_or(frame_format_for(path)), opts);
        } catch (const DataError& e) {
            throw DataError(path + ": " + e.what());
        }
    };
    std::vector<DetectionDataset> parts(paths.size());
    if (workers <= 1 || paths.size() <= 1) {
        for (std::size_t i = 0; i < paths.size(); ++i) parts[i] = load(paths[i]);
    } else {
        for (std::size_t begin = 0; begin < paths.size(); begin += workers) {
            std::vector<std::future<DetectionDataset>> batch;
            std::size_t end = std::min<std::size_t>(paths.size(), begin + workers);
            for (std::size_t i = begin; i < end; ++i) batch.push_back(std::async(std::launch::async, load, paths[i]));
            for (std::size_t i = begin; i < end; ++i) parts[i] = batch[i - begin].get();
        }
    }

    DetectionDataset merged;
    Fnv1a digest;
    for (auto& part : parts) {
        digest.update(part.source_digest);
        merged.records_seen += part.records_seen;
        merged.rejected += part.rejected;
        merged.demoted += part.demoted;
        for (auto& r : part.first_rejections) {
            if (merged.first_rejections.size() < kMaxListedRejections) merged.first_rejections.push_back(r);
        }
        merged.frames.insert(merged.frames.end(), std::make_move_iterator(part.frames.begin()),
                             std::make_move_iterator(part.frames.end()));
    }
    merged.source_digest = paths.size() == 1 ? parts[0].source_digest : digest.hex();
    sort_and_check(merged);
    return merged;
}

std::string frame_to_jsonl(const FrameRecord& f) {
    nlohmann::ordered_json obj;
    obj["frame_id"] = f.frame_id;
    obj["captured_at"] = format_timestamp(f.captured_at);
    obj["lat"] = f.location.lat;
    obj["lon"] = f.location.lon;
    obj["heading_deg"] = f.heading.degrees();
    obj["detected"] = f.detected;
    obj["confidence"] = f.confidence ? nlohmann::ordered_json(*f.confidence) : nlohmann::ordered_json(nullptr);
    return obj.dump();
}

ColumnMap ColumnMap::from_json(std::string_view text) {
    ColumnMap map;
    try {
        auto doc = nlohmann::json::parse(text);
        if (!doc.is_object()) throw UsageError("column map must be a JSON object");
        auto read = [&](const char* key, std::string& dst) {
            if (doc.contains(key)) dst = doc.at(key).get<std::string>();
        };
        read("permit_id", map.permit_id);
        read("lat", map.lat);
        read("lon", map.lon);
        read("issued_on", map.issued_on);
        read("expires_on", map.expires_on);
        read("borough", map.borough);
        read("renewed", map.renewed);
        read("type_column", map.type_column);
        if (doc.contains("include_types")) map.include_types = doc.at("include_types").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(std::string("invalid column map: ") + e.what());
    }
    return map;
}

PermitLoad parse_permits(std::istream& in, const ColumnMap& columns, const BoundingBox& bounds) {
    PermitLoad load;
    CsvReader reader(in);
    std::vector<std::string> fields;
    if (!reader.next(fields)) {
        throw DataError("permit CSV is empty (no header row)");
    }
    std::unordered_map<std::string, std::size_t> header;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        std::string name = trim(fields[i]);
        if (i == 0 && name.rfind("\xEF\xBB\xBF", 0) == 0) name.erase(0, 3);
        header.emplace(name, i);
    }
    auto column = [&](const std::string& name) -> std::size_t {
        auto it = header.find(name);
        return it == header.end() ? SIZE_MAX : it->second;
    };
    const std::array<const std::string*, 6> required{&columns.permit_id, &columns.lat,        &columns.lon,
                                                     &columns.issued_on, &columns.expires_on, &columns.borough};
    std::string missing;
    for (const auto* name : required) {
        if (column(*name) == SIZE_MAX) missing += (missing.empty() ? "\"" : ", \"") + *name + "\"";
    }
    const bool filter_types = !columns.type_column.empty() && !columns.include_types.empty();
    if (filter_types && column(columns.type_column) == SIZE_MAX) {
        missing += (missing.empty() ? "\"" : ", \"") + columns.type_column + "\"";
    }
    if (!missing.empty()) throw DataError("permit CSV is missing required columns: " + missing);

    const std::size_t c_id = column(columns.permit_id), c_lat = column(columns.lat), c_lon = column(columns.lon),
                      c_iss = column(columns.issued_on), c_exp = column(columns.expires_on),
                      c_boro = column(columns.borough), c_ren = column(columns.renewed),
                      c_type = filter_types ? column(columns.type_column) : SIZE_MAX;
    std::vector<std::string> include;
    for (const auto& t : columns.include_types) include.push_back(lower(trim(t)));

    auto reject = [&](std::size_t line, std::string reason) {
        ++load.rejected;
        if (load.first_rejections.size() < kMaxListedRejections) load.first_rejections.push_back({line, std::move(reason)});
    };

    std::map<std::string, PermitRecord> by_id;
    while (reader.next(fields)) {
        if (fields.size() == 1 && trim(fields[0]).empty()) continue;
        ++load.rows;
        auto at = [&](std::size_t c) -> std::string_view {
            return c < fields.size() ? std::string_view(fields[c]) : std::string_view();
        };
        if (c_type != SIZE_MAX &&
            std::find(include.begin(), include.end(), lower(trim(at(c_type)))) == include.end()) {
            ++load.excluded_by_type;
            continue;
        }
        PermitRecord rec;
        rec.permit_id = trim(at(c_id));
        if (rec.permit_id.empty()) {
            reject(reader.line(), "empty permit id");
            continue;
        }
        auto lat = parse_double(at(c_lat)), lon = parse_double(at(c_lon));
        if (!lat || !lon) {
            reject(reader.line(), "unparseable coordinates");
            continue;
        }
        rec.location = {*lat, *lon};
        if (!is_valid(rec.location) || !bounds.contains(rec.location)) {
            reject(reader.line(), "coordinates outside the bounding box");
            continue;
        }
        auto issued = parse_date(trim(at(c_iss))), expires = parse_date(trim(at(c_exp)));
        if (!issued || !expires) {
            reject(reader.line(), "unparseable date");
            continue;
        }
        if (*expires < *issued) {
            reject(reader.line(), "expiration precedes issue date");
            continue;
        }
        rec.issued_on = *issued;
        rec.expires_on = *expires;
        auto boro = parse_borough(at(c_boro));
        if (!boro) {
            reject(reader.line(), "unknown borough \"" + std::string(at(c_boro)) + "\"");
            continue;
        }
        rec.borough = *boro;
        rec.renewed = c_ren != SIZE_MAX && parse_flag(at(c_ren)).value_or(false);

        auto [it, inserted] = by_id.try_emplace(rec.permit_id, rec);
        if (!inserted) {
            ++load.duplicates;
            if (rec.expires_on > it->second.expires_on) it->second = rec;
        }
    }
    load.permits.reserve(by_id.size());
    for (auto& [id, rec] : by_id) load.permits.push_back(std::move(rec));
    return load;
}

std::vector<PermitRecord> filter_active(const std::vector<PermitRecord>& permits, Date as_of) {
    std::vector<PermitRecord> out;
    std::copy_if(permits.begin(), permits.end(), std::back_inserter(out),
                 [as_of](const PermitRecord& p) { return p.expires_on >= as_of; });
    return out;
}

std::string permits_to_csv(const std::vector<PermitRecord>& permits) {
    const ColumnMap cols;
    std::string out = csv_line({cols.permit_id, cols.lat, cols.lon, cols.issued_on, cols.expires_on, cols.borough,
                                cols.renewed}) +
                      "\n";
    for (const auto& p : permits) {
        out += csv_line({p.permit_id, format_number(p.location.lat), format_number(p.location.lon),
                         format_date(p.issued_on), format_date(p.expires_on), std::string(to_string(p.borough)),
                         p.renewed ? "Y" : "N"}) +
               "\n";
    }
    return out;
}

}  // namespace longwatch
