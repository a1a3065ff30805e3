#ifndef LONGWATCH_INGEST_HPP
#define LONGWATCH_INGEST_HPP

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "longwatch/areas.hpp"
#include "longwatch/geo.hpp"
#include "longwatch/time.hpp"

namespace longwatch {

/// One dashcam capture event with the detector's verdict.
struct FrameRecord {
    std::string frame_id;
    Timestamp captured_at;
    GeoPoint location;
    Heading heading;
    bool detected = false;
    std::optional<double> confidence;  // present iff detected

    bool operator==(const FrameRecord&) const = default;
};

/// Canonical dataset order: (captured_at, frame_id).
bool chronological(const FrameRecord& a, const FrameRecord& b) noexcept;

/// One sidewalk-shed permit.
struct PermitRecord {
    std::string permit_id;
    GeoPoint location;
    Date issued_on;
    Date expires_on;
    Borough borough = Borough::Manhattan;
    bool renewed = false;

    bool operator==(const PermitRecord&) const = default;
};

struct Rejection {
    std::size_t line = 0;
    std::string reason;
};

enum class FrameFormat { Jsonl, Csv };

struct IngestOptions {
    /// Detections below this confidence are demoted to absences.
    double confidence_threshold = 0.85;
    /// Parsing fails when strictly more than this fraction of records is malformed.
    double max_malformed_fraction = 0.01;
    /// Study window [start, end); frames outside it are malformed.
    std::optional<Timestamp> window_start;
    std::optional<Timestamp> window_end;
    BoundingBox bounds = nyc_bounds();
};

struct DetectionDataset {
    std::vector<FrameRecord> frames;  // sorted by (captured_at, frame_id)
    std::string source_digest;        // FNV-1a 64 over the raw input bytes
    std::size_t records_seen = 0;     // non-blank lines / CSV data rows
    std::size_t rejected = 0;
    std::size_t demoted = 0;          // detections below the confidence threshold
    std::vector<Rejection> first_rejections;  // up to 10

    /// FNV-1a 64 over a canonical serialization of the sorted frames; independent of input
    /// order and formatting.
    std::string records_digest() const;
};

/// Parses a frame stream. Throws DataError when too many records are malformed (listing the
/// first 10) or when a frame_id repeats.
DetectionDataset parse_frames(std::istream& in, FrameFormat format, const IngestOptions& opts = {});

/// Parses several files (in parallel when workers > 1) and merges them into one sorted
/// dataset identical to parsing their concatenation. Without an explicit format each file's
/// extension decides.
DetectionDataset parse_frame_files(const std::vector<std::string>& paths, std::optional<FrameFormat> format,
                                   const IngestOptions& opts = {}, unsigned workers = 1);

/// Picks the format from the file extension (.csv -> Csv, otherwise Jsonl).
FrameFormat frame_format_for(std::string_view path);

std::string frame_to_jsonl(const FrameRecord& f);

/// Maps logical permit fields to source CSV column names.
struct ColumnMap {
    std::string permit_id = "Job Number";
    std::string lat = "Latitude Point";
    std::string lon = "Longitude Point";
    std::string issued_on = "First Permit Date";
    std::string expires_on = "Expiration Date";
    std::string borough = "Borough Name";
    std::string renewed = "Permit Renewed";  // optional column
    /// Optional operator filter on a permit-type column.
    std::string type_column;
    std::vector<std::string> include_types;

    /// Reads {"permit_id": "...", ..., "type_column": "...", "include_types": [...]};
    /// absent keys keep their defaults. Throws UsageError on malformed JSON.
    static ColumnMap from_json(std::string_view text);
};

struct PermitLoad {
    std::vector<PermitRecord> permits;  // sorted by permit_id
    std::size_t rows = 0;
    std::size_t rejected = 0;
    std::size_t duplicates = 0;
    std::size_t excluded_by_type = 0;
    std::vector<Rejection> first_rejections;
};

/// Parses a DOB sheds CSV. Throws DataError naming any missing required column.
PermitLoad parse_permits(std::istream& in, const ColumnMap& columns = {},
                         const BoundingBox& bounds = nyc_bounds());

/// Keeps permits with expires_on >= as_of.
std::vector<PermitRecord> filter_active(const std::vector<PermitRecord>& permits, Date as_of);

/// Writes permits in the default column schema.
std::string permits_to_csv(const std::vector<PermitRecord>& permits);

struct FetchOptions {
    std::string endpoint;  // e.g. https://data.cityofnewyork.us/resource/xxxx-xxxx.csv
    std::size_t page_size = 50'000;
    std::optional<std::string> app_token;
    int max_attempts = 3;
    std::chrono::milliseconds backoff_base{1000};
    double backoff_factor = 2.0;
    std::chrono::seconds timeout{60};
};

struct FetchResult {
    PermitLoad load;
    std::string csv;  // concatenated pages, one header
    std::size_t requests = 0;
};

/// Pages through an open-data CSV endpoint with $limit/$offset until a short page.
/// Throws HttpError after max_attempts failures of one page.
FetchResult fetch_permits(const FetchOptions& opts, const ColumnMap& columns = {},
                          const BoundingBox& bounds = nyc_bounds());

/// Incremental 64-bit FNV-1a.
class Fnv1a {
public:
    void update(std::string_view bytes) noexcept;
    std::uint64_t value() const noexcept { return state_; }
    std::string hex() const;

private:
    std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

}  // namespace longwatch

#endif  // LONGWATCH_INGEST_HPP
