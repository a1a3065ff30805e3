#include <sstream>
#include <thread>

#include <httplib.h>

#include "longwatch/csv.hpp"
#include "longwatch/errors.hpp"
#include "longwatch/ingest.hpp"

namespace longwatch {

namespace {

struct Endpoint {
    std::string base;  // scheme://host[:port]
    std::string path;  // path plus any fixed query
};

Endpoint split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw UsageError("endpoint must be an absolute http(s) URL: " + url);
    std::string scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") throw UsageError("unsupported URL scheme " + scheme);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (scheme == "https") throw UsageError("this build has no TLS support; use an http:// endpoint");
#endif
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

/// Number of data rows in one CSV page (header excluded) and the offset where data begins.
std::size_t count_rows(const std::string& body, std::size_t& data_offset) {
    std::istringstream in(body);
    CsvReader reader(in);
    std::vector<std::string> fields;
    data_offset = body.size();
    if (!reader.next(fields)) return 0;
    auto pos = in.tellg();
    data_offset = pos < 0 ? body.size() : static_cast<std::size_t>(pos);
    std::size_t rows = 0;
    while (reader.next(fields)) {
        if (fields.size() == 1 && fields[0].empty()) continue;
        ++rows;
    }
    return rows;
}

}  // namespace

FetchResult fetch_permits(const FetchOptions& opts, const ColumnMap& columns, const BoundingBox& bounds) {
    if (opts.page_size < 1 || opts.page_size > 50'000) throw UsageError("page_size must be in [1, 50000]");
    if (opts.max_attempts < 1) throw UsageError("max_attempts must be >= 1");
    const Endpoint ep = split_url(opts.endpoint);
    httplib::Client client(ep.base);
    client.set_connection_timeout(opts.timeout);
    client.set_read_timeout(opts.timeout);
    client.set_follow_location(true);

    httplib::Headers headers;
    if (opts.app_token && !opts.app_token->empty()) headers.emplace("X-App-Token", *opts.app_token);

    FetchResult result;
    const char sep = ep.path.find('?') == std::string::npos ? '?' : '&';
    for (std::size_t offset = 0;; offset += opts.page_size) {
        std::string target = ep.path + sep + "$limit=" + std::to_string(opts.page_size) +
                             "&$offset=" + std::to_string(offset) + "&$order=:id";
        std::string body;
        int last_status = 0;
        bool ok = false;
        auto delay = opts.backoff_base;
        for (int attempt = 1; attempt <= opts.max_attempts; ++attempt) {
            ++result.requests;
            auto res = client.Get(target, headers);
            if (res && res->status == 200) {
                body = res->body;
                ok = true;
                break;
            }
            last_status = res ? res->status : 0;
            if (attempt < opts.max_attempts) {
                std::this_thread::sleep_for(delay);
                delay = std::chrono::milliseconds(
                    static_cast<std::int64_t>(static_cast<double>(delay.count()) * opts.backoff_factor));
            }
        }
        if (!ok) {
            throw HttpError("GET " + ep.base + target + " failed after " + std::to_string(opts.max_attempts) +
                                " attempts (last status " + std::to_string(last_status) + ")",
                            last_status);
        }

        std::size_t data_offset = 0;
        std::size_t rows = count_rows(body, data_offset);
        if (offset == 0) {
            result.csv = body;
        } else if (rows > 0) {
            if (!result.csv.empty() && result.csv.back() != '\n') result.csv.push_back('\n');
            result.csv.append(body, data_offset, std::string::npos);
        }
        if (rows < opts.page_size) break;
    }

    if (result.csv.empty()) return result;  // zero rows and no header: nothing to parse
    std::istringstream in(result.csv);
    result.load = parse_permits(in, columns, bounds);
    return result;
}

}  // namespace longwatch
