#ifndef LONGWATCH_CSV_HPP
#define LONGWATCH_CSV_HPP

#include <cstddef>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace longwatch {

/// RFC 4180 reader: quoted fields, doubled quotes, embedded newlines, CRLF or LF endings.
class CsvReader {
public:
    explicit CsvReader(std::istream& in) : in_(in) {}

    /// Reads the next record. Returns false at end of input.
    bool next(std::vector<std::string>& fields);

    /// 1-based line number on which the most recent record started.
    std::size_t line() const noexcept { return record_line_; }

private:
    std::istream& in_;
    std::size_t line_ = 1;
    std::size_t record_line_ = 0;
};

/// Quotes a field when it contains a comma, quote, or newline.
std::string csv_escape(std::string_view field);

/// Joins fields into one CSV line (no trailing newline).
std::string csv_line(const std::vector<std::string>& fields);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_number(double v);

/// Fixed-point text with `digits` decimals.
std::string format_fixed(double v, int digits);

}  // namespace longwatch

#endif  // LONGWATCH_CSV_HPP
