#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mlsm {

/// Marker written in place of an undefined metric or matrix entry.
inline constexpr std::string_view kUndefined = "NA";

/// Shortest decimal text that parses back to the same double (std::to_chars).
std::string format_number(double value);
std::string format_number(const std::optional<double>& value);

/// RFC-4180 field quoting: quotes the field when it contains a comma, quote,
/// CR or LF, doubling embedded quotes.
std::string csv_escape(std::string_view field);

/// RFC-4180 reader. Handles quoted fields with embedded separators, doubled
/// quotes and line breaks; accepts LF or CRLF record terminators.
class CsvReader {
public:
    explicit CsvReader(std::istream& in) : in_(in) {}

    /// Reads the next record into `fields`; returns false at end of input.
    bool next(std::vector<std::string>& fields);
    /// 1-based line number where the last returned record started.
    std::size_t line() const noexcept { return record_line_; }

private:
    std::istream& in_;
    std::size_t line_ = 1;
    std::size_t record_line_ = 0;
};

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

enum class OutputFormat { csv, table };

/// Writes a header plus rows either as CSV or as a right-aligned text table.
void write_table(std::ostream& out, const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows, OutputFormat format);

/// Locale-independent strict parse of a full string as a double.
std::optional<double> parse_double(std::string_view text);

}  // namespace mlsm
