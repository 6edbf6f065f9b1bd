#pragma once

#include "mlsm/error.hpp"
#include "mlsm/market_model.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mlsm {

struct Date {
    int year = 1970;
    int month = 1;
    int day = 1;

    auto operator<=>(const Date&) const = default;
    std::string iso() const;
    static std::optional<Date> parse_iso(std::string_view text);
};

/// One options-chain quote. Numeric cells may be empty in the source and are
/// then nullopt; every invariant is checked on the values that are present.
struct OptionQuoteRecord {
    std::size_t row = 0;  // 1-based data row in the source file
    std::string contract;
    std::string underlying;
    Date expiration;
    OptionKind type = OptionKind::call;
    std::optional<double> strike;
    std::string style;
    std::optional<double> bid;
    std::optional<double> bid_size;
    std::optional<double> ask;
    std::optional<double> ask_size;
    std::optional<double> volume;
    std::optional<double> open_interest;
    Date quote_date;
    std::optional<double> delta;
    std::optional<double> gamma;
    std::optional<double> theta;
    std::optional<double> vega;
    std::optional<double> implied_volatility;

    std::optional<double> numeric(std::string_view column) const;
};

/// Canonical interchange header, in file order.
const std::vector<std::string>& quote_columns();
/// The numeric subset of quote_columns(), in file order.
const std::vector<std::string>& numeric_quote_columns();

struct ParseDiagnostic {
    std::size_t row = 0;
    ErrorCode code = ErrorCode::TypeError;
    std::string column;  // empty when the problem is not tied to one column
    std::string message;
};

/// Error carrying the offending data row and column.
class ParseError : public Error {
public:
    ParseError(const ParseDiagnostic& d);
    const ParseDiagnostic& diagnostic() const noexcept { return diagnostic_; }

private:
    ParseDiagnostic diagnostic_;
};

struct QuoteTable {
    std::vector<OptionQuoteRecord> records;
    // Rows rejected in lenient mode, with reasons; always empty in strict mode.
    std::vector<ParseDiagnostic> diagnostics;

    std::size_t size() const noexcept { return records.size(); }
    std::vector<std::optional<double>> column(std::string_view name) const;
};

enum class ParseMode {
    strict,   // first bad row throws ParseError
    lenient,  // bad rows are skipped and listed in QuoteTable::diagnostics
};

/// Header columns may appear in any order; every canonical column must be
/// present (MissingColumn otherwise). Numbers use '.' decimals, dates are
/// YYYY-MM-DD and type is call/put (case-insensitive).
QuoteTable parse_quotes(std::istream& in, ParseMode mode = ParseMode::strict);

/// Writes the canonical header and one row per record; numbers are written
/// in shortest round-trip form so parse(write(t)) reproduces every value.
void write_quotes(std::ostream& out, const QuoteTable& table);

struct CorrelationMatrix {
    std::vector<std::string> columns;
    // nullopt where the correlation is undefined (constant column or fewer
    // than two pairwise-complete rows).
    std::vector<std::vector<std::optional<double>>> values;
    std::vector<std::string> warnings;
};

/// Pearson correlation over pairwise-complete rows. An empty `columns`
/// selects every numeric column.
CorrelationMatrix correlation_matrix(const QuoteTable& table, std::vector<std::string> columns = {});

void write_correlation_csv(std::ostream& out, const CorrelationMatrix& matrix);

/// Seeded shuffle, then the first ceil(fraction * n) rows train and the rest
/// validate. Record order inside each part follows the shuffle.
std::pair<QuoteTable, QuoteTable> train_val_split(const QuoteTable& table, double fraction, std::uint64_t seed);

}  // namespace mlsm
