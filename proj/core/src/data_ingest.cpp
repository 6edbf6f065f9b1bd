#include "mlsm/data_ingest.hpp"

#include "mlsm/format.hpp"
#include "mlsm/rng.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace mlsm {

std::string Date::iso() const {
    std::array<char, 16> buf{};
    std::snprintf(buf.data(), buf.size(), "%04d-%02d-%02d", year, month, day);
    return buf.data();
}

std::optional<Date> Date::parse_iso(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    auto digits = [&](std::size_t pos, std::size_t len) -> std::optional<int> {
        int v = 0;
        for (std::size_t i = pos; i < pos + len; ++i) {
            if (!std::isdigit(static_cast<unsigned char>(text[i]))) return std::nullopt;
            v = v * 10 + (text[i] - '0');
        }
        return v;
    };
    const auto y = digits(0, 4), m = digits(5, 2), d = digits(8, 2);
    if (!y || !m || !d || *m < 1 || *m > 12 || *d < 1) return std::nullopt;
    static constexpr std::array<int, 12> days{31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    const bool leap = (*y % 4 == 0 && *y % 100 != 0) || *y % 400 == 0;
    const int max_day = days[static_cast<std::size_t>(*m - 1)] + (leap && *m == 2 ? 1 : 0);
    if (*d > max_day) return std::nullopt;
    return Date{*y, *m, *d};
}

const std::vector<std::string>& quote_columns() {
    static const std::vector<std::string> columns{
        "contract", "underlying", "expiration",    "type",       "strike", "style", "bid",   "bid_size", "ask",
        "ask_size", "volume",     "open_interest", "quote_date", "delta",  "gamma", "theta", "vega",     "implied_volatility"};
    return columns;
}

const std::vector<std::string>& numeric_quote_columns() {
    static const std::vector<std::string> columns{"strike", "bid",   "bid_size", "ask",   "ask_size", "volume",
                                                  "open_interest", "delta", "gamma", "theta", "vega", "implied_volatility"};
    return columns;
}

namespace {

// Member pointers for the numeric columns, aligned with numeric_quote_columns().
using NumericField = std::optional<double> OptionQuoteRecord::*;
const std::array<NumericField, 12>& numeric_fields() {
    static const std::array<NumericField, 12> fields{
        &OptionQuoteRecord::strike,        &OptionQuoteRecord::bid,   &OptionQuoteRecord::bid_size,
        &OptionQuoteRecord::ask,           &OptionQuoteRecord::ask_size, &OptionQuoteRecord::volume,
        &OptionQuoteRecord::open_interest, &OptionQuoteRecord::delta, &OptionQuoteRecord::gamma,
        &OptionQuoteRecord::theta,         &OptionQuoteRecord::vega,  &OptionQuoteRecord::implied_volatility};
    return fields;
}

std::string describe(const ParseDiagnostic& d) {
    std::ostringstream msg;
    msg << "row " << d.row;
    if (!d.column.empty()) msg << ", column '" << d.column << "'";
    msg << ": " << d.message;
    return msg.str();
}

std::string lower(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

}  // namespace

ParseError::ParseError(const ParseDiagnostic& d) : Error(d.code, describe(d)), diagnostic_(d) {}

std::optional<double> OptionQuoteRecord::numeric(std::string_view column) const {
    const auto& names = numeric_quote_columns();
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == column) return this->*numeric_fields()[i];
    fail(ErrorCode::MissingColumn, "unknown numeric column '" + std::string(column) + "'");
}

std::vector<std::optional<double>> QuoteTable::column(std::string_view name) const {
    std::vector<std::optional<double>> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.numeric(name));
    return out;
}

QuoteTable parse_quotes(std::istream& in, ParseMode mode) {
    CsvReader reader(in);
    std::vector<std::string> fields;
    if (!reader.next(fields)) fail(ErrorCode::MissingColumn, "empty input: header row missing");

    std::map<std::string, std::size_t> position;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        std::string name = fields[i];
        if (i == 0 && name.rfind("\xEF\xBB\xBF", 0) == 0) name.erase(0, 3);  // UTF-8 BOM
        position[name] = i;
    }
    for (const auto& col : quote_columns())
        if (!position.count(col)) fail(ErrorCode::MissingColumn, "missing column '" + col + "'");
    const std::size_t width = fields.size();

    QuoteTable table;
    std::size_t row = 0;
    while (reader.next(fields)) {
        if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
        ++row;
        std::optional<ParseDiagnostic> problem;
        auto reject = [&](ErrorCode code, std::string column, std::string message) {
            if (!problem) problem = ParseDiagnostic{row, code, std::move(column), std::move(message)};
        };

        OptionQuoteRecord rec;
        rec.row = row;
        if (fields.size() != width) {
            std::ostringstream msg;
            msg << "expected " << width << " fields, found " << fields.size();
            reject(ErrorCode::TypeError, "", msg.str());
        } else {
            auto cell = [&](const std::string& col) -> const std::string& { return fields[position[col]]; };
            rec.contract = cell("contract");
            rec.underlying = cell("underlying");
            rec.style = cell("style");
            for (const char* col : {"expiration", "quote_date"}) {
                const auto date = Date::parse_iso(cell(col));
                if (!date) reject(ErrorCode::TypeError, col, "expected an ISO date YYYY-MM-DD, got '" + cell(col) + "'");
                else (std::string_view(col) == "expiration" ? rec.expiration : rec.quote_date) = *date;
            }
            const std::string type = lower(cell("type"));
            if (type == "call") rec.type = OptionKind::call;
            else if (type == "put") rec.type = OptionKind::put;
            else reject(ErrorCode::TypeError, "type", "expected call or put, got '" + cell("type") + "'");

            const auto& names = numeric_quote_columns();
            for (std::size_t i = 0; i < names.size(); ++i) {
                const std::string& text = cell(names[i]);
                if (text.find_first_not_of(" \t") == std::string::npos) continue;  // missing
                const auto value = parse_double(text);
                if (!value || !std::isfinite(*value)) {
                    reject(ErrorCode::TypeError, names[i], "expected a number, got '" + text + "'");
                    continue;
                }
                rec.*numeric_fields()[i] = *value;
            }

            if (rec.strike && !(*rec.strike > 0.0)) reject(ErrorCode::InvalidRecord, "strike", "strike must be > 0");
            if (rec.bid && *rec.bid < 0.0) reject(ErrorCode::InvalidRecord, "bid", "bid must be >= 0");
            if (rec.bid && rec.ask && *rec.bid > *rec.ask) {
                std::ostringstream msg;
                msg << "crossed market: bid " << format_number(*rec.bid) << " > ask " << format_number(*rec.ask);
                reject(ErrorCode::CrossedMarket, "", msg.str());
            }
            for (const char* col : {"bid_size", "ask_size", "volume", "open_interest", "implied_volatility"}) {
                const auto v = rec.numeric(col);
                if (v && *v < 0.0) reject(ErrorCode::InvalidRecord, col, std::string(col) + " must be >= 0");
            }
        }

        if (problem) {
            if (mode == ParseMode::strict) throw ParseError(*problem);
            table.diagnostics.push_back(*problem);
            continue;
        }
        table.records.push_back(std::move(rec));
    }
    return table;
}

void write_quotes(std::ostream& out, const QuoteTable& table) {
    write_csv_row(out, quote_columns());
    for (const auto& r : table.records) {
        auto num = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
        write_csv_row(out, {r.contract, r.underlying, r.expiration.iso(), to_string(r.type), num(r.strike), r.style,
                            num(r.bid), num(r.bid_size), num(r.ask), num(r.ask_size), num(r.volume),
                            num(r.open_interest), r.quote_date.iso(), num(r.delta), num(r.gamma), num(r.theta),
                            num(r.vega), num(r.implied_volatility)});
    }
}

CorrelationMatrix correlation_matrix(const QuoteTable& table, std::vector<std::string> columns) {
    if (columns.empty()) columns = numeric_quote_columns();
    const auto& known = numeric_quote_columns();
    for (const auto& c : columns)
        if (std::find(known.begin(), known.end(), c) == known.end())
            fail(ErrorCode::MissingColumn, "'" + c + "' is not a numeric quote column");

    std::vector<std::vector<std::optional<double>>> data;
    data.reserve(columns.size());
    for (const auto& c : columns) data.push_back(table.column(c));

    CorrelationMatrix out;
    out.columns = columns;
    const std::size_t k = columns.size();
    out.values.assign(k, std::vector<std::optional<double>>(k));
    std::vector<bool> constant(k, false);

    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = a; b < k; ++b) {
            // Single-pass co-moment update over pairwise-complete rows.
            double n = 0.0, mean_a = 0.0, mean_b = 0.0, m2_a = 0.0, m2_b = 0.0, co = 0.0;
            for (std::size_t r = 0; r < table.size(); ++r) {
                if (!data[a][r] || !data[b][r]) continue;
                const double x = *data[a][r];
                const double y = *data[b][r];
                n += 1.0;
                const double dx = x - mean_a;
                const double dy = y - mean_b;
                mean_a += dx / n;
                mean_b += dy / n;
                m2_a += dx * (x - mean_a);
                m2_b += dy * (y - mean_b);
                co += dx * (y - mean_b);
            }
            if (n < 2.0) continue;
            if (a == b) {
                if (m2_a > 0.0) out.values[a][a] = 1.0;
                else constant[a] = true;
                continue;
            }
            if (!(m2_a > 0.0) || !(m2_b > 0.0)) continue;
            const double rho = std::clamp(co / std::sqrt(m2_a * m2_b), -1.0, 1.0);
            out.values[a][b] = rho;
            out.values[b][a] = rho;
        }
    }
    for (std::size_t a = 0; a < k; ++a) {
        if (constant[a])
            out.warnings.push_back("column '" + columns[a] + "' has zero variance; its correlations are undefined");
        else if (!out.values[a][a])
            out.warnings.push_back("column '" + columns[a] + "' has fewer than two values; its correlations are undefined");
    }
    return out;
}

void write_correlation_csv(std::ostream& out, const CorrelationMatrix& matrix) {
    std::vector<std::string> header{"feature"};
    header.insert(header.end(), matrix.columns.begin(), matrix.columns.end());
    write_csv_row(out, header);
    for (std::size_t a = 0; a < matrix.columns.size(); ++a) {
        std::vector<std::string> row{matrix.columns[a]};
        for (const auto& v : matrix.values[a]) row.push_back(format_number(v));
        write_csv_row(out, row);
    }
}

std::pair<QuoteTable, QuoteTable> train_val_split(const QuoteTable& table, double fraction, std::uint64_t seed) {
    const std::size_t n = table.size();
    if (n < 2) fail(ErrorCode::TooFewRows, "train/validation split needs at least 2 rows");
    if (!(fraction > 0.0 && fraction < 1.0)) fail(ErrorCode::InvalidArgument, "split fraction must lie in (0, 1)");
    const auto order = shuffled_indices(n, seed);
    const auto cut = std::min(n, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n))));

    std::pair<QuoteTable, QuoteTable> out;
    for (std::size_t k = 0; k < n; ++k) (k < cut ? out.first : out.second).records.push_back(table.records[order[k]]);
    return out;
}

}  // namespace mlsm
