#include "mlsm/data_ingest.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

using namespace mlsm;

namespace {

const std::string kHeader =
    "contract,underlying,expiration,type,strike,style,bid,bid_size,ask,ask_size,volume,open_interest,quote_date,"
    "delta,gamma,theta,vega,implied_volatility\n";

std::string row(const std::string& bid = "1.5", const std::string& ask = "1.6", const std::string& type = "put",
                const std::string& strike = "100") {
    return "C1,XYZ,2024-06-21," + type + "," + strike + ",A," + bid + ",10," + ask +
           ",12,5,40,2024-03-01,-0.4,0.02,-0.01,0.2,0.25\n";
}

QuoteTable parse(const std::string& text, ParseMode mode = ParseMode::strict) {
    std::istringstream in(text);
    return parse_quotes(in, mode);
}

ErrorCode parse_code(const std::string& text) {
    try {
        parse(text);
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "parse succeeded";
    return ErrorCode::InvalidArgument;
}

QuoteTable random_table(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> z;
    QuoteTable t;
    for (std::size_t i = 0; i < n; ++i) {
        OptionQuoteRecord r;
        r.row = i + 1;
        const double a = z(rng), b = z(rng);
        r.delta = a;
        r.gamma = 0.5 * a + b;
        r.theta = z(rng);
        r.vega = -a + 0.1 * z(rng);
        r.implied_volatility = std::abs(b) + 0.3 * z(rng);
        t.records.push_back(r);
    }
    return t;
}

double two_pass(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
    mx /= n, my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    const double sx = std::sqrt(sxx / (n - 1)), sy = std::sqrt(syy / (n - 1));
    return sxy / ((n - 1) * sx * sy);
}

}  // namespace

TEST(Date, ParseIso) {
    EXPECT_EQ(Date::parse_iso("2024-02-29")->day, 29);
    EXPECT_FALSE(Date::parse_iso("2023-02-29"));
    EXPECT_FALSE(Date::parse_iso("2024-13-01"));
    EXPECT_FALSE(Date::parse_iso("2024-1-01"));
    EXPECT_FALSE(Date::parse_iso("20240101"));
    EXPECT_EQ(Date::parse_iso("1999-12-31")->iso(), "1999-12-31");
}

TEST(ParseQuotes, HeaderOnlyIsEmpty) {
    const auto t = parse(kHeader);
    EXPECT_EQ(t.size(), 0u);
    EXPECT_TRUE(t.diagnostics.empty());
}

TEST(ParseQuotes, TypedRecord) {
    const auto t = parse(kHeader + row());
    ASSERT_EQ(t.size(), 1u);
    const auto& r = t.records[0];
    EXPECT_EQ(r.row, 1u);
    EXPECT_EQ(r.type, OptionKind::put);
    EXPECT_EQ(*r.strike, 100.0);
    EXPECT_EQ(*r.bid, 1.5);
    EXPECT_EQ(r.expiration, (Date{2024, 6, 21}));
    EXPECT_EQ(*r.numeric("implied_volatility"), 0.25);
    EXPECT_EQ(parse(kHeader + row("1.5", "1.6", "CALL")).records[0].type, OptionKind::call);
}

TEST(ParseQuotes, ColumnOrderIsFree) {
    std::istringstream in(kHeader + row());
    auto t = parse_quotes(in);
    // Move the first column to the end.
    std::string header = kHeader.substr(0, kHeader.size() - 1);
    std::string body = row().substr(0, row().size() - 1);
    const std::string reordered = header.substr(header.find(',') + 1) + ",contract\n" +
                                  body.substr(body.find(',') + 1) + ",C1\n";
    const auto u = parse(reordered);
    ASSERT_EQ(u.size(), 1u);
    EXPECT_EQ(u.records[0].contract, "C1");
    EXPECT_EQ(u.records[0].bid, t.records[0].bid);
}

TEST(ParseQuotes, CrossedMarketNamesRow) {
    const std::string text = kHeader + row() + row("2.0", "1.5");
    try {
        parse(text);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.code(), ErrorCode::CrossedMarket);
        EXPECT_EQ(e.diagnostic().row, 2u);
        EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos);
    }
}

TEST(ParseQuotes, ErrorKinds) {
    EXPECT_EQ(parse_code("contract,underlying\n"), ErrorCode::MissingColumn);
    EXPECT_EQ(parse_code(kHeader + row("abc")), ErrorCode::TypeError);
    EXPECT_EQ(parse_code(kHeader + row("1", "2", "straddle")), ErrorCode::TypeError);
    EXPECT_EQ(parse_code(kHeader + row("1", "2", "put", "0")), ErrorCode::InvalidRecord);
    EXPECT_EQ(parse_code(kHeader + row("-1", "2")), ErrorCode::InvalidRecord);
    EXPECT_EQ(parse_code(kHeader + "C1,XYZ\n"), ErrorCode::TypeError);
    std::string bad_date = row();
    bad_date.replace(bad_date.find("2024-06-21"), 10, "2024-06-31");
    EXPECT_EQ(parse_code(kHeader + bad_date), ErrorCode::TypeError);
}

TEST(ParseQuotes, LenientModeListsEveryRejectedRow) {
    const auto t = parse(kHeader + row() + row("2.0", "1.5") + row("x") + "\n" + row(), ParseMode::lenient);
    EXPECT_EQ(t.size(), 2u);
    ASSERT_EQ(t.diagnostics.size(), 2u);
    EXPECT_EQ(t.diagnostics[0].row, 2u);
    EXPECT_EQ(t.diagnostics[0].code, ErrorCode::CrossedMarket);
    EXPECT_EQ(t.diagnostics[1].row, 3u);
    EXPECT_EQ(t.diagnostics[1].column, "bid");
}

TEST(ParseQuotes, MissingNumericsAreExplicit) {
    const auto t = parse(kHeader + row("", "1.6"));
    ASSERT_EQ(t.size(), 1u);
    EXPECT_FALSE(t.records[0].bid.has_value());
    EXPECT_FALSE(t.column("bid")[0].has_value());
}

TEST(ParseQuotes, SampleFileRoundTripsBitExactly) {
    std::ifstream file(std::string(MLSM_TEST_DATA_DIR) + "/sample_quotes.csv");
    ASSERT_TRUE(file.good());
    const auto t = parse_quotes(file);
    EXPECT_GT(t.size(), 100u);
    std::stringstream buf;
    write_quotes(buf, t);
    const auto u = parse_quotes(buf);
    ASSERT_EQ(u.size(), t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        EXPECT_EQ(u.records[i].contract, t.records[i].contract);
        EXPECT_EQ(u.records[i].expiration, t.records[i].expiration);
        for (const auto& c : numeric_quote_columns()) {
            const auto a = t.records[i].numeric(c), b = u.records[i].numeric(c);
            ASSERT_EQ(a.has_value(), b.has_value());
            if (a) EXPECT_EQ(std::bit_cast<std::uint64_t>(*a), std::bit_cast<std::uint64_t>(*b)) << c;
        }
    }
}

TEST(Correlation, BasicIdentities) {
    QuoteTable t;
    for (int i = 0; i < 10; ++i) {
        OptionQuoteRecord r;
        r.bid = i * 0.37 + 1.0;
        r.ask = 2.0 * *r.bid + 3.0;
        r.vega = 0.5;
        r.delta = -*r.bid;
        t.records.push_back(r);
    }
    const auto m = correlation_matrix(t, {"bid", "ask", "vega", "delta"});
    EXPECT_DOUBLE_EQ(*m.values[0][0], 1.0);
    EXPECT_DOUBLE_EQ(*m.values[0][1], 1.0);
    EXPECT_DOUBLE_EQ(*m.values[0][3], -1.0);
    EXPECT_FALSE(m.values[2][2].has_value());
    EXPECT_FALSE(m.values[0][2].has_value());
    EXPECT_FALSE(m.warnings.empty());

    std::ostringstream out;
    write_correlation_csv(out, m);
    EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "feature,bid,ask,vega,delta");
    EXPECT_NE(out.str().find("NA"), std::string::npos);

    try {
        correlation_matrix(t, {"bid", "nope"});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::MissingColumn);
    }
}

TEST(Correlation, MatchesTwoPassReference) {
    std::mt19937_64 rng(1);
    const std::vector<std::string> cols{"delta", "gamma", "theta", "vega", "implied_volatility"};
    for (int trial = 0; trial < 10; ++trial) {
        const auto t = random_table(rng, 50 + 10 * trial);
        const auto m = correlation_matrix(t, cols);
        for (std::size_t a = 0; a < cols.size(); ++a)
            for (std::size_t b = 0; b < cols.size(); ++b) {
                std::vector<double> x, y;
                for (const auto& r : t.records) x.push_back(*r.numeric(cols[a])), y.push_back(*r.numeric(cols[b]));
                EXPECT_NEAR(*m.values[a][b], two_pass(x, y), 1e-12);
                EXPECT_EQ(*m.values[a][b], *m.values[b][a]);
                EXPECT_LE(std::abs(*m.values[a][b]), 1.0);
            }
    }
}

TEST(Correlation, AffineInvariantAndPairwiseComplete) {
    std::mt19937_64 rng(2);
    auto t = random_table(rng, 80);
    const auto before = correlation_matrix(t, {"delta", "gamma", "vega"});
    for (auto& r : t.records) r.gamma = 7.5 * *r.gamma - 40.0;
    const auto after = correlation_matrix(t, {"delta", "gamma", "vega"});
    for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t b = 0; b < 3; ++b) EXPECT_NEAR(*before.values[a][b], *after.values[a][b], 1e-12);

    // Dropping a value only removes that row from pairs that use the column.
    t.records[0].gamma.reset();
    const auto holes = correlation_matrix(t, {"delta", "gamma", "vega"});
    EXPECT_EQ(*holes.values[0][2], *after.values[0][2]);
    EXPECT_NE(*holes.values[0][1], *after.values[0][1]);
}

TEST(Split, SizesDeterminismAndPartition) {
    QuoteTable t;
    for (std::size_t i = 0; i < 10; ++i) {
        OptionQuoteRecord r;
        r.row = i + 1;
        t.records.push_back(r);
    }
    const auto [train, val] = train_val_split(t, 0.8, 3);
    EXPECT_EQ(train.size(), 8u);
    EXPECT_EQ(val.size(), 2u);
    const auto [train2, val2] = train_val_split(t, 0.8, 3);
    std::vector<std::size_t> a, b;
    for (const auto& r : train.records) a.push_back(r.row);
    for (const auto& r : train2.records) b.push_back(r.row);
    EXPECT_EQ(a, b);
    std::set<std::size_t> all(a.begin(), a.end());
    for (const auto& r : val.records) all.insert(r.row);
    EXPECT_EQ(all.size(), 10u);

    QuoteTable one;
    one.records.resize(1);
    try {
        train_val_split(one, 0.8, 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::TooFewRows);
    }
    EXPECT_THROW(train_val_split(t, 1.0, 1), Error);
}
