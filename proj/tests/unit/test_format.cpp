#include "mlsm/format.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

using namespace mlsm;

TEST(FormatNumber, ShortestRoundTrip) {
    EXPECT_EQ(format_number(0.1), "0.1");
    EXPECT_EQ(format_number(100.0), "100");
    EXPECT_EQ(format_number(std::nan("")), kUndefined);
    EXPECT_EQ(format_number(std::optional<double>{}), kUndefined);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 1000; ++i) {
        const double x = u(rng) * std::pow(10.0, static_cast<double>(i % 20) - 10.0);
        EXPECT_EQ(parse_double(format_number(x)).value(), x);
    }
}

TEST(ParseDouble, StrictWholeField) {
    EXPECT_EQ(parse_double("1.5").value(), 1.5);
    EXPECT_EQ(parse_double("-2e3").value(), -2000.0);
    EXPECT_FALSE(parse_double("").has_value());
    EXPECT_FALSE(parse_double("1.5x").has_value());
    EXPECT_FALSE(parse_double("1,5").has_value());
    EXPECT_FALSE(parse_double("abc").has_value());
}

TEST(Csv, EscapeAndReadBack) {
    EXPECT_EQ(csv_escape("plain"), "plain");
    EXPECT_EQ(csv_escape("a,b"), "\"a,b\"");
    EXPECT_EQ(csv_escape("say \"hi\""), "\"say \"\"hi\"\"\"");

    std::ostringstream out;
    write_csv_row(out, {"a,b", "line\nbreak", "q\"uote", ""});
    write_csv_row(out, {"1", "2", "3", "4"});
    std::istringstream in(out.str());
    CsvReader reader(in);
    std::vector<std::string> fields;
    ASSERT_TRUE(reader.next(fields));
    EXPECT_EQ(fields, (std::vector<std::string>{"a,b", "line\nbreak", "q\"uote", ""}));
    ASSERT_TRUE(reader.next(fields));
    EXPECT_EQ(reader.line(), 3u);
    EXPECT_EQ(fields, (std::vector<std::string>{"1", "2", "3", "4"}));
    EXPECT_FALSE(reader.next(fields));
}

TEST(Csv, CrlfLineEndings) {
    std::istringstream in("a,b\r\n1,2\r\n");
    CsvReader reader(in);
    std::vector<std::string> fields;
    ASSERT_TRUE(reader.next(fields));
    EXPECT_EQ(fields, (std::vector<std::string>{"a", "b"}));
    ASSERT_TRUE(reader.next(fields));
    EXPECT_EQ(fields, (std::vector<std::string>{"1", "2"}));
}

TEST(WriteTable, CsvAndTableCarrySameCells) {
    const std::vector<std::string> header{"name", "value"};
    const std::vector<std::vector<std::string>> rows{{"a", "1.5"}, {"long name", "NA"}};
    std::ostringstream csv, table;
    write_table(csv, header, rows, OutputFormat::csv);
    write_table(table, header, rows, OutputFormat::table);
    EXPECT_EQ(csv.str(), "name,value\na,1.5\nlong name,NA\n");
    EXPECT_NE(table.str().find("long name"), std::string::npos);
    EXPECT_NE(table.str().find("1.5"), std::string::npos);
}
