#include "mlsm/cli.hpp"
#include "mlsm/data_ingest.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using mlsm::cli::run;

namespace {

struct Outcome {
    int code = 0;
    std::string out;
    std::string err;
};

Outcome invoke(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    for (std::string f; std::getline(in, f, ',');) out.push_back(f);
    return out;
}

const std::string kSample = std::string(MLSM_TEST_DATA_DIR) + "/sample_quotes.csv";

class CliFiles : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("mlsm_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                            "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }
    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    fs::path dir_;
};

}  // namespace

TEST(Cli, HelpAndUsageErrors) {
    EXPECT_EQ(invoke({"--help"}).code, 0);
    EXPECT_EQ(invoke({"sweep", "--help"}).code, 0);
    EXPECT_EQ(invoke({}).code, 2);
    EXPECT_EQ(invoke({"frobnicate"}).code, 2);
    EXPECT_EQ(invoke({"price", "--paths", "ten"}).code, 2);
    EXPECT_EQ(invoke({"price", "--estimator", "oracle"}).code, 2);
    EXPECT_EQ(invoke({"price", "--format", "xml"}).code, 2);
}

TEST(Cli, InvalidVolNamesTheKey) {
    const auto r = invoke({"sweep", "--vols", "-0.2"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("vols"), std::string::npos) << r.err;
}

TEST(Cli, SweepGridShapeAndOrder) {
    const auto r = invoke({"sweep", "--spots", "90,100", "--vols", "0.2,0.4", "--maturities", "1", "--paths", "500",
                           "--steps", "10", "--estimator", "polynomial,knn", "--no-timing"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = lines(r.out);
    ASSERT_EQ(rows.size(), 9u);
    EXPECT_EQ(rows[0],
              "estimator,spot,vol,maturity,price,std_error,european,european_std_error,degraded_steps");
    EXPECT_EQ(split(rows[1])[0], "polynomial");
    EXPECT_EQ(split(rows[5])[0], "knn");
    EXPECT_EQ(split(rows[1])[1], "90");
    EXPECT_EQ(split(rows[2])[1], "100");
    EXPECT_EQ(split(rows[3])[2], "0.4");
}

TEST(Cli, SweepSingleCellInPaperBand) {
    const auto r = invoke({"sweep", "--spots", "100", "--vols", "0.2", "--maturities", "1", "--estimator",
                           "polynomial", "--no-timing"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = lines(r.out);
    ASSERT_EQ(rows.size(), 2u);
    const double price = std::stod(split(rows[1])[4]);
    EXPECT_NEAR(price, 6.1403, 0.25);
}

TEST(Cli, TimingColumnIsPresentByDefault) {
    const auto r = invoke({"price", "--paths", "500", "--steps", "5"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto header = split(lines(r.out)[0]);
    EXPECT_EQ(header.back(), "elapsed_ms");
    EXPECT_GT(std::stod(split(lines(r.out)[1]).back()), 0.0);
}

TEST(Cli, TableFormatCarriesSameNumbers) {
    const auto csv = invoke({"price", "--paths", "800", "--steps", "8", "--no-timing"});
    const auto table = invoke({"price", "--paths", "800", "--steps", "8", "--no-timing", "--format", "table"});
    ASSERT_EQ(csv.code, 0);
    ASSERT_EQ(table.code, 0);
    const auto price = split(lines(csv.out)[1])[1];
    EXPECT_NE(table.out.find(price), std::string::npos);
    EXPECT_NE(csv.out, table.out);
}

TEST(Cli, ByteIdenticalAcrossThreadCounts) {
    const std::vector<std::vector<std::string>> commands{
        {"sweep", "--spots", "90,110", "--vols", "0.3", "--maturities", "1,2", "--paths", "600", "--steps", "10",
         "--estimator", "polynomial,tree,forest"},
        {"compare", "--paths", "600", "--steps", "10", "--lattice-steps", "200"},
        {"price", "--paths", "1000", "--steps", "12", "--estimator", "boost"},
        {"correlate", kSample},
        {"train", kSample, "--epochs", "3", "--batch", "16"},
    };
    for (const auto& base : commands) {
        std::string reference;
        for (const char* threads : {"1", "4", "8"}) {
            auto args = base;
            args.insert(args.end(), {"--threads", threads, "--no-timing", "--seed", "7"});
            const auto r = invoke(args);
            ASSERT_EQ(r.code, 0) << base[0] << ": " << r.err;
            if (reference.empty()) reference = r.out;
            else EXPECT_EQ(r.out, reference) << base[0] << " with " << threads << " threads";
        }
    }
}

TEST(Cli, CompareRoster) {
    const auto r = invoke({"compare", "--paths", "2000", "--steps", "25", "--lattice-steps", "500"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = lines(r.out);
    ASSERT_EQ(rows.size(), 9u);
    std::map<std::string, double> price;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto f = split(rows[i]);
        price[f[0]] = std::stod(f[1]);
        EXPECT_GT(std::stod(f.back()), 0.0) << f[0];
    }
    for (const char* m : {"polynomial", "knn", "tree", "forest", "boost", "logistic", "binomial", "european_mc"})
        EXPECT_EQ(price.count(m), 1u) << m;
    EXPECT_GT(price["tree"], price["polynomial"]);
}

TEST_F(CliFiles, ConfigFileAndFlagPrecedence) {
    {
        std::ofstream cfg(path("run.cfg"));
        cfg << "# pricing run\npaths = 700\nsteps=6\nestimator = knn\nno-timing = true\n";
    }
    const auto from_file = invoke({"price", "--config", path("run.cfg")});
    ASSERT_EQ(from_file.code, 0) << from_file.err;
    const auto explicit_flags = invoke({"price", "--paths", "700", "--steps", "6", "--estimator", "knn", "--no-timing"});
    EXPECT_EQ(from_file.out, explicit_flags.out);
    EXPECT_EQ(split(lines(from_file.out)[1])[0], "knn");

    const auto overridden = invoke({"price", "--config", path("run.cfg"), "--paths", "900"});
    ASSERT_EQ(overridden.code, 0);
    EXPECT_EQ(split(lines(overridden.out)[1])[3], "900");

    {
        std::ofstream cfg(path("bad.cfg"));
        cfg << "wobble = 3\n";
    }
    const auto bad = invoke({"price", "--config", path("bad.cfg")});
    EXPECT_EQ(bad.code, 2);
    EXPECT_NE(bad.err.find("wobble"), std::string::npos);
    EXPECT_EQ(invoke({"price", "--config", path("missing.cfg")}).code, 2);
}

TEST_F(CliFiles, PriceDumpsAndMetricsRoundTrip) {
    // Classifier mode, so the continuation column holds exercise probabilities.
    const auto r = invoke({"price", "--paths", "600", "--steps", "10", "--estimator", "logistic", "--paths-out", path("paths.csv"),
                           "--decisions-out", path("dec.csv"), "--no-timing"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(lines(read_file(path("paths.csv")))[0], "path,step,asset,time,price");
    EXPECT_EQ(lines(read_file(path("paths.csv"))).size(), 1u + 600u * 11u);
    const auto dec = lines(read_file(path("dec.csv")));
    EXPECT_EQ(dec[0], "step,asset_state_0,payoff,continuation,label,lookahead");

    const auto m = invoke({"metrics", path("dec.csv"), "--labels", "lookahead", "--roc-out",
                           path("roc.csv"), "--pr-out", path("pr.csv")});
    ASSERT_EQ(m.code, 0) << m.err;
    EXPECT_EQ(lines(m.out).size(), 2u);
    EXPECT_EQ(lines(read_file(path("roc.csv")))[0], "fpr,tpr");
    EXPECT_EQ(lines(read_file(path("pr.csv")))[0], "recall,precision");

    EXPECT_EQ(invoke({"metrics", path("dec.csv"), "--labels", "nope"}).code, 2);
    EXPECT_EQ(invoke({"metrics", path("absent.csv")}).code, 2);
}

TEST_F(CliFiles, MetricsOnToyFiles) {
    {
        std::ofstream f(path("sep.csv"));
        f << "continuation,label\n0.9,1\n0.8,1\n0.2,0\n0.1,0\n";
        std::ofstream g(path("ties.csv"));
        g << "continuation,label\n0.5,1\n0.5,0\n0.5,1\n0.5,0\n";
    }
    auto field = [](const Outcome& o, const std::string& name) {
        const auto header = split(lines(o.out)[0]);
        const auto row = split(lines(o.out)[1]);
        return row[static_cast<std::size_t>(std::find(header.begin(), header.end(), name) - header.begin())];
    };
    const auto sep = invoke({"metrics", path("sep.csv")});
    ASSERT_EQ(sep.code, 0) << sep.err;
    EXPECT_EQ(field(sep, "roc_auc"), "1");
    EXPECT_EQ(field(sep, "pr_auc"), "1");
    const double p = std::stod(field(sep, "precision")), rc = std::stod(field(sep, "recall"));
    EXPECT_NEAR(std::stod(field(sep, "f1")), 2 * p * rc / (p + rc), 1e-12);
    EXPECT_EQ(field(invoke({"metrics", path("ties.csv")}), "roc_auc"), "0.5");
}

TEST_F(CliFiles, OutputDirectoryFromEnvironment) {
    ::setenv(mlsm::cli::kOutputDirEnv, dir_.c_str(), 1);
    const auto r = invoke({"correlate", kSample, "--columns", "strike,vega", "-o", "nested/corr.csv"});
    ::unsetenv(mlsm::cli::kOutputDirEnv);
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(r.out.empty());
    const auto rows = lines(read_file(dir_ / "nested" / "corr.csv"));
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[0], "feature,strike,vega");
    EXPECT_EQ(split(rows[1])[1], "1");
    EXPECT_EQ(split(rows[1])[2], split(rows[2])[1]);
}

TEST_F(CliFiles, CorrelateConstantColumnWarns) {
    std::ifstream in(kSample);
    auto table = mlsm::parse_quotes(in);
    for (auto& r : table.records) r.bid_size = 5.0;
    {
        std::ofstream out(path("const.csv"));
        mlsm::write_quotes(out, table);
    }
    const auto r = invoke({"correlate", path("const.csv"), "--columns", "bid_size,strike"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(lines(r.out)[1], "bid_size,NA,NA");
    EXPECT_NE(r.err.find("bid_size"), std::string::npos);
}

TEST_F(CliFiles, CorrelateRejectsBadInput) {
    {
        std::ofstream f(path("crossed.csv"));
        f << "contract,underlying,expiration,type,strike,style,bid,bid_size,ask,ask_size,volume,open_interest,"
             "quote_date,delta,gamma,theta,vega,implied_volatility\n"
             "C,X,2024-01-19,put,100,A,2.0,1,1.5,1,1,1,2024-01-02,-0.5,0.1,-0.1,0.2,0.3\n";
    }
    const auto strict = invoke({"correlate", path("crossed.csv")});
    EXPECT_EQ(strict.code, 2);
    EXPECT_NE(strict.err.find("row 1"), std::string::npos);
    EXPECT_EQ(invoke({"correlate", path("crossed.csv"), "--lenient"}).code, 0);
}

TEST_F(CliFiles, TrainZeroEpochsAndHistory) {
    const auto zero = invoke({"train", kSample, "--epochs", "0", "--history-out", path("h0.csv"), "--no-timing"});
    ASSERT_EQ(zero.code, 0) << zero.err;
    EXPECT_EQ(read_file(path("h0.csv")), "epoch,train_mse,val_mse\n");
    const auto row = split(lines(zero.out)[1]);
    EXPECT_EQ(row[3], "0");
    EXPECT_GT(std::stod(row[5]), 0.0);

    const std::vector<std::string> args{"train",    kSample,  "--epochs", "4",           "--cell",
                                        "lstm",     "--batch", "32",      "--model-out", path("m.txt")};
    auto a = args, b = args;
    a.insert(a.end(), {"--history-out", path("ha.csv")});
    b.insert(b.end(), {"--history-out", path("hb.csv")});
    ASSERT_EQ(invoke(a).code, 0);
    ASSERT_EQ(invoke(b).code, 0);
    EXPECT_EQ(read_file(path("ha.csv")), read_file(path("hb.csv")));
    EXPECT_EQ(lines(read_file(path("ha.csv"))).size(), 5u);
    EXPECT_FALSE(read_file(path("m.txt")).empty());

    EXPECT_EQ(invoke({"train", kSample, "--target", "nope"}).code, 2);
    EXPECT_EQ(invoke({"train", kSample, "--cell", "rnn"}).code, 2);
}

TEST_F(CliFiles, TrainLearnsSyntheticLinearTarget) {
    // bid is an exact linear function of strike.
    std::ifstream in(kSample);
    auto table = mlsm::parse_quotes(in);
    for (auto& r : table.records) {
        r.bid = 0.03 * *r.strike;
        r.ask = *r.bid + 0.1;
    }
    {
        std::ofstream out(path("linear.csv"));
        mlsm::write_quotes(out, table);
    }
    const auto r = invoke({"train", path("linear.csv"), "--features", "strike", "--epochs", "200", "--batch", "16",
                           "--lr", "0.01", "--history-out", path("h.csv"), "--no-timing"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto hist = lines(read_file(path("h.csv")));
    ASSERT_EQ(hist.size(), 201u);
    const double first = std::stod(split(hist[1])[2]);
    const double last = std::stod(split(hist.back())[2]);
    EXPECT_LE(last, 0.1 * first);
}
