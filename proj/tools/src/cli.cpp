#include "mlsm/cli.hpp"

#include "mlsm/data_ingest.hpp"
#include "mlsm/error.hpp"
#include "mlsm/format.hpp"
#include "mlsm/lsm_engine.hpp"
#include "mlsm/metrics.hpp"
#include "mlsm/parallel.hpp"
#include "mlsm/path_simulator.hpp"
#include "mlsm/recurrent.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

namespace mlsm::cli {

std::filesystem::path resolve_output_path(const std::string& path) {
    std::filesystem::path p(path);
    if (p.is_relative()) {
        if (const char* dir = std::getenv(kOutputDirEnv); dir != nullptr && *dir != '\0') p = std::filesystem::path(dir) / p;
    }
    return p;
}

namespace {

std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

}  // namespace

std::vector<std::pair<std::string, std::string>> read_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("config: cannot open '" + path.string() + "'");
    std::vector<std::pair<std::string, std::string>> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw UsageError("config: line " + std::to_string(line_no) + " is not of the form key = value");
        std::string key = trim(line.substr(0, eq));
        while (!key.empty() && key.front() == '-') key.erase(0, 1);
        if (key.empty()) throw UsageError("config: line " + std::to_string(line_no) + " has an empty key");
        entries.emplace_back(key, trim(line.substr(eq + 1)));
    }
    return entries;
}

namespace {

using Clock = std::chrono::steady_clock;
using Row = std::vector<std::string>;

double elapsed_ms(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string format_ms(double ms) {
    std::array<char, 32> buf{};
    std::snprintf(buf.data(), buf.size(), "%.3f", ms);
    return buf.data();
}

// Options every command shares.
struct Common {
    std::uint64_t seed = 42;
    std::size_t threads = 0;  // 0: hardware concurrency
    std::string format = "csv";
    std::string output;
    std::string config;
    bool no_timing = false;

    OutputFormat output_format() const { return format == "table" ? OutputFormat::table : OutputFormat::csv; }
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--seed", c.seed, "Base RNG seed")->capture_default_str();
    cmd->add_option("--threads", c.threads, "Worker threads (0: all cores)")->capture_default_str();
    cmd->add_option("--format", c.format, "csv or table")->capture_default_str();
    cmd->add_option("-o,--output", c.output, "Output file (default: stdout)");
    cmd->add_option("--config", c.config, "key = value file; flags on the command line win");
    cmd->add_flag("--no-timing", c.no_timing, "Omit the elapsed_ms column");
}

// Writes either to the requested file or to `fallback`.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) {
        if (path.empty()) {
            stream_ = &fallback;
            return;
        }
        const auto resolved = resolve_output_path(path);
        if (resolved.has_parent_path()) std::filesystem::create_directories(resolved.parent_path());
        file_.open(resolved, std::ios::binary);
        if (!file_) throw std::runtime_error("cannot open '" + resolved.string() + "' for writing");
        stream_ = &file_;
    }
    std::ostream& get() { return *stream_; }
    void close() {
        stream_->flush();
        if (!*stream_) throw std::runtime_error("write failed");
    }

private:
    std::ofstream file_;
    std::ostream* stream_ = nullptr;
};

void write_output(const Common& c, std::ostream& out, const Row& header, const std::vector<Row>& rows) {
    Sink sink(c.output, out);
    write_table(sink.get(), header, rows, c.output_format());
    sink.close();
}

void write_aux(const std::string& path, const std::function<void(std::ostream&)>& body) {
    if (path.empty()) return;
    std::ostringstream discard;
    Sink sink(path, discard);
    body(sink.get());
    sink.close();
}

std::ifstream open_input(const std::string& key, const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError(key + ": cannot open '" + path + "'");
    return in;
}

void check_common(const Common& c) {
    if (c.format != "csv" && c.format != "table") throw UsageError("format: expected csv or table, got '" + c.format + "'");
}

void require(bool ok, const std::string& key, const std::string& message) {
    if (!ok) throw UsageError(key + ": " + message);
}

template <class T>
void require_all(const std::vector<T>& values, const std::string& key, const std::function<bool(T)>& ok,
                 const std::string& message) {
    require(!values.empty(), key, "must not be empty");
    for (const auto& v : values) {
        if (!ok(v)) {
            std::ostringstream msg;
            msg << message << ", got " << v;
            throw UsageError(key + ": " + msg.str());
        }
    }
}

// Runs `body` and reports library errors raised there as usage errors; used
// while turning flags into validated domain objects.
template <class F>
auto as_usage(const std::string& key, F&& body) {
    try {
        return body();
    } catch (const Error& e) {
        throw UsageError(key + ": " + e.what());
    }
}

// --- estimator flags --------------------------------------------------------

struct EstimatorFlags {
    int order = 2;
    std::optional<double> ridge;
    std::size_t k = 10;
    std::optional<std::size_t> max_depth;
    std::size_t min_leaf = 1;
    std::size_t trees = 20;
    std::size_t rounds = 100;
    double boost_lr = 0.1;
    std::size_t boost_depth = 3;
    double logistic_lr = 0.5;
    std::size_t logistic_iters = 500;
};

void add_estimator_flags(CLI::App* cmd, EstimatorFlags& f) {
    cmd->add_option("--order", f.order, "Polynomial total degree")->capture_default_str();
    cmd->add_option_function<double>("--ridge", [&f](const double& v) { f.ridge = v; }, "Ridge penalty (default: tiny automatic)");
    cmd->add_option("--k", f.k, "k-NN neighbours")->capture_default_str();
    cmd->add_option_function<std::size_t>("--max-depth", [&f](const std::size_t& v) { f.max_depth = v; },
                                          "Tree depth limit (default: unpruned)");
    cmd->add_option("--min-leaf", f.min_leaf, "Minimum samples per tree leaf")->capture_default_str();
    cmd->add_option("--trees", f.trees, "Forest size")->capture_default_str();
    cmd->add_option("--rounds", f.rounds, "Boosting rounds")->capture_default_str();
    cmd->add_option("--boost-lr", f.boost_lr, "Boosting shrinkage")->capture_default_str();
    cmd->add_option("--boost-depth", f.boost_depth, "Depth of each boosted tree")->capture_default_str();
    cmd->add_option("--logistic-lr", f.logistic_lr, "Logistic gradient step")->capture_default_str();
    cmd->add_option("--logistic-iters", f.logistic_iters, "Logistic iteration cap")->capture_default_str();
}

const std::vector<std::string>& estimator_names() {
    static const std::vector<std::string> names{"polynomial", "knn", "tree", "forest", "boost", "logistic"};
    return names;
}

EstimatorConfig build_estimator(const std::string& name, const EstimatorFlags& f, std::uint64_t seed) {
    EstimatorConfig cfg;
    if (name == "polynomial") {
        cfg = PolynomialBasisConfig{f.order, f.ridge};
    } else if (name == "knn") {
        cfg = KnnConfig{f.k};
    } else if (name == "tree") {
        cfg = TreeConfig{f.max_depth, f.min_leaf};
    } else if (name == "forest") {
        ForestConfig forest;
        forest.n_trees = f.trees;
        forest.tree = TreeConfig{f.max_depth, f.min_leaf};
        forest.seed = seed;
        cfg = forest;
    } else if (name == "boost") {
        cfg = BoostConfig{f.rounds, f.boost_lr, TreeConfig{f.boost_depth, f.min_leaf}};
    } else if (name == "logistic") {
        cfg = LogisticConfig{f.logistic_lr, f.logistic_iters, LogisticConfig{}.tolerance};
    } else {
        throw UsageError("estimator: unknown estimator '" + name + "' (expected polynomial, knn, tree, forest, boost or logistic)");
    }
    as_usage("estimator", [&] {
        validate(cfg);
        return 0;
    });
    return cfg;
}

// --- engine flags ------------------------------------------------------------

struct EngineFlags {
    std::string kind = "put";
    std::string scope = "all";
    std::string update = "realized";
    std::string mode = "auto";
    std::string scheme = "exact";
    double threshold = 0.5;
    std::size_t assets = 1;
    double rho = 0.0;
};

void add_engine_flags(CLI::App* cmd, EngineFlags& f) {
    cmd->add_option("--kind", f.kind, "put or call")->capture_default_str();
    cmd->add_option("--scope", f.scope, "Regression set: itm or all")->capture_default_str();
    cmd->add_option("--update", f.update, "realized or continuation")->capture_default_str();
    cmd->add_option("--mode", f.mode, "auto, regression or classifier")->capture_default_str();
    cmd->add_option("--scheme", f.scheme, "exact or euler")->capture_default_str();
    cmd->add_option("--threshold", f.threshold, "Classifier exercise threshold")->capture_default_str();
    cmd->add_option("--assets", f.assets, "Number of correlated assets (basket payoff)")->capture_default_str();
    cmd->add_option("--rho", f.rho, "Pairwise correlation between assets")->capture_default_str();
}

OptionKind parse_kind(const std::string& s) {
    if (s == "put") return OptionKind::put;
    if (s == "call") return OptionKind::call;
    throw UsageError("kind: expected put or call, got '" + s + "'");
}

LsmConfig build_lsm(const EngineFlags& f, const std::string& estimator, const EstimatorConfig& est, std::size_t paths,
                    std::size_t steps, std::uint64_t seed) {
    LsmConfig cfg;
    cfg.n_paths = paths;
    cfg.n_steps = steps;
    cfg.estimator = est;
    cfg.seed = seed;
    cfg.threshold = f.threshold;

    if (f.scope == "itm") cfg.regression_scope = RegressionScope::in_the_money_only;
    else if (f.scope == "all") cfg.regression_scope = RegressionScope::all_paths;
    else throw UsageError("scope: expected itm or all, got '" + f.scope + "'");

    if (f.update == "realized") cfg.update_rule = UpdateRule::realized_cashflow;
    else if (f.update == "continuation") cfg.update_rule = UpdateRule::continuation_value;
    else throw UsageError("update: expected realized or continuation, got '" + f.update + "'");

    if (f.scheme == "exact") cfg.scheme = SteppingScheme::exact_lognormal;
    else if (f.scheme == "euler") cfg.scheme = SteppingScheme::arithmetic_euler;
    else throw UsageError("scheme: expected exact or euler, got '" + f.scheme + "'");

    // The logistic model only fits binary labels, so it always classifies.
    if (f.mode == "auto") cfg.decision_mode = estimator == "logistic" ? DecisionMode::classifier : DecisionMode::regression;
    else if (f.mode == "regression") cfg.decision_mode = DecisionMode::regression;
    else if (f.mode == "classifier") cfg.decision_mode = DecisionMode::classifier;
    else throw UsageError("mode: expected auto, regression or classifier, got '" + f.mode + "'");
    if (estimator == "logistic" && cfg.decision_mode != DecisionMode::classifier)
        throw UsageError("mode: the logistic estimator requires classifier mode");

    require(paths >= 2, "paths", "must be >= 2");
    require(steps >= 1, "steps", "must be >= 1");
    require(f.threshold > 0.0 && f.threshold < 1.0, "threshold", "must lie in (0, 1)");
    as_usage("config", [&] {
        cfg.validate();
        return 0;
    });
    return cfg;
}

ModelParams build_params(const EngineFlags& f, double spot, double rate, double vol) {
    require(f.assets >= 1, "assets", "must be >= 1");
    require(f.rho >= -1.0 && f.rho <= 1.0, "rho", "must lie in [-1, 1]");
    return as_usage("rho", [&] {
        return f.assets == 1 ? ModelParams::single(spot, rate, vol)
                             : ModelParams::uniform(f.assets, spot, rate, vol, f.rho);
    });
}

PricingResult run_lsm(const OptionSpec& spec, const ModelParams& params, const LsmConfig& cfg, std::ostream& err,
                      const std::string& label) {
    auto result = price_american_lsm(spec, params, cfg);
    for (const auto& w : result.pricing.warnings) err << "warning: " << label << ": " << w << '\n';
    return result.pricing;
}

// --- sweep ---------------------------------------------------------------------

struct SweepFlags {
    std::vector<double> spots{80, 85, 90, 95, 100, 105, 110, 115, 120};
    std::vector<double> vols{0.2, 0.4};
    std::vector<double> maturities{1.0, 2.0};
    double strike = 100.0;
    double rate = 0.04;
    std::size_t paths = 10000;
    std::size_t steps = 50;
    std::vector<std::string> estimators{"polynomial"};
};

int cmd_sweep(const Common& c, const SweepFlags& s, const EngineFlags& e, const EstimatorFlags& ef, std::ostream& out,
              std::ostream& err) {
    require_all<double>(s.spots, "spots", [](double v) { return v > 0.0 && std::isfinite(v); }, "spot prices must be > 0");
    require_all<double>(s.vols, "vols", [](double v) { return v >= 0.0 && std::isfinite(v); }, "volatilities must be >= 0");
    require_all<double>(s.maturities, "maturities", [](double v) { return v > 0.0 && std::isfinite(v); },
                        "maturities must be > 0");
    require(s.strike > 0.0, "strike", "must be > 0");
    require(std::isfinite(s.rate), "rate", "must be finite");
    require(!s.estimators.empty(), "estimator", "must not be empty");
    const OptionKind kind = parse_kind(e.kind);

    struct Cell {
        std::string estimator;
        double maturity, vol, spot;
        LsmConfig cfg;
    };
    std::vector<Cell> cells;
    for (const auto& name : s.estimators) {
        const auto est = build_estimator(name, ef, c.seed);
        const auto cfg = build_lsm(e, name, est, s.paths, s.steps, c.seed);
        for (double t : s.maturities)
            for (double v : s.vols)
                for (double spot : s.spots) cells.push_back({name, t, v, spot, cfg});
    }
    for (const auto& cell : cells) (void)build_params(e, cell.spot, s.rate, cell.vol);

    Row header{"estimator", "spot", "vol", "maturity", "price", "std_error", "european", "european_std_error",
               "degraded_steps"};
    if (!c.no_timing) header.push_back("elapsed_ms");
    std::vector<Row> rows;
    for (const auto& cell : cells) {
        const OptionSpec spec(kind, ExerciseStyle::american, s.strike, cell.maturity);
        const auto params = build_params(e, cell.spot, s.rate, cell.vol);
        const auto start = Clock::now();
        const auto american = run_lsm(spec, params, cell.cfg, err, cell.estimator);
        const double ms = elapsed_ms(start);
        const auto european = price_european_mc(spec.with_style(ExerciseStyle::european), params, s.paths, c.seed);
        Row row{cell.estimator,          format_number(cell.spot),          format_number(cell.vol),
                format_number(cell.maturity), format_number(american.price), format_number(american.std_error),
                format_number(european.price), format_number(european.std_error),
                std::to_string(american.degraded_steps)};
        if (!c.no_timing) row.push_back(format_ms(ms));
        rows.push_back(std::move(row));
    }
    write_output(c, out, header, rows);
    return kExitOk;
}

// --- compare -------------------------------------------------------------------

struct CompareFlags {
    double spot = 100.0;
    double strike = 100.0;
    double maturity = 1.0;
    double rate = 0.02;
    double vol = 0.4;
    std::size_t paths = 10000;
    std::size_t steps = 25;
    std::size_t lattice_steps = 2000;
};

int cmd_compare(const Common& c, const CompareFlags& f, const EngineFlags& e, const EstimatorFlags& ef,
                std::ostream& out, std::ostream& err) {
    require(f.spot > 0.0, "spot", "must be > 0");
    require(f.strike > 0.0, "strike", "must be > 0");
    require(f.maturity > 0.0, "maturity", "must be > 0");
    require(f.vol >= 0.0, "vol", "must be >= 0");
    require(std::isfinite(f.rate), "rate", "must be finite");
    require(f.lattice_steps >= 1, "lattice-steps", "must be >= 1");
    require(e.assets == 1, "assets", "compare prices a single asset (the lattice reference is one-dimensional)");
    const OptionSpec spec(parse_kind(e.kind), ExerciseStyle::american, f.strike, f.maturity);
    const auto params = build_params(e, f.spot, f.rate, f.vol);

    std::vector<std::pair<std::string, LsmConfig>> roster;
    for (const auto& name : estimator_names())
        roster.emplace_back(name, build_lsm(e, name, build_estimator(name, ef, c.seed), f.paths, f.steps, c.seed));

    // Every estimator sees the same simulated paths.
    const auto& first = roster.front().second;
    const auto paths = simulate_paths(params, f.paths, f.steps, f.maturity, first.scheme, c.seed);

    Row header{"method", "price", "std_error"};
    if (!c.no_timing) header.push_back("elapsed_ms");
    std::vector<Row> rows;
    auto emit = [&](const std::string& method, double price, std::optional<double> se, double ms) {
        Row row{method, format_number(price), format_number(se)};
        if (!c.no_timing) row.push_back(format_ms(ms));
        rows.push_back(std::move(row));
    };
    for (const auto& [name, cfg] : roster) {
        const auto start = Clock::now();
        const auto result = price_american_lsm(spec, params, paths, cfg);
        const double ms = elapsed_ms(start);
        for (const auto& w : result.pricing.warnings) err << "warning: " << name << ": " << w << '\n';
        emit(name, result.pricing.price, result.pricing.std_error, ms);
    }
    {
        const auto start = Clock::now();
        const double lattice = price_american_binomial(spec, f.spot, f.rate, f.vol, f.lattice_steps);
        emit("binomial", lattice, std::nullopt, elapsed_ms(start));
    }
    {
        const auto start = Clock::now();
        const auto european = price_european_mc(spec.with_style(ExerciseStyle::european), params, f.paths, c.seed);
        emit("european_mc", european.price, european.std_error, elapsed_ms(start));
    }
    write_output(c, out, header, rows);
    return kExitOk;
}

// --- price ---------------------------------------------------------------------

struct PriceFlags {
    double spot = 100.0;
    double strike = 100.0;
    double maturity = 1.0;
    double rate = 0.04;
    double vol = 0.2;
    std::size_t paths = 10000;
    std::size_t steps = 50;
    std::string estimator = "polynomial";
    std::string paths_out;
    std::string decisions_out;
};

int cmd_price(const Common& c, const PriceFlags& f, const EngineFlags& e, const EstimatorFlags& ef, std::ostream& out,
              std::ostream& err) {
    require(f.spot > 0.0, "spot", "must be > 0");
    require(f.strike > 0.0, "strike", "must be > 0");
    require(f.maturity > 0.0, "maturity", "must be > 0");
    require(f.vol >= 0.0, "vol", "must be >= 0");
    require(std::isfinite(f.rate), "rate", "must be finite");
    const OptionSpec spec(parse_kind(e.kind), ExerciseStyle::american, f.strike, f.maturity);
    const auto params = build_params(e, f.spot, f.rate, f.vol);
    auto cfg = build_lsm(e, f.estimator, build_estimator(f.estimator, ef, c.seed), f.paths, f.steps, c.seed);
    cfg.record_decisions = !f.decisions_out.empty();

    const auto paths = simulate_paths(params, f.paths, f.steps, f.maturity, cfg.scheme, c.seed);
    const auto start = Clock::now();
    const auto result = price_american_lsm(spec, params, paths, cfg);
    const double ms = elapsed_ms(start);
    for (const auto& w : result.pricing.warnings) err << "warning: " << w << '\n';

    write_aux(f.paths_out, [&](std::ostream& o) { write_paths_csv(o, paths); });
    write_aux(f.decisions_out, [&](std::ostream& o) { write_decisions_csv(o, result.records); });

    Row header{"method", "price", "std_error", "n_paths", "n_steps", "degraded_steps"};
    if (!c.no_timing) header.push_back("elapsed_ms");
    Row row{f.estimator, format_number(result.pricing.price), format_number(result.pricing.std_error),
            std::to_string(f.paths), std::to_string(f.steps), std::to_string(result.pricing.degraded_steps)};
    if (!c.no_timing) row.push_back(format_ms(ms));
    write_output(c, out, header, {row});
    return kExitOk;
}

// --- metrics -------------------------------------------------------------------

struct MetricsFlags {
    std::string input;
    std::string scores = "continuation";
    std::string labels = "label";
    double threshold = 0.5;
    std::string roc_out;
    std::string pr_out;
};

int cmd_metrics(const Common& c, const MetricsFlags& f, std::ostream& out) {
    require(f.threshold >= 0.0 && f.threshold <= 1.0, "threshold", "must lie in [0, 1]");
    auto in = open_input("input", f.input);
    CsvReader reader(in);
    std::vector<std::string> fields;
    if (!reader.next(fields)) throw UsageError("input: empty file");
    auto find = [&](const std::string& key, const std::string& name) {
        const auto it = std::find(fields.begin(), fields.end(), name);
        if (it == fields.end()) throw UsageError(key + ": column '" + name + "' not found");
        return static_cast<std::size_t>(it - fields.begin());
    };
    const auto score_col = find("scores", f.scores);
    const auto label_col = find("labels", f.labels);
    const auto width = fields.size();

    std::vector<double> scores;
    std::vector<int> labels;
    std::size_t row = 0;
    while (reader.next(fields)) {
        ++row;
        if (fields.size() == 1 && fields[0].empty()) continue;
        if (fields.size() != width)
            throw UsageError("input: row " + std::to_string(row) + " has " + std::to_string(fields.size()) +
                             " fields, expected " + std::to_string(width));
        const auto s = parse_double(fields[score_col]);
        if (!s) throw UsageError("scores: row " + std::to_string(row) + " is not a number");
        const auto l = parse_double(fields[label_col]);
        if (!l || (*l != 0.0 && *l != 1.0)) throw UsageError("labels: row " + std::to_string(row) + " is not 0 or 1");
        scores.push_back(*s);
        labels.push_back(static_cast<int>(*l));
    }
    const auto report = as_usage("scores", [&] { return classification_report(labels, scores, f.threshold); });

    write_aux(f.roc_out, [&](std::ostream& o) { write_curve_csv(o, roc_curve(labels, scores), "fpr", "tpr"); });
    write_aux(f.pr_out, [&](std::ostream& o) { write_curve_csv(o, pr_curve(labels, scores), "recall", "precision"); });
    write_output(c, out, report_header(), {report_row(report)});
    return kExitOk;
}

// --- correlate -----------------------------------------------------------------

struct IngestFlags {
    std::string input;
    bool lenient = false;
};

QuoteTable load_quotes(const IngestFlags& f, std::ostream& err) {
    auto in = open_input("input", f.input);
    QuoteTable table = as_usage("input", [&] { return parse_quotes(in, f.lenient ? ParseMode::lenient : ParseMode::strict); });
    for (const auto& d : table.diagnostics)
        err << "warning: skipped row " << d.row << " (" << to_string(d.code) << (d.column.empty() ? "" : ", " + d.column)
            << "): " << d.message << '\n';
    return table;
}

int cmd_correlate(const Common& c, const IngestFlags& f, const std::vector<std::string>& columns, std::ostream& out,
                  std::ostream& err) {
    const auto table = load_quotes(f, err);
    const auto matrix = as_usage("columns", [&] { return correlation_matrix(table, columns); });
    for (const auto& w : matrix.warnings) err << "warning: " << w << '\n';

    Row header{"feature"};
    header.insert(header.end(), matrix.columns.begin(), matrix.columns.end());
    std::vector<Row> rows;
    for (std::size_t a = 0; a < matrix.columns.size(); ++a) {
        Row row{matrix.columns[a]};
        for (const auto& v : matrix.values[a]) row.push_back(format_number(v));
        rows.push_back(std::move(row));
    }
    write_output(c, out, header, rows);
    return kExitOk;
}

// --- train ---------------------------------------------------------------------

struct TrainFlags {
    std::string target = "bid";
    std::vector<std::string> features;
    std::string cell = "gru";
    std::size_t epochs = 200;
    std::size_t batch = 64;
    std::vector<std::size_t> hidden{8};
    std::size_t dense = 0;
    std::string activation = "relu";
    double lr = 0.001;
    std::size_t window = 1;
    double train_fraction = 0.8;
    std::string history_out;
    std::string model_out;
};

int cmd_train(const Common& c, const IngestFlags& in, const TrainFlags& f, std::ostream& out, std::ostream& err) {
    NetworkConfig net;
    if (f.cell == "gru") net.cell = CellKind::gru;
    else if (f.cell == "lstm") net.cell = CellKind::lstm;
    else throw UsageError("cell: expected gru or lstm, got '" + f.cell + "'");
    if (f.activation == "relu") net.activation = Activation::relu;
    else if (f.activation == "tanh") net.activation = Activation::tanh;
    else throw UsageError("activation: expected relu or tanh, got '" + f.activation + "'");
    net.hidden_sizes = f.hidden;
    net.dense_size = f.dense;
    net.epochs = f.epochs;
    net.batch_size = f.batch;
    net.learning_rate = f.lr;
    net.window = f.window;
    net.train_fraction = f.train_fraction;
    net.seed = c.seed;
    as_usage("config", [&] {
        net.validate();
        return 0;
    });

    const auto& numeric = numeric_quote_columns();
    auto is_numeric = [&](const std::string& name) { return std::find(numeric.begin(), numeric.end(), name) != numeric.end(); };
    if (!is_numeric(f.target)) throw UsageError("target: '" + f.target + "' is not a numeric quote column");
    std::vector<std::string> features = f.features;
    if (features.empty())
        for (const auto& name : numeric)
            if (name != f.target) features.push_back(name);
    for (const auto& name : features) {
        if (!is_numeric(name)) throw UsageError("features: '" + name + "' is not a numeric quote column");
        if (name == f.target) throw UsageError("features: the target '" + name + "' cannot also be a feature");
    }

    const auto table = load_quotes(in, err);
    std::vector<const OptionQuoteRecord*> usable;
    for (const auto& r : table.records) {
        bool complete = r.numeric(f.target).has_value();
        for (const auto& name : features) complete = complete && r.numeric(name).has_value();
        if (complete) usable.push_back(&r);
    }
    if (usable.size() < table.size())
        err << "warning: dropped " << table.size() - usable.size() << " rows with missing values\n";

    Eigen::MatrixXd x(static_cast<Eigen::Index>(usable.size()), static_cast<Eigen::Index>(features.size()));
    Eigen::VectorXd y(static_cast<Eigen::Index>(usable.size()));
    for (std::size_t i = 0; i < usable.size(); ++i) {
        const auto row = static_cast<Eigen::Index>(i);
        for (std::size_t j = 0; j < features.size(); ++j) x(row, static_cast<Eigen::Index>(j)) = *usable[i]->numeric(features[j]);
        y(row) = *usable[i]->numeric(f.target);
    }

    const auto start = Clock::now();
    TrainResult result;
    try {
        result = train(net, x, y);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::Diverged) throw;
        throw UsageError(std::string("input: ") + e.what());
    }
    const double ms = elapsed_ms(start);

    write_aux(f.history_out, [&](std::ostream& o) { write_history_csv(o, result.history); });
    write_aux(f.model_out, [&](std::ostream& o) { result.model.save(o); });

    Row header{"cell", "train_rows", "validation_rows", "epochs", "mae", "mse", "rmse"};
    if (!c.no_timing) header.push_back("elapsed_ms");
    Row row{f.cell,
            std::to_string(result.train_rows.size()),
            std::to_string(result.validation_rows.size()),
            std::to_string(result.history.size()),
            format_number(result.validation_errors.mae),
            format_number(result.validation_errors.mse),
            format_number(result.validation_errors.rmse)};
    if (!c.no_timing) row.push_back(format_ms(ms));
    write_output(c, out, header, {row});
    return kExitOk;
}

// --- argument plumbing -----------------------------------------------------------

bool given_on_command_line(const std::vector<std::string>& args, const std::string& key) {
    const std::string flag = "--" + key;
    return std::any_of(args.begin(), args.end(),
                       [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
}

std::optional<std::string> config_path(const std::vector<std::string>& args) {
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw UsageError("config: missing file name");
            return args[i + 1];
        }
        if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
    }
    return std::nullopt;
}

// Appends config-file entries that the command line did not set.
std::vector<std::string> merge_config(const std::vector<std::string>& args, CLI::App& app) {
    const auto path = config_path(args);
    if (!path) return args;
    const auto sub = std::find_if(args.begin(), args.end(), [](const std::string& a) { return !a.empty() && a[0] != '-'; });
    if (sub == args.end()) throw UsageError("config: a command is required");
    CLI::App* cmd = nullptr;
    try {
        cmd = app.get_subcommand(*sub);
    } catch (const CLI::OptionNotFound&) {
        return args;  // unknown command; the parser reports it
    }

    std::vector<std::string> merged = args;
    for (const auto& [key, value] : read_config_file(*path)) {
        if (key == "config") throw UsageError("config: nested config files are not supported");
        const CLI::Option* opt = cmd->get_option_no_throw("--" + key);
        if (opt == nullptr) throw UsageError(key + ": unknown config key for '" + *sub + "'");
        if (given_on_command_line(args, key)) continue;
        if (opt->get_type_size() == 0) {
            if (value == "true" || value == "1" || value.empty()) merged.push_back("--" + key);
            else if (value != "false" && value != "0") throw UsageError(key + ": expected true or false, got '" + value + "'");
            continue;
        }
        std::istringstream tokens(value);
        std::vector<std::string> parts;
        for (std::string t; tokens >> t;) parts.push_back(t);
        if (parts.empty()) throw UsageError(key + ": missing value");
        for (const auto& p : parts) merged.push_back("--" + key + "=" + p);
    }
    return merged;
}

std::size_t resolve_threads(std::size_t requested) {
    if (requested > 0) return requested;
    return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Least-squares Monte Carlo pricing of American options with pluggable estimators", "mlsm"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Help for every command");

    Common common;
    EngineFlags engine;
    EstimatorFlags estimator;

    auto* sweep = app.add_subcommand("sweep", "Price grid over spot, volatility and maturity");
    SweepFlags sweep_flags;
    EstimatorFlags sweep_estimator;
    add_common(sweep, common);
    add_engine_flags(sweep, engine);
    add_estimator_flags(sweep, sweep_estimator);
    sweep->add_option("--spots", sweep_flags.spots, "Spot grid")->delimiter(',')->capture_default_str();
    sweep->add_option("--vols", sweep_flags.vols, "Volatility set")->delimiter(',')->capture_default_str();
    sweep->add_option("--maturities", sweep_flags.maturities, "Maturity set in years")->delimiter(',')->capture_default_str();
    sweep->add_option("--strike", sweep_flags.strike)->capture_default_str();
    sweep->add_option("--rate", sweep_flags.rate)->capture_default_str();
    sweep->add_option("--paths", sweep_flags.paths)->capture_default_str();
    sweep->add_option("--steps", sweep_flags.steps)->capture_default_str();
    sweep->add_option("--estimator", sweep_flags.estimators, "One or more estimators")->delimiter(',')->capture_default_str();

    auto* compare = app.add_subcommand("compare", "Every estimator on identical paths plus lattice and European references");
    CompareFlags compare_flags;
    add_common(compare, common);
    add_engine_flags(compare, engine);
    add_estimator_flags(compare, estimator);
    compare->add_option("--spot", compare_flags.spot)->capture_default_str();
    compare->add_option("--strike", compare_flags.strike)->capture_default_str();
    compare->add_option("--maturity", compare_flags.maturity)->capture_default_str();
    compare->add_option("--rate", compare_flags.rate)->capture_default_str();
    compare->add_option("--vol", compare_flags.vol)->capture_default_str();
    compare->add_option("--paths", compare_flags.paths)->capture_default_str();
    compare->add_option("--steps", compare_flags.steps)->capture_default_str();
    compare->add_option("--lattice-steps", compare_flags.lattice_steps)->capture_default_str();

    auto* price = app.add_subcommand("price", "Price one contract; optionally dump paths and exercise decisions");
    PriceFlags price_flags;
    add_common(price, common);
    add_engine_flags(price, engine);
    add_estimator_flags(price, estimator);
    price->add_option("--spot", price_flags.spot)->capture_default_str();
    price->add_option("--strike", price_flags.strike)->capture_default_str();
    price->add_option("--maturity", price_flags.maturity)->capture_default_str();
    price->add_option("--rate", price_flags.rate)->capture_default_str();
    price->add_option("--vol", price_flags.vol)->capture_default_str();
    price->add_option("--paths", price_flags.paths)->capture_default_str();
    price->add_option("--steps", price_flags.steps)->capture_default_str();
    price->add_option("--estimator", price_flags.estimator)->capture_default_str();
    price->add_option("--paths-out", price_flags.paths_out, "CSV dump of simulated paths");
    price->add_option("--decisions-out", price_flags.decisions_out, "CSV of exercise decisions");

    auto* metrics = app.add_subcommand("metrics", "Classification report and ROC/PR curves from a decision CSV");
    MetricsFlags metrics_flags;
    add_common(metrics, common);
    metrics->add_option("input", metrics_flags.input, "Decision CSV")->required();
    metrics->add_option("--scores", metrics_flags.scores, "Score column")->capture_default_str();
    metrics->add_option("--labels", metrics_flags.labels, "0/1 label column")->capture_default_str();
    metrics->add_option("--threshold", metrics_flags.threshold)->capture_default_str();
    metrics->add_option("--roc-out", metrics_flags.roc_out, "ROC curve CSV");
    metrics->add_option("--pr-out", metrics_flags.pr_out, "Precision-recall curve CSV");

    auto* correlate = app.add_subcommand("correlate", "Correlation matrix of numeric quote columns");
    IngestFlags ingest;
    std::vector<std::string> correlate_columns;
    add_common(correlate, common);
    correlate->add_option("input", ingest.input, "Quotes CSV")->required();
    correlate->add_option("--columns", correlate_columns, "Columns to include (default: all numeric)")->delimiter(',');
    correlate->add_flag("--lenient", ingest.lenient, "Skip bad rows instead of failing");

    auto* train_cmd = app.add_subcommand("train", "Fit a recurrent regressor to quote data");
    TrainFlags train_flags;
    add_common(train_cmd, common);
    train_cmd->add_option("input", ingest.input, "Quotes CSV")->required();
    train_cmd->add_flag("--lenient", ingest.lenient, "Skip bad rows instead of failing");
    train_cmd->add_option("--target", train_flags.target)->capture_default_str();
    train_cmd->add_option("--features", train_flags.features, "Feature columns (default: every other numeric column)")
        ->delimiter(',');
    train_cmd->add_option("--cell", train_flags.cell, "gru or lstm")->capture_default_str();
    train_cmd->add_option("--epochs", train_flags.epochs)->capture_default_str();
    train_cmd->add_option("--batch", train_flags.batch)->capture_default_str();
    train_cmd->add_option("--hidden", train_flags.hidden, "Hidden sizes, one per stacked layer")->delimiter(',')->capture_default_str();
    train_cmd->add_option("--dense", train_flags.dense, "Dense layer width (0: none)")->capture_default_str();
    train_cmd->add_option("--activation", train_flags.activation, "relu or tanh")->capture_default_str();
    train_cmd->add_option("--lr", train_flags.lr)->capture_default_str();
    train_cmd->add_option("--window", train_flags.window)->capture_default_str();
    train_cmd->add_option("--train-fraction", train_flags.train_fraction)->capture_default_str();
    train_cmd->add_option("--history-out", train_flags.history_out, "Per-epoch loss CSV");
    train_cmd->add_option("--model-out", train_flags.model_out, "Trained model file");

    try {
        auto merged = merge_config(args, app);
        std::reverse(merged.begin(), merged.end());
        app.parse(merged);
        check_common(common);
        set_worker_threads(resolve_threads(common.threads));

        if (sweep->parsed()) return cmd_sweep(common, sweep_flags, engine, sweep_estimator, out, err);
        if (compare->parsed()) return cmd_compare(common, compare_flags, engine, estimator, out, err);
        if (price->parsed()) return cmd_price(common, price_flags, engine, estimator, out, err);
        if (metrics->parsed()) return cmd_metrics(common, metrics_flags, out);
        if (correlate->parsed()) return cmd_correlate(common, ingest, correlate_columns, out, err);
        if (train_cmd->parsed()) return cmd_train(common, ingest, train_flags, out, err);
        return kExitUsage;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}

}  // namespace mlsm::cli
