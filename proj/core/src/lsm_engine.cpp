#include "mlsm/lsm_engine.hpp"

#include "mlsm/error.hpp"
#include "mlsm/format.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <sstream>

namespace mlsm {

std::string to_string(UpdateRule rule) {
    return rule == UpdateRule::realized_cashflow ? "realized_cashflow" : "continuation_value";
}

std::string to_string(RegressionScope scope) {
    return scope == RegressionScope::in_the_money_only ? "in_the_money_only" : "all_paths";
}

std::string to_string(DecisionMode mode) { return mode == DecisionMode::regression ? "regression" : "classifier"; }

void LsmConfig::validate() const {
    if (n_paths < 2) fail(ErrorCode::InvalidArgument, "n_paths must be >= 2");
    if (n_steps < 1) fail(ErrorCode::InvalidArgument, "n_steps must be >= 1");
    if (decision_mode == DecisionMode::classifier) {
        if (!(threshold > 0.0 && threshold < 1.0)) fail(ErrorCode::InvalidArgument, "threshold must lie in (0, 1)");
        if (update_rule == UpdateRule::continuation_value)
            fail(ErrorCode::InvalidArgument, "continuation_value update needs a regression decision mode");
    }
    mlsm::validate(estimator);
}

double basket_level(const double* state, std::size_t n_assets) noexcept {
    if (n_assets == 1) return state[0];
    double sum = 0.0;
    for (std::size_t i = 0; i < n_assets; ++i) sum += state[i];
    return sum / static_cast<double>(n_assets);
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct MeanAndError {
    double mean;
    double std_error;
};

// Two-pass sample statistics in index order.
MeanAndError sample_stats(const std::vector<double>& values) {
    const double n = static_cast<double>(values.size());
    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / n;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double variance = values.size() > 1 ? ss / (n - 1.0) : 0.0;
    return {mean, std::sqrt(variance / n)};
}

bool is_degenerate_fit(ErrorCode code) {
    return code == ErrorCode::SingularSystem || code == ErrorCode::KTooLarge || code == ErrorCode::InsufficientData;
}

}  // namespace

PricingResult price_european_mc(const OptionSpec& spec, const ModelParams& params, std::size_t n_paths,
                                std::uint64_t seed) {
    if (spec.style() != ExerciseStyle::european)
        fail(ErrorCode::InvalidArgument, "price_european_mc prices European contracts only");
    if (n_paths < 1) fail(ErrorCode::InvalidArgument, "n_paths must be >= 1");
    const auto start = Clock::now();

    const Eigen::MatrixXd terminal = simulate_terminal(params, n_paths, spec.maturity(), seed);
    const double df = discount_factor(params.rate(), 0.0, spec.maturity());
    std::vector<double> discounted(n_paths);
    std::vector<double> row(params.n_assets());
    for (std::size_t p = 0; p < n_paths; ++p) {
        for (std::size_t i = 0; i < row.size(); ++i) row[i] = terminal(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(i));
        discounted[p] = df * payoff(spec, basket_level(row.data(), row.size()));
    }
    const auto stats = sample_stats(discounted);

    PricingResult result;
    result.price = stats.mean;
    result.std_error = stats.std_error;
    result.n_paths = n_paths;
    result.n_steps = 1;
    result.method = "european_mc";
    result.elapsed = seconds_since(start);
    return result;
}

LsmResult price_american_lsm(const OptionSpec& spec, const ModelParams& params, const LsmConfig& cfg) {
    cfg.validate();
    const auto start = Clock::now();
    const PathSet paths = simulate_paths(params, cfg.n_paths, cfg.n_steps, spec.maturity(), cfg.scheme, cfg.seed);
    LsmResult result = price_american_lsm(spec, params, paths, cfg);
    result.pricing.elapsed = seconds_since(start);
    return result;
}

LsmResult price_american_lsm(const OptionSpec& spec, const ModelParams& params, const PathSet& paths,
                             const LsmConfig& cfg) {
    if (spec.style() != ExerciseStyle::american)
        fail(ErrorCode::InvalidArgument, "price_american_lsm prices American contracts only");
    LsmConfig effective = cfg;
    effective.n_paths = paths.n_paths();
    effective.n_steps = paths.n_steps();
    effective.validate();
    if (paths.n_assets() != params.n_assets())
        fail(ErrorCode::DimensionMismatch, "path set and model disagree on the number of assets");
    const auto start = Clock::now();

    const std::size_t n_paths = paths.n_paths();
    const std::size_t n_steps = paths.n_steps();
    const std::size_t n_assets = paths.n_assets();
    const double step_discount = std::exp(-params.rate() * paths.dt());
    auto estimator = make_estimator(cfg.estimator);

    LsmResult result;
    auto& pricing = result.pricing;
    pricing.method = estimator->describe();

    auto intrinsic = [&](std::size_t p, std::size_t step) {
        return payoff(spec, basket_level(&paths.raw()[(p * (n_steps + 1) + step) * n_assets], n_assets));
    };

    std::vector<double> value(n_paths);
    for (std::size_t p = 0; p < n_paths; ++p) value[p] = intrinsic(p, n_steps);

    std::vector<double> exercise_value(n_paths);
    std::vector<std::size_t> selected;
    selected.reserve(n_paths);
    for (std::size_t step = n_steps - 1; step >= 1; --step) {
        for (auto& v : value) v *= step_discount;

        selected.clear();
        for (std::size_t p = 0; p < n_paths; ++p) {
            exercise_value[p] = intrinsic(p, step);
            if (cfg.regression_scope == RegressionScope::all_paths || exercise_value[p] > 0.0) selected.push_back(p);
        }

        auto degrade = [&](const std::string& why) {
            ++pricing.degraded_steps;
            std::ostringstream msg;
            msg << "step " << step << ": " << why << "; no exercise at this step";
            pricing.warnings.push_back(msg.str());
        };

        if (selected.empty()) continue;
        if (selected.size() < estimator->min_samples(n_assets)) {
            std::ostringstream why;
            why << "degenerate regression, " << selected.size() << " samples for "
                << estimator->min_samples(n_assets) << " required";
            degrade(why.str());
            continue;
        }

        const auto m = static_cast<Eigen::Index>(selected.size());
        Eigen::MatrixXd x(m, static_cast<Eigen::Index>(n_assets));
        Eigen::VectorXd target(m);
        for (Eigen::Index k = 0; k < m; ++k) {
            const std::size_t p = selected[static_cast<std::size_t>(k)];
            for (std::size_t i = 0; i < n_assets; ++i) x(k, static_cast<Eigen::Index>(i)) = paths.value(p, step, i);
            if (cfg.decision_mode == DecisionMode::regression) {
                target(k) = value[p];
            } else {
                target(k) = exercise_value[p] > 0.0 && exercise_value[p] > value[p] ? 1.0 : 0.0;
            }
        }

        Eigen::VectorXd estimate;
        try {
            estimator->fit(x, target);
            estimate = estimator->predict(x);
        } catch (const Error& e) {
            if (is_degenerate_fit(e.code())) {
                degrade(e.what());
                continue;
            }
            std::ostringstream msg;
            msg << "estimator " << estimator->describe() << " failed at step " << step << ": " << e.what();
            fail(ErrorCode::EstimatorFailure, msg.str());
        }

        for (Eigen::Index k = 0; k < m; ++k) {
            const std::size_t p = selected[static_cast<std::size_t>(k)];
            const double h = exercise_value[p];
            const double c = estimate(k);
            const bool exercise = h > 0.0 && (cfg.decision_mode == DecisionMode::regression ? h > c : c > cfg.threshold);
            const bool lookahead = h > 0.0 && h > value[p];

            if (cfg.update_rule == UpdateRule::continuation_value) {
                value[p] = std::max(c, h);
            } else if (exercise) {
                value[p] = h;
            }
            if (cfg.record_decisions) {
                ExerciseDecisionRecord record;
                record.step = step;
                record.time = paths.t_grid()[step];
                record.state.resize(n_assets);
                for (std::size_t i = 0; i < n_assets; ++i) record.state[i] = paths.value(p, step, i);
                record.payoff = h;
                record.continuation = c;
                record.label = exercise ? 1 : 0;
                record.lookahead = lookahead ? 1 : 0;
                result.records.push_back(std::move(record));
            }
        }
    }

    for (auto& v : value) v *= step_discount;
    const auto stats = sample_stats(value);
    const double immediate = payoff(spec, basket_level(params.spots().data(), n_assets));
    if (immediate > stats.mean) {
        pricing.price = immediate;
        pricing.std_error = 0.0;
    } else {
        pricing.price = stats.mean;
        pricing.std_error = stats.std_error;
    }
    pricing.n_paths = n_paths;
    pricing.n_steps = n_steps;
    pricing.elapsed = seconds_since(start);
    return result;
}

double price_american_binomial(const OptionSpec& spec, double spot, double rate, double vol, std::size_t n_steps) {
    if (n_steps < 1) fail(ErrorCode::InvalidArgument, "n_steps must be >= 1");
    if (!(spot > 0.0)) fail(ErrorCode::InvalidArgument, "spot must be > 0");
    if (!(vol >= 0.0)) fail(ErrorCode::InvalidArgument, "vol must be >= 0");
    const bool american = spec.style() == ExerciseStyle::american;
    const double dt = spec.maturity() / static_cast<double>(n_steps);

    if (vol == 0.0) {
        // Deterministic forward; the best exercise date is found by enumeration.
        const double at_maturity = std::exp(-rate * spec.maturity()) * payoff(spec, spot * std::exp(rate * spec.maturity()));
        if (!american) return at_maturity;
        double best = at_maturity;
        for (std::size_t k = 0; k < n_steps; ++k) {
            const double t = static_cast<double>(k) * dt;
            best = std::max(best, std::exp(-rate * t) * payoff(spec, spot * std::exp(rate * t)));
        }
        return best;
    }

    const double up = std::exp(vol * std::sqrt(dt));
    const double down = 1.0 / up;
    const double growth = std::exp(rate * dt);
    const double p_up = (growth - down) / (up - down);
    if (!(p_up > 0.0 && p_up < 1.0))
        fail(ErrorCode::InvalidArgument, "lattice probabilities outside (0, 1); increase n_steps");
    const double df = 1.0 / growth;

    std::vector<double> v(n_steps + 1);
    for (std::size_t j = 0; j <= n_steps; ++j)
        v[j] = payoff(spec, spot * std::pow(up, 2.0 * static_cast<double>(j) - static_cast<double>(n_steps)));
    for (std::size_t level = n_steps; level-- > 0;) {
        for (std::size_t j = 0; j <= level; ++j) {
            const double cont = df * (p_up * v[j + 1] + (1.0 - p_up) * v[j]);
            v[j] = american
                       ? std::max(cont, payoff(spec, spot * std::pow(up, 2.0 * static_cast<double>(j) - static_cast<double>(level))))
                       : cont;
        }
    }
    return v[0];
}

double price_american_binomial(const OptionSpec& spec, const ModelParams& params, std::size_t n_steps) {
    if (params.n_assets() != 1) fail(ErrorCode::DimensionMismatch, "binomial lattice supports a single asset only");
    return price_american_binomial(spec, params.spots()[0], params.rate(), params.vols()[0], n_steps);
}

ExerciseDataset exercise_dataset(const std::vector<ExerciseDecisionRecord>& records) {
    if (records.empty()) fail(ErrorCode::EmptyDataset, "no exercise decision records");
    const std::size_t d = records.front().state.size();
    ExerciseDataset out;
    out.features.resize(static_cast<Eigen::Index>(records.size()), static_cast<Eigen::Index>(d + 2));
    out.labels.reserve(records.size());
    for (std::size_t i = 0; i < d; ++i) out.columns.push_back("asset_state_" + std::to_string(i));
    out.columns.push_back("payoff");
    out.columns.push_back("time");
    for (std::size_t r = 0; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.state.size() != d) fail(ErrorCode::DimensionMismatch, "records disagree on state dimension");
        const auto row = static_cast<Eigen::Index>(r);
        for (std::size_t i = 0; i < d; ++i) out.features(row, static_cast<Eigen::Index>(i)) = rec.state[i];
        out.features(row, static_cast<Eigen::Index>(d)) = rec.payoff;
        out.features(row, static_cast<Eigen::Index>(d + 1)) = rec.time;
        out.labels.push_back(rec.label != 0 ? 1 : 0);
    }
    return out;
}

void write_decisions_csv(std::ostream& out, const std::vector<ExerciseDecisionRecord>& records) {
    const std::size_t d = records.empty() ? 1 : records.front().state.size();
    out << "step";
    for (std::size_t i = 0; i < d; ++i) out << ",asset_state_" << i;
    out << ",payoff,continuation,label,lookahead\n";
    for (const auto& rec : records) {
        out << rec.step;
        for (double s : rec.state) out << ',' << format_number(s);
        out << ',' << format_number(rec.payoff) << ',' << format_number(rec.continuation) << ',' << rec.label << ','
            << rec.lookahead << '\n';
    }
}

}  // namespace mlsm
