#pragma once

#include "mlsm/market_model.hpp"
#include "mlsm/path_simulator.hpp"
#include "mlsm/regression.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace mlsm {

enum class UpdateRule {
    // V = h where exercised, otherwise keep the discounted downstream cashflow.
    realized_cashflow,
    // V = max(c, h) on every path in the regression set.
    continuation_value,
};

enum class RegressionScope { in_the_money_only, all_paths };

enum class DecisionMode {
    // Exercise when h > c, c fitted to discounted cashflows.
    regression,
    // Exercise when the estimator, fitted to one-step-lookahead exercise
    // labels 1{h > e^{-r dt} V(t_{i+1})}, scores above the threshold.
    classifier,
};

std::string to_string(UpdateRule rule);
std::string to_string(RegressionScope scope);
std::string to_string(DecisionMode mode);

struct LsmConfig {
    std::size_t n_paths = 10000;
    std::size_t n_steps = 50;
    EstimatorConfig estimator = PolynomialBasisConfig{};
    UpdateRule update_rule = UpdateRule::realized_cashflow;
    RegressionScope regression_scope = RegressionScope::in_the_money_only;
    DecisionMode decision_mode = DecisionMode::regression;
    double threshold = 0.5;  // classifier mode only, in (0, 1)
    std::uint64_t seed = 42;
    SteppingScheme scheme = SteppingScheme::exact_lognormal;
    bool record_decisions = false;

    void validate() const;
};

/// One path at one exercise date, as seen by the exercise rule.
struct ExerciseDecisionRecord {
    std::size_t step = 0;
    double time = 0.0;
    std::vector<double> state;
    double payoff = 0.0;
    // Continuation estimate c in regression mode; the exercise score in
    // classifier mode.
    double continuation = 0.0;
    int label = 0;  // 1 if exercised
    // 1 if exercising beats the discounted one-step-ahead cashflow, the
    // classifier's training target; ground truth when scoring decisions.
    int lookahead = 0;
};

struct LsmResult {
    PricingResult pricing;
    std::vector<ExerciseDecisionRecord> records;
};

/// Level the payoff is evaluated on: the asset itself for one asset, the
/// equally weighted basket average for several.
double basket_level(const double* state, std::size_t n_assets) noexcept;

/// Mean of discounted payoffs over exact terminal draws; std_error is the
/// sample standard deviation over sqrt(n_paths).
PricingResult price_european_mc(const OptionSpec& spec, const ModelParams& params, std::size_t n_paths,
                                std::uint64_t seed);

/// Longstaff–Schwartz backward induction with the estimator in `cfg`.
/// Exercise is considered at t_1..t_{N-1}, at maturity through the payoff,
/// and at t_0 by comparing the intrinsic value with the estimate.
LsmResult price_american_lsm(const OptionSpec& spec, const ModelParams& params, const LsmConfig& cfg);

/// Same algorithm on pre-simulated paths (cfg.n_paths, n_steps, seed and
/// scheme are taken from `paths`).
LsmResult price_american_lsm(const OptionSpec& spec, const ModelParams& params, const PathSet& paths,
                             const LsmConfig& cfg);

/// Cox–Ross–Rubinstein lattice, u = exp(vol sqrt(dt)), d = 1/u. Early
/// exercise is applied when spec.style() is american.
double price_american_binomial(const OptionSpec& spec, double spot, double rate, double vol, std::size_t n_steps);
double price_american_binomial(const OptionSpec& spec, const ModelParams& params, std::size_t n_steps);

struct ExerciseDataset {
    Eigen::MatrixXd features;  // state..., payoff, time
    std::vector<int> labels;
    std::vector<std::string> columns;
};

ExerciseDataset exercise_dataset(const std::vector<ExerciseDecisionRecord>& records);

/// Header `step,asset_state_0..,payoff,continuation,label,lookahead`.
void write_decisions_csv(std::ostream& out, const std::vector<ExerciseDecisionRecord>& records);

}  // namespace mlsm
