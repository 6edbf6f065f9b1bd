#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <vector>

namespace mlsm {

enum class OptionKind { call, put };
enum class ExerciseStyle { european, american };

std::string to_string(OptionKind kind);
std::string to_string(ExerciseStyle style);

/// Vanilla contract: payoff kind, exercise style, strike K and maturity T (years).
class OptionSpec {
public:
    OptionSpec(OptionKind kind, ExerciseStyle style, double strike, double maturity);

    OptionKind kind() const noexcept { return kind_; }
    ExerciseStyle style() const noexcept { return style_; }
    double strike() const noexcept { return strike_; }
    double maturity() const noexcept { return maturity_; }

    /// Same contract with a different exercise style.
    OptionSpec with_style(ExerciseStyle style) const { return {kind_, style, strike_, maturity_}; }

private:
    OptionKind kind_;
    ExerciseStyle style_;
    double strike_;
    double maturity_;
};

/// Market model under the risk-neutral measure: spot prices, a constant
/// continuously-compounded rate, per-asset volatilities and the correlation
/// of the driving Brownian motions. Construction validates the correlation
/// matrix by factorizing it and keeps the lower-triangular factor.
class ModelParams {
public:
    ModelParams(std::vector<double> spots, double rate, std::vector<double> vols,
                Eigen::MatrixXd correlation);

    /// One asset.
    static ModelParams single(double spot, double rate, double vol);
    /// n assets with identical spot and vol and a constant pairwise correlation.
    static ModelParams uniform(std::size_t n_assets, double spot, double rate, double vol, double rho);

    std::size_t n_assets() const noexcept { return spots_.size(); }
    const std::vector<double>& spots() const noexcept { return spots_; }
    double rate() const noexcept { return rate_; }
    const std::vector<double>& vols() const noexcept { return vols_; }
    const Eigen::MatrixXd& correlation() const noexcept { return correlation_; }
    const Eigen::MatrixXd& cholesky_factor() const noexcept { return factor_; }

    ModelParams with_spot(double spot) const;
    ModelParams with_vol(double vol) const;
    ModelParams with_rate(double rate) const;

private:
    std::vector<double> spots_;
    double rate_;
    std::vector<double> vols_;
    Eigen::MatrixXd correlation_;
    Eigen::MatrixXd factor_;
};

struct PricingResult {
    double price = 0.0;
    double std_error = 0.0;
    std::size_t n_paths = 0;
    std::size_t n_steps = 0;
    double elapsed = 0.0;  // wall-clock seconds, non-normative
    std::string method;
    // Time steps where the continuation fit could not be made and the engine
    // fell back to "continue" on every path.
    std::size_t degraded_steps = 0;
    std::vector<std::string> warnings;
};

/// max(S - K, 0) for calls, max(K - S, 0) for puts.
double payoff(const OptionSpec& spec, double spot) noexcept;

/// exp(-rate * (t1 - t0)); rejects t1 < t0.
double discount_factor(double rate, double t0, double t1);

/// Standard normal CDF as 0.5 * erfc(-x / sqrt 2). erfc from libm is accurate
/// to a few ulp, so the absolute error is far below 1e-12 over the real line.
double normal_cdf(double x) noexcept;

/// Closed-form Black–Scholes value of a European call or put without
/// dividends. At vol = 0 returns the discounted payoff of the deterministic
/// forward S * exp(rT).
double black_scholes_price(const OptionSpec& spec, double spot, double rate, double vol);

}  // namespace mlsm
