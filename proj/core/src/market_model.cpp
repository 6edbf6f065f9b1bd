#include "mlsm/market_model.hpp"

#include "mlsm/error.hpp"
#include "mlsm/path_simulator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mlsm {

std::string to_string(OptionKind kind) { return kind == OptionKind::call ? "call" : "put"; }

std::string to_string(ExerciseStyle style) {
    return style == ExerciseStyle::european ? "european" : "american";
}

OptionSpec::OptionSpec(OptionKind kind, ExerciseStyle style, double strike, double maturity)
    : kind_(kind), style_(style), strike_(strike), maturity_(maturity) {
    if (!(strike > 0.0) || !std::isfinite(strike)) fail(ErrorCode::InvalidArgument, "strike must be > 0");
    if (!(maturity > 0.0) || !std::isfinite(maturity)) fail(ErrorCode::InvalidArgument, "maturity must be > 0");
}

ModelParams::ModelParams(std::vector<double> spots, double rate, std::vector<double> vols,
                         Eigen::MatrixXd correlation)
    : spots_(std::move(spots)), rate_(rate), vols_(std::move(vols)), correlation_(std::move(correlation)) {
    const auto n = spots_.size();
    if (n == 0) fail(ErrorCode::DimensionMismatch, "model needs at least one asset");
    if (vols_.size() != n || static_cast<std::size_t>(correlation_.rows()) != n ||
        static_cast<std::size_t>(correlation_.cols()) != n) {
        std::ostringstream msg;
        msg << "dimension mismatch: " << n << " spots, " << vols_.size() << " vols, correlation "
            << correlation_.rows() << "x" << correlation_.cols();
        fail(ErrorCode::DimensionMismatch, msg.str());
    }
    if (!std::isfinite(rate_)) fail(ErrorCode::InvalidArgument, "rate must be finite");
    for (double s : spots_)
        if (!(s > 0.0) || !std::isfinite(s)) fail(ErrorCode::InvalidArgument, "spots must be > 0");
    for (double v : vols_)
        if (!(v >= 0.0) || !std::isfinite(v)) fail(ErrorCode::InvalidArgument, "vols must be >= 0");
    for (std::size_t i = 0; i < n; ++i) {
        if (correlation_(i, i) != 1.0) fail(ErrorCode::InvalidArgument, "correlation diagonal must be 1");
        for (std::size_t j = 0; j < n; ++j) {
            const double c = correlation_(i, j);
            if (!(c >= -1.0 && c <= 1.0)) fail(ErrorCode::InvalidArgument, "correlation entries must lie in [-1, 1]");
            if (c != correlation_(j, i)) fail(ErrorCode::InvalidArgument, "correlation must be symmetric");
        }
    }
    factor_ = cholesky(correlation_).lower;
}

ModelParams ModelParams::single(double spot, double rate, double vol) {
    return ModelParams({spot}, rate, {vol}, Eigen::MatrixXd::Identity(1, 1));
}

ModelParams ModelParams::uniform(std::size_t n_assets, double spot, double rate, double vol, double rho) {
    Eigen::MatrixXd corr = Eigen::MatrixXd::Constant(n_assets, n_assets, rho);
    corr.diagonal().setOnes();
    return ModelParams(std::vector<double>(n_assets, spot), rate, std::vector<double>(n_assets, vol), corr);
}

ModelParams ModelParams::with_spot(double spot) const {
    return ModelParams(std::vector<double>(spots_.size(), spot), rate_, vols_, correlation_);
}

ModelParams ModelParams::with_vol(double vol) const {
    return ModelParams(spots_, rate_, std::vector<double>(vols_.size(), vol), correlation_);
}

ModelParams ModelParams::with_rate(double rate) const { return ModelParams(spots_, rate, vols_, correlation_); }

double payoff(const OptionSpec& spec, double spot) noexcept {
    return spec.kind() == OptionKind::call ? std::max(spot - spec.strike(), 0.0)
                                           : std::max(spec.strike() - spot, 0.0);
}

double discount_factor(double rate, double t0, double t1) {
    if (t1 < t0) fail(ErrorCode::InvalidArgument, "discount_factor requires t1 >= t0");
    return std::exp(-rate * (t1 - t0));
}

double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double black_scholes_price(const OptionSpec& spec, double spot, double rate, double vol) {
    if (spec.style() != ExerciseStyle::european)
        fail(ErrorCode::InvalidArgument, "black_scholes_price prices European contracts only");
    if (!(spot > 0.0)) fail(ErrorCode::InvalidArgument, "spot must be > 0");
    if (!(vol >= 0.0)) fail(ErrorCode::InvalidArgument, "vol must be >= 0");

    const double K = spec.strike();
    const double T = spec.maturity();
    const double df = std::exp(-rate * T);
    if (vol == 0.0) return df * payoff(spec, spot / df);

    const double vol_sqrt_t = vol * std::sqrt(T);
    const double d1 = (std::log(spot / K) + (rate + 0.5 * vol * vol) * T) / vol_sqrt_t;
    const double d2 = d1 - vol_sqrt_t;
    if (spec.kind() == OptionKind::call) return spot * normal_cdf(d1) - K * df * normal_cdf(d2);
    return K * df * normal_cdf(-d2) - spot * normal_cdf(-d1);
}

}  // namespace mlsm
