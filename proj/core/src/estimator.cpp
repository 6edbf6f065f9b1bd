#include "mlsm/error.hpp"
#include "mlsm/regression.hpp"

#include <cmath>
#include <sstream>

namespace mlsm {

std::size_t ContinuationEstimator::min_samples(std::size_t) const { return 1; }

void ContinuationEstimator::check_fit_input(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets) const {
    if (features.rows() != targets.size()) {
        std::ostringstream msg;
        msg << "fit: " << features.rows() << " feature rows but " << targets.size() << " targets";
        fail(ErrorCode::DimensionMismatch, msg.str());
    }
    if (features.rows() < 1) fail(ErrorCode::InsufficientData, "fit: empty training set");
    if (features.cols() < 1) fail(ErrorCode::DimensionMismatch, "fit: no feature columns");
    if (!features.allFinite() || !targets.allFinite()) fail(ErrorCode::InvalidArgument, "fit: non-finite input");
}

void ContinuationEstimator::check_predict_input(const Eigen::MatrixXd& features) const {
    if (!fitted_) fail(ErrorCode::NotFitted, "predict called before fit");
    if (static_cast<std::size_t>(features.cols()) != n_features_) {
        std::ostringstream msg;
        msg << "predict: expected " << n_features_ << " feature columns, got " << features.cols();
        fail(ErrorCode::DimensionMismatch, msg.str());
    }
}

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require(bool ok, const char* message) {
    if (!ok) fail(ErrorCode::InvalidArgument, message);
}

void validate_tree(const TreeConfig& c) {
    require(!c.max_depth || *c.max_depth >= 1, "tree max_depth must be >= 1");
    require(c.min_samples_leaf >= 1, "tree min_samples_leaf must be >= 1");
}

}  // namespace

std::string estimator_name(const EstimatorConfig& config) {
    return std::visit(overloaded{
                          [](const PolynomialBasisConfig&) { return std::string("polynomial"); },
                          [](const KnnConfig&) { return std::string("knn"); },
                          [](const TreeConfig&) { return std::string("tree"); },
                          [](const ForestConfig&) { return std::string("forest"); },
                          [](const BoostConfig&) { return std::string("boost"); },
                          [](const LogisticConfig&) { return std::string("logistic"); },
                      },
                      config);
}

void validate(const EstimatorConfig& config) {
    std::visit(overloaded{
                   [](const PolynomialBasisConfig& c) {
                       require(c.order >= 0, "polynomial order must be >= 0");
                       require(!c.ridge || (*c.ridge >= 0.0 && std::isfinite(*c.ridge)), "ridge must be >= 0");
                   },
                   [](const KnnConfig& c) { require(c.k >= 1, "knn k must be >= 1"); },
                   [](const TreeConfig& c) { validate_tree(c); },
                   [](const ForestConfig& c) {
                       require(c.n_trees >= 1, "forest n_trees must be >= 1");
                       require(c.sample_fraction > 0.0 && c.sample_fraction <= 1.0,
                               "forest sample_fraction must lie in (0, 1]");
                       require(c.feature_fraction > 0.0 && c.feature_fraction <= 1.0,
                               "forest feature_fraction must lie in (0, 1]");
                       validate_tree(c.tree);
                   },
                   [](const BoostConfig& c) {
                       require(c.learning_rate > 0.0, "boost learning_rate must be > 0");
                       validate_tree(c.tree);
                   },
                   [](const LogisticConfig& c) {
                       require(c.learning_rate > 0.0, "logistic learning_rate must be > 0");
                       require(c.max_iters >= 1, "logistic max_iters must be >= 1");
                       require(c.tolerance >= 0.0, "logistic tolerance must be >= 0");
                   },
               },
               config);
}

std::unique_ptr<ContinuationEstimator> make_estimator(const EstimatorConfig& config) {
    validate(config);
    return std::visit(
        overloaded{
            [](const PolynomialBasisConfig& c) -> std::unique_ptr<ContinuationEstimator> {
                return std::make_unique<PolynomialRegressor>(c);
            },
            [](const KnnConfig& c) -> std::unique_ptr<ContinuationEstimator> { return std::make_unique<KnnRegressor>(c); },
            [](const TreeConfig& c) -> std::unique_ptr<ContinuationEstimator> {
                return std::make_unique<TreeRegressor>(c);
            },
            [](const ForestConfig& c) -> std::unique_ptr<ContinuationEstimator> {
                return std::make_unique<ForestRegressor>(c);
            },
            [](const BoostConfig& c) -> std::unique_ptr<ContinuationEstimator> {
                return std::make_unique<BoostRegressor>(c);
            },
            [](const LogisticConfig& c) -> std::unique_ptr<ContinuationEstimator> {
                return std::make_unique<LogisticClassifier>(c);
            },
        },
        config);
}

}  // namespace mlsm
