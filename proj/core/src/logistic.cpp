#include "mlsm/error.hpp"
#include "mlsm/regression.hpp"

#include <cmath>
#include <sstream>

namespace mlsm {

LogisticClassifier::LogisticClassifier(LogisticConfig config) : config_(config) {
    validate(EstimatorConfig{config_});
}

double LogisticClassifier::sigmoid(double z) noexcept {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double LogisticClassifier::log_likelihood(const Eigen::VectorXd& w, double b, const Eigen::MatrixXd& xs,
                                          const Eigen::VectorXd& y) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < xs.rows(); ++i) {
        const double z = xs.row(i).dot(w) + b;
        // log sigmoid(z) = -log1p(exp(-z)), written to avoid overflow for either sign.
        const double log_p = z >= 0.0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z));
        const double log_q = log_p - z;
        total += y(i) * log_p + (1.0 - y(i)) * log_q;
    }
    return total / static_cast<double>(xs.rows());
}

Eigen::VectorXd LogisticClassifier::gradient(const Eigen::VectorXd& w, double b, const Eigen::MatrixXd& xs,
                                             const Eigen::VectorXd& y) {
    const auto d = xs.cols();
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(d + 1);
    for (Eigen::Index i = 0; i < xs.rows(); ++i) {
        const double residual = y(i) - sigmoid(xs.row(i).dot(w) + b);
        grad.head(d) += residual * xs.row(i).transpose();
        grad(d) += residual;
    }
    return grad / static_cast<double>(xs.rows());
}

void LogisticClassifier::fit(const Eigen::MatrixXd& features, const Eigen::VectorXd& labels) {
    check_fit_input(features, labels);
    fitted_ = false;
    for (Eigen::Index i = 0; i < labels.size(); ++i) {
        if (labels(i) != 0.0 && labels(i) != 1.0) {
            std::ostringstream msg;
            msg << "label at row " << i << " is " << labels(i) << ", expected 0 or 1";
            fail(ErrorCode::NonBinaryLabels, msg.str());
        }
    }
    n_features_ = static_cast<std::size_t>(features.cols());
    const double n = static_cast<double>(features.rows());
    mean_ = features.colwise().mean();
    scale_ = ((features.rowwise() - mean_).array().square().colwise().sum() / n).sqrt();
    for (Eigen::Index f = 0; f < scale_.size(); ++f)
        if (!(scale_(f) > 0.0)) scale_(f) = 1.0;
    const Eigen::MatrixXd xs = (features.rowwise() - mean_).array().rowwise() / scale_.array();

    w_ = Eigen::VectorXd::Zero(features.cols());
    b_ = 0.0;
    iterations_ = 0;
    const auto d = features.cols();
    for (std::size_t it = 0; it < config_.max_iters; ++it) {
        const Eigen::VectorXd grad = gradient(w_, b_, xs, labels);
        if (grad.norm() < config_.tolerance) break;
        w_ += config_.learning_rate * grad.head(d);
        b_ += config_.learning_rate * grad(d);
        ++iterations_;
    }
    fitted_ = true;
}

Eigen::VectorXd LogisticClassifier::predict_proba(const Eigen::MatrixXd& features) const {
    check_predict_input(features);
    Eigen::VectorXd out(features.rows());
    for (Eigen::Index i = 0; i < features.rows(); ++i) {
        const Eigen::RowVectorXd xs = (features.row(i) - mean_).array() / scale_.array();
        out(i) = sigmoid(xs.dot(w_) + b_);
    }
    return out;
}

std::string LogisticClassifier::describe() const {
    std::ostringstream out;
    out << "logistic(learning_rate=" << config_.learning_rate << ", max_iters=" << config_.max_iters
        << ", tolerance=" << config_.tolerance << ")";
    return out.str();
}

}  // namespace mlsm
