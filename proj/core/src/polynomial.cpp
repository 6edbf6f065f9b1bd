#include "mlsm/error.hpp"
#include "mlsm/regression.hpp"

#include <cmath>
#include <functional>
#include <sstream>

namespace mlsm {

std::vector<std::vector<int>> monomial_exponents(std::size_t n_features, int order) {
    std::vector<std::vector<int>> out;
    std::vector<int> current(n_features, 0);
    // Degree by degree; within a degree, earlier features take the larger power first.
    std::function<void(std::size_t, int)> place = [&](std::size_t feature, int remaining) {
        if (feature + 1 == n_features) {
            current[feature] = remaining;
            out.push_back(current);
            return;
        }
        for (int p = remaining; p >= 0; --p) {
            current[feature] = p;
            place(feature + 1, remaining - p);
        }
    };
    for (int degree = 0; degree <= order; ++degree) {
        if (n_features == 0) break;
        place(0, degree);
    }
    return out;
}

PolynomialRegressor::PolynomialRegressor(PolynomialBasisConfig config) : config_(config) {
    validate(EstimatorConfig{config_});
}

std::size_t PolynomialRegressor::basis_size(std::size_t n_features) const {
    // C(n_features + order, order)
    std::size_t size = 1;
    for (int k = 1; k <= config_.order; ++k) size = size * (n_features + static_cast<std::size_t>(k)) / static_cast<std::size_t>(k);
    return size;
}

std::size_t PolynomialRegressor::min_samples(std::size_t n_features) const { return basis_size(n_features); }

Eigen::MatrixXd PolynomialRegressor::standardize(const Eigen::MatrixXd& features) const {
    return (features.rowwise() - mean_).array().rowwise() / scale_.array();
}

Eigen::MatrixXd PolynomialRegressor::basis_matrix(const Eigen::MatrixXd& z) const {
    const auto n = z.rows();
    const auto d = z.cols();
    Eigen::MatrixXd psi(n, static_cast<Eigen::Index>(exponents_.size()));
    std::vector<double> powers(static_cast<std::size_t>(config_.order + 1));
    for (Eigen::Index r = 0; r < n; ++r) {
        psi.row(r).setOnes();
        for (Eigen::Index f = 0; f < d; ++f) {
            powers[0] = 1.0;
            for (int p = 1; p <= config_.order; ++p) powers[static_cast<std::size_t>(p)] = powers[static_cast<std::size_t>(p - 1)] * z(r, f);
            for (std::size_t k = 0; k < exponents_.size(); ++k) {
                const int e = exponents_[k][static_cast<std::size_t>(f)];
                if (e) psi(r, static_cast<Eigen::Index>(k)) *= powers[static_cast<std::size_t>(e)];
            }
        }
    }
    return psi;
}

void PolynomialRegressor::fit(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets) {
    check_fit_input(features, targets);
    fitted_ = false;
    n_features_ = static_cast<std::size_t>(features.cols());
    exponents_ = monomial_exponents(n_features_, config_.order);

    const double n = static_cast<double>(features.rows());
    mean_ = features.colwise().mean();
    scale_ = ((features.rowwise() - mean_).array().square().colwise().sum() / n).sqrt();
    for (Eigen::Index f = 0; f < scale_.size(); ++f)
        if (!(scale_(f) > 0.0)) scale_(f) = 1.0;

    const Eigen::MatrixXd psi = basis_matrix(standardize(features));
    Eigen::MatrixXd normal = (psi.transpose() * psi) / n;
    const Eigen::VectorXd rhs = (psi.transpose() * targets) / n;

    const double ridge = config_.ridge.value_or(1e-8 * normal.trace());
    for (Eigen::Index k = 1; k < normal.rows(); ++k) normal(k, k) += ridge;

    Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
    const Eigen::VectorXd pivots = ldlt.vectorD();
    const double largest = pivots.cwiseAbs().maxCoeff();
    const double smallest = pivots.minCoeff();
    if (ldlt.info() != Eigen::Success || !(largest > 0.0) || smallest <= 1e-13 * largest) {
        std::ostringstream msg;
        msg << "normal matrix is numerically singular (" << features.rows() << " samples, "
            << exponents_.size() << " basis functions, ridge " << ridge << ")";
        fail(ErrorCode::SingularSystem, msg.str());
    }
    beta_ = ldlt.solve(rhs);
    fitted_ = true;
}

Eigen::VectorXd PolynomialRegressor::predict(const Eigen::MatrixXd& features) const {
    check_predict_input(features);
    return basis_matrix(standardize(features)) * beta_;
}

Eigen::MatrixXd PolynomialRegressor::design_matrix(const Eigen::MatrixXd& features) const {
    check_predict_input(features);
    return basis_matrix(standardize(features));
}

std::string PolynomialRegressor::describe() const {
    std::ostringstream out;
    out << "polynomial(order=" << config_.order << ", ridge=";
    if (config_.ridge) out << *config_.ridge;
    else out << "auto";
    out << ")";
    return out.str();
}

}  // namespace mlsm
