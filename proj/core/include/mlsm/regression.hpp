#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace mlsm {

/// Uniform fit/predict surface for every continuation-value model that can
/// be plugged into the backward induction. `fit` replaces any previous fit;
/// `predict` is const and may be called concurrently once fitted.
class ContinuationEstimator {
public:
    virtual ~ContinuationEstimator() = default;

    virtual void fit(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets) = 0;
    virtual Eigen::VectorXd predict(const Eigen::MatrixXd& features) const = 0;
    virtual std::string describe() const = 0;

    /// Smallest training set the estimator can be fitted on with
    /// `n_features` columns.
    virtual std::size_t min_samples(std::size_t n_features) const;

    bool fitted() const noexcept { return fitted_; }

protected:
    void check_fit_input(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets) const;
    void check_predict_input(const Eigen::MatrixXd& features) const;

    bool fitted_ = false;
    std::size_t n_features_ = 0;
};

// ---------------------------------------------------------------------------
// Configurations

struct PolynomialBasisConfig {
    int order = 2;
    // Ridge penalty added to the non-intercept diagonal of the normal matrix.
    // nullopt selects 1e-8 * trace(normal matrix); 0 disables it.
    std::optional<double> ridge;
};

struct KnnConfig {
    std::size_t k = 10;
};

struct TreeConfig {
    std::optional<std::size_t> max_depth;  // nullopt: unlimited
    std::size_t min_samples_leaf = 1;
};

struct ForestConfig {
    std::size_t n_trees = 20;
    bool bootstrap = true;          // sample with replacement
    double sample_fraction = 1.0;   // rows per tree as a fraction of n
    double feature_fraction = 1.0;  // candidate features per split
    TreeConfig tree;
    std::uint64_t seed = 0;
};

struct BoostConfig {
    std::size_t n_rounds = 100;
    double learning_rate = 0.1;
    TreeConfig tree{3, 1};
};

struct LogisticConfig {
    double learning_rate = 0.5;
    std::size_t max_iters = 500;
    double tolerance = 1e-6;  // stop when the gradient norm falls below this
};

using EstimatorConfig =
    std::variant<PolynomialBasisConfig, KnnConfig, TreeConfig, ForestConfig, BoostConfig, LogisticConfig>;

/// Short name: polynomial, knn, tree, forest, boost, logistic.
std::string estimator_name(const EstimatorConfig& config);
void validate(const EstimatorConfig& config);
std::unique_ptr<ContinuationEstimator> make_estimator(const EstimatorConfig& config);

// ---------------------------------------------------------------------------
// Polynomial least squares on a total-degree monomial basis

/// Exponent tuples of all monomials in `n_features` variables with total
/// degree <= order, in graded lexicographic order starting with the constant.
std::vector<std::vector<int>> monomial_exponents(std::size_t n_features, int order);

/// Least-squares fit of sum_k beta_k psi_k(x). Features are centred and scaled
/// internally (the span of the basis is unchanged), and the normal equations
/// (1/n) Psi^T Psi beta = (1/n) Psi^T y are solved by an LDL^T factorization.
class PolynomialRegressor final : public ContinuationEstimator {
public:
    explicit PolynomialRegressor(PolynomialBasisConfig config = {});

    void fit(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets) override;
    Eigen::VectorXd predict(const Eigen::MatrixXd& features) const override;
    std::string describe() const override;
    std::size_t min_samples(std::size_t n_features) const override;

    std::size_t basis_size(std::size_t n_features) const;
    /// Basis functions evaluated at raw feature rows (standardized internally).
    Eigen::MatrixXd design_matrix(const Eigen::MatrixXd& features) const;
    const Eigen::VectorXd& coefficients() const noexcept { return beta_; }

private:
    Eigen::MatrixXd standardize(const Eigen::MatrixXd& features) const;
    Eigen::MatrixXd basis_matrix(const Eigen::MatrixXd& standardized) const;

    PolynomialBasisConfig config_;
    std::vector<std::vector<int>> exponents_;
    Eigen::RowVectorXd mean_;
    Eigen::RowVectorXd scale_;
    Eigen::VectorXd beta_;
};

// ---------------------------------------------------------------------------

/// k-nearest-neighbour mean under Euclidean distance. Equal distances are
/// ordered by training-row index, lower first.
class KnnRegressor final : public ContinuationEstimator {
public:
    explicit KnnRegressor(KnnConfig config = {});

    void fit(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets) override;
    Eigen::VectorXd predict(const Eigen::MatrixXd& features) const override;
    std::string describe() const override;
    std::size_t min_samples(std::size_t) const override { return config_.k; }

    /// Training-row indices of the k neighbours of `query`, nearest first.
    std::vector<std::size_t> neighbours(const Eigen::RowVectorXd& query) const;

private:
    KnnConfig config_;
    Eigen::MatrixXd x_;
    Eigen::VectorXd y_;
    std::vector<std::size_t> sorted_;  // one-feature case: rows ordered by (x, index)
};

// ---------------------------------------------------------------------------

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
};

/// CART regression tree: greedy squared-error splits at midpoints between
/// consecutive distinct feature values; x <= threshold goes left. Equal-gain
/// candidates resolve to the lower feature index, then the lower threshold.
class TreeRegressor final : public ContinuationEstimator {
public:
    explicit TreeRegressor(TreeConfig config = {});

    void fit(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets) override;
    Eigen::VectorXd predict(const Eigen::MatrixXd& features) const override;
    std::string describe() const override;

    /// Fit on a subset of rows (duplicates allowed), optionally drawing a
    /// random subset of `features_per_split` candidate features at each split.
    void fit_rows(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets, std::vector<std::size_t> rows,
                  std::size_t features_per_split, std::uint64_t seed);

    double predict_row(const Eigen::Ref<const Eigen::RowVectorXd, 0, Eigen::InnerStride<>>& x) const;
    const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
    std::size_t depth() const;

private:
    TreeConfig config_;
    std::vector<TreeNode> nodes_;
};

/// Bagged CART ensemble; tree t uses the RNG substream (seed, t), so trees
/// may be grown in parallel without changing the result.
class ForestRegressor final : public ContinuationEstimator {
public:
    explicit ForestRegressor(ForestConfig config = {});

    void fit(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets) override;
    Eigen::VectorXd predict(const Eigen::MatrixXd& features) const override;
    std::string describe() const override;

    /// n_rows x n_trees matrix of individual tree predictions.
    Eigen::MatrixXd predict_per_tree(const Eigen::MatrixXd& features) const;
    std::size_t n_trees() const noexcept { return trees_.size(); }

private:
    ForestConfig config_;
    std::vector<TreeRegressor> trees_;
};

/// Least-squares gradient boosting: F_0 = mean(y), F_m = F_{m-1} + lr * tree_m
/// where tree_m is fitted to the residuals y - F_{m-1}(X).
class BoostRegressor final : public ContinuationEstimator {
public:
    explicit BoostRegressor(BoostConfig config = {});

    void fit(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets) override;
    Eigen::VectorXd predict(const Eigen::MatrixXd& features) const override;
    std::string describe() const override;

    /// Training residual sum of squares after each round; entry 0 is F_0.
    const std::vector<double>& training_rss() const noexcept { return rss_; }

private:
    BoostConfig config_;
    double base_ = 0.0;
    std::vector<TreeRegressor> trees_;
    std::vector<double> rss_;
};

// ---------------------------------------------------------------------------

/// Binary logistic regression on internally standardized features, fitted by
/// full-batch gradient ascent on the mean log-likelihood. As an estimator,
/// `fit` requires {0,1} targets and `predict` returns P(label = 1).
class LogisticClassifier final : public ContinuationEstimator {
public:
    explicit LogisticClassifier(LogisticConfig config = {});

    void fit(const Eigen::MatrixXd& features, const Eigen::VectorXd& labels) override;
    Eigen::VectorXd predict(const Eigen::MatrixXd& features) const override { return predict_proba(features); }
    Eigen::VectorXd predict_proba(const Eigen::MatrixXd& features) const;
    std::string describe() const override;

    const Eigen::VectorXd& weights() const noexcept { return w_; }
    double bias() const noexcept { return b_; }
    std::size_t iterations() const noexcept { return iterations_; }

    /// Mean log-likelihood of labels y given standardized features xs.
    static double log_likelihood(const Eigen::VectorXd& w, double b, const Eigen::MatrixXd& xs,
                                 const Eigen::VectorXd& y);
    /// Gradient of log_likelihood with respect to (w, b); the last entry is d/db.
    static Eigen::VectorXd gradient(const Eigen::VectorXd& w, double b, const Eigen::MatrixXd& xs,
                                    const Eigen::VectorXd& y);
    static double sigmoid(double z) noexcept;

private:
    LogisticConfig config_;
    Eigen::RowVectorXd mean_;
    Eigen::RowVectorXd scale_;
    Eigen::VectorXd w_;
    double b_ = 0.0;
    std::size_t iterations_ = 0;
};

}  // namespace mlsm
