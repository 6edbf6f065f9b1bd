#include "mlsm/error.hpp"
#include "mlsm/parallel.hpp"
#include "mlsm/regression.hpp"
#include "mlsm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace mlsm {
namespace {

struct Split {
    int feature = -1;
    double threshold = 0.0;
    std::size_t left_count = 0;
    double gain = 0.0;
};

class TreeBuilder {
public:
    TreeBuilder(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const TreeConfig& config,
                std::size_t features_per_split, std::uint64_t seed, std::vector<TreeNode>& nodes)
        : x_(x), y_(y), config_(config), nodes_(nodes), engine_(seed),
          features_per_split_(std::min<std::size_t>(features_per_split, static_cast<std::size_t>(x.cols()))) {}

    // Grows the subtree for rows_[begin, end).
    int build(std::vector<std::size_t>& rows, std::size_t begin, std::size_t end, std::size_t depth) {
        const int id = static_cast<int>(nodes_.size());
        nodes_.push_back(TreeNode{});
        const Range range{rows.data() + begin, rows.data() + end};
        const bool constant = constant_targets(range);
        nodes_[static_cast<std::size_t>(id)].value = constant ? target(*range.first) : mean_target(range);

        const std::size_t m = end - begin;
        const bool depth_left = !config_.max_depth || depth < *config_.max_depth;
        if (!depth_left || m < 2 * config_.min_samples_leaf || constant) return id;

        const Split split = best_split(range);
        if (split.feature < 0) return id;

        // The range is now ordered by the split feature, so the partition is a cut.
        const int l = build(rows, begin, begin + split.left_count, depth + 1);
        const int r = build(rows, begin + split.left_count, end, depth + 1);
        auto& node = nodes_[static_cast<std::size_t>(id)];
        node.feature = split.feature;
        node.threshold = split.threshold;
        node.left = l;
        node.right = r;
        return id;
    }

private:
    using Range = std::pair<std::size_t*, std::size_t*>;

    double target(std::size_t row) const { return y_(static_cast<Eigen::Index>(row)); }
    double feature(std::size_t row, int f) const { return x_(static_cast<Eigen::Index>(row), f); }

    bool constant_targets(Range rows) const {
        const double first = target(*rows.first);
        return std::all_of(rows.first, rows.second, [&](std::size_t r) { return target(r) == first; });
    }

    double mean_target(Range rows) const {
        double sum = 0.0;
        for (auto it = rows.first; it != rows.second; ++it) sum += target(*it);
        return sum / static_cast<double>(rows.second - rows.first);
    }

    std::vector<int> candidate_features() {
        const int d = static_cast<int>(x_.cols());
        std::vector<int> all(static_cast<std::size_t>(d));
        std::iota(all.begin(), all.end(), 0);
        if (features_per_split_ >= all.size()) return all;
        for (std::size_t i = 0; i < features_per_split_; ++i) {
            const std::size_t j = i + uniform_index(engine_, all.size() - i);
            std::swap(all[i], all[j]);
        }
        all.resize(features_per_split_);
        std::sort(all.begin(), all.end());
        return all;
    }

    void sort_by(Range rows, int f) const {
        const auto by_feature = [&](std::size_t a, std::size_t b) {
            const double xa = feature(a, f);
            const double xb = feature(b, f);
            return xa < xb || (xa == xb && a < b);
        };
        // Children inherit their parent's order, so often nothing to do.
        if (!std::is_sorted(rows.first, rows.second, by_feature)) std::sort(rows.first, rows.second, by_feature);
    }

    // Best cut of `rows` sorted by feature f, improving on `best`.
    bool scan(Range rows, int f, double mean, Split& best) const {
        const std::size_t m = static_cast<std::size_t>(rows.second - rows.first);
        double total = 0.0;
        for (auto it = rows.first; it != rows.second; ++it) total += target(*it) - mean;
        double left_sum = 0.0;
        bool improved = false;
        for (std::size_t s = 1; s < m; ++s) {
            left_sum += target(rows.first[s - 1]) - mean;
            const double lo = feature(rows.first[s - 1], f);
            const double hi = feature(rows.first[s], f);
            if (!(lo < hi)) continue;
            if (s < config_.min_samples_leaf || m - s < config_.min_samples_leaf) continue;
            const double right_sum = total - left_sum;
            const double gain =
                left_sum * left_sum / static_cast<double>(s) + right_sum * right_sum / static_cast<double>(m - s);
            if (gain > best.gain) {
                double threshold = lo + 0.5 * (hi - lo);
                if (!(threshold >= lo && threshold < hi)) threshold = lo;
                best = Split{f, threshold, s, gain};
                improved = true;
            }
        }
        return improved;
    }

    // Exhaustive search; leaves `rows` sorted by the winning feature.
    Split best_split(Range rows) {
        const double mean = mean_target(rows);
        const auto features = candidate_features();
        Split best;
        if (features.size() == 1) {
            sort_by(rows, features.front());
            scan(rows, features.front(), mean, best);
            return best;
        }
        std::vector<std::size_t> order(rows.first, rows.second);
        std::vector<std::size_t> best_order;
        const Range scratch{order.data(), order.data() + order.size()};
        for (int f : features) {
            sort_by(scratch, f);
            if (scan(scratch, f, mean, best)) best_order = order;
        }
        if (best.feature >= 0) std::copy(best_order.begin(), best_order.end(), rows.first);
        return best;
    }

    const Eigen::MatrixXd& x_;
    const Eigen::VectorXd& y_;
    const TreeConfig& config_;
    std::vector<TreeNode>& nodes_;
    std::mt19937_64 engine_;
    std::size_t features_per_split_;
};

std::string tree_text(const TreeConfig& c) {
    std::ostringstream out;
    out << "max_depth=";
    if (c.max_depth) out << *c.max_depth;
    else out << "unlimited";
    out << ", min_samples_leaf=" << c.min_samples_leaf;
    return out.str();
}

}  // namespace

TreeRegressor::TreeRegressor(TreeConfig config) : config_(config) { validate(EstimatorConfig{config_}); }

void TreeRegressor::fit(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets) {
    std::vector<std::size_t> rows(static_cast<std::size_t>(features.rows()));
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    fit_rows(features, targets, std::move(rows), static_cast<std::size_t>(features.cols()), 0);
}

void TreeRegressor::fit_rows(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets,
                             std::vector<std::size_t> rows, std::size_t features_per_split, std::uint64_t seed) {
    check_fit_input(features, targets);
    if (rows.empty()) fail(ErrorCode::InsufficientData, "tree: no training rows");
    fitted_ = false;
    nodes_.clear();
    n_features_ = static_cast<std::size_t>(features.cols());
    TreeBuilder builder(features, targets, config_, std::max<std::size_t>(1, features_per_split), seed, nodes_);
    builder.build(rows, 0, rows.size(), 0);
    fitted_ = true;
}

double TreeRegressor::predict_row(const Eigen::Ref<const Eigen::RowVectorXd, 0, Eigen::InnerStride<>>& x) const {
    std::size_t id = 0;
    while (nodes_[id].feature >= 0) {
        const auto& node = nodes_[id];
        id = static_cast<std::size_t>(x(node.feature) <= node.threshold ? node.left : node.right);
    }
    return nodes_[id].value;
}

Eigen::VectorXd TreeRegressor::predict(const Eigen::MatrixXd& features) const {
    check_predict_input(features);
    Eigen::VectorXd out(features.rows());
    for (Eigen::Index r = 0; r < features.rows(); ++r) out(r) = predict_row(features.row(r));
    return out;
}

std::size_t TreeRegressor::depth() const {
    std::size_t deepest = 0;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
    while (!stack.empty()) {
        auto [id, d] = stack.back();
        stack.pop_back();
        deepest = std::max(deepest, d);
        if (nodes_[id].feature >= 0) {
            stack.emplace_back(static_cast<std::size_t>(nodes_[id].left), d + 1);
            stack.emplace_back(static_cast<std::size_t>(nodes_[id].right), d + 1);
        }
    }
    return deepest;
}

std::string TreeRegressor::describe() const { return "tree(" + tree_text(config_) + ")"; }

// ---------------------------------------------------------------------------

ForestRegressor::ForestRegressor(ForestConfig config) : config_(config) { validate(EstimatorConfig{config_}); }

void ForestRegressor::fit(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets) {
    check_fit_input(features, targets);
    fitted_ = false;
    n_features_ = static_cast<std::size_t>(features.cols());
    const std::size_t n = static_cast<std::size_t>(features.rows());
    const std::size_t sample_size =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(config_.sample_fraction * static_cast<double>(n))));
    const std::size_t per_split = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(config_.feature_fraction * static_cast<double>(n_features_))));

    std::vector<TreeRegressor> trees(config_.n_trees, TreeRegressor(config_.tree));
    parallel_for(
        config_.n_trees,
        [&](std::size_t begin, std::size_t end) {
            for (std::size_t t = begin; t < end; ++t) {
                const std::uint64_t tree_seed = substream_seed(config_.seed, t);
                std::mt19937_64 engine(tree_seed);
                std::vector<std::size_t> rows;
                if (config_.bootstrap) {
                    rows.resize(sample_size);
                    for (auto& r : rows) r = uniform_index(engine, n);
                } else if (sample_size < n) {
                    rows = shuffled_indices(n, engine());
                    rows.resize(sample_size);
                } else {
                    rows.resize(n);
                    std::iota(rows.begin(), rows.end(), std::size_t{0});
                }
                trees[t].fit_rows(features, targets, std::move(rows), per_split, splitmix64(tree_seed));
            }
        },
        1);
    trees_ = std::move(trees);
    fitted_ = true;
}

Eigen::MatrixXd ForestRegressor::predict_per_tree(const Eigen::MatrixXd& features) const {
    check_predict_input(features);
    Eigen::MatrixXd out(features.rows(), static_cast<Eigen::Index>(trees_.size()));
    parallel_for(static_cast<std::size_t>(features.rows()), [&](std::size_t begin, std::size_t end) {
        // Tree-major keeps one tree's nodes in cache across the block.
        for (std::size_t t = 0; t < trees_.size(); ++t)
            for (std::size_t r = begin; r < end; ++r)
                out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(t)) =
                    trees_[t].predict_row(features.row(static_cast<Eigen::Index>(r)));
    });
    return out;
}

Eigen::VectorXd ForestRegressor::predict(const Eigen::MatrixXd& features) const {
    const Eigen::MatrixXd per_tree = predict_per_tree(features);
    Eigen::VectorXd out(features.rows());
    for (Eigen::Index r = 0; r < per_tree.rows(); ++r) {
        double sum = 0.0;
        for (Eigen::Index t = 0; t < per_tree.cols(); ++t) sum += per_tree(r, t);
        out(r) = sum / static_cast<double>(per_tree.cols());
    }
    return out;
}

std::string ForestRegressor::describe() const {
    std::ostringstream out;
    out << "forest(n_trees=" << config_.n_trees << ", bootstrap=" << (config_.bootstrap ? "true" : "false")
        << ", sample_fraction=" << config_.sample_fraction << ", feature_fraction=" << config_.feature_fraction
        << ", " << tree_text(config_.tree) << ", seed=" << config_.seed << ")";
    return out.str();
}

// ---------------------------------------------------------------------------

BoostRegressor::BoostRegressor(BoostConfig config) : config_(config) { validate(EstimatorConfig{config_}); }

void BoostRegressor::fit(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets) {
    check_fit_input(features, targets);
    fitted_ = false;
    n_features_ = static_cast<std::size_t>(features.cols());
    trees_.clear();
    rss_.clear();

    base_ = targets.mean();
    Eigen::VectorXd fitted_values = Eigen::VectorXd::Constant(targets.size(), base_);
    rss_.push_back((targets - fitted_values).squaredNorm());
    trees_.reserve(config_.n_rounds);

    // Every round sees the same features; sort once by the first one.
    std::vector<std::size_t> presorted(static_cast<std::size_t>(features.rows()));
    std::iota(presorted.begin(), presorted.end(), std::size_t{0});
    std::sort(presorted.begin(), presorted.end(), [&](std::size_t a, std::size_t b) {
        const double xa = features(static_cast<Eigen::Index>(a), 0);
        const double xb = features(static_cast<Eigen::Index>(b), 0);
        return xa < xb || (xa == xb && a < b);
    });

    for (std::size_t m = 0; m < config_.n_rounds; ++m) {
        const Eigen::VectorXd residual = targets - fitted_values;
        TreeRegressor tree(config_.tree);
        tree.fit_rows(features, residual, presorted, n_features_, 0);
        for (Eigen::Index r = 0; r < features.rows(); ++r)
            fitted_values(r) += config_.learning_rate * tree.predict_row(features.row(r));
        rss_.push_back((targets - fitted_values).squaredNorm());
        trees_.push_back(std::move(tree));
    }
    fitted_ = true;
}

Eigen::VectorXd BoostRegressor::predict(const Eigen::MatrixXd& features) const {
    check_predict_input(features);
    Eigen::VectorXd out = Eigen::VectorXd::Constant(features.rows(), base_);
    parallel_for(static_cast<std::size_t>(features.rows()), [&](std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r) {
            const auto row = features.row(static_cast<Eigen::Index>(r));
            double value = base_;
            for (const auto& tree : trees_) value += config_.learning_rate * tree.predict_row(row);
            out(static_cast<Eigen::Index>(r)) = value;
        }
    });
    return out;
}

std::string BoostRegressor::describe() const {
    std::ostringstream out;
    out << "boost(n_rounds=" << config_.n_rounds << ", learning_rate=" << config_.learning_rate << ", "
        << tree_text(config_.tree) << ")";
    return out.str();
}

}  // namespace mlsm
