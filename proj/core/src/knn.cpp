#include "mlsm/error.hpp"
#include "mlsm/parallel.hpp"
#include "mlsm/regression.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <utility>

namespace mlsm {
namespace {

using Candidate = std::pair<double, std::size_t>;  // (squared distance, training row)

}  // namespace

KnnRegressor::KnnRegressor(KnnConfig config) : config_(config) { validate(EstimatorConfig{config_}); }

void KnnRegressor::fit(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets) {
    check_fit_input(features, targets);
    fitted_ = false;
    if (config_.k > static_cast<std::size_t>(features.rows())) {
        std::ostringstream msg;
        msg << "k = " << config_.k << " exceeds training size " << features.rows();
        fail(ErrorCode::KTooLarge, msg.str());
    }
    x_ = features;
    y_ = targets;
    n_features_ = static_cast<std::size_t>(features.cols());
    sorted_.clear();
    if (n_features_ == 1) {
        sorted_.resize(static_cast<std::size_t>(x_.rows()));
        std::iota(sorted_.begin(), sorted_.end(), std::size_t{0});
        std::sort(sorted_.begin(), sorted_.end(), [&](std::size_t a, std::size_t b) {
            const double xa = x_(static_cast<Eigen::Index>(a), 0);
            const double xb = x_(static_cast<Eigen::Index>(b), 0);
            return xa < xb || (xa == xb && a < b);
        });
    }
    fitted_ = true;
}

std::vector<std::size_t> KnnRegressor::neighbours(const Eigen::RowVectorXd& query) const {
    check_predict_input(query);
    const std::size_t n = static_cast<std::size_t>(x_.rows());
    const std::size_t k = config_.k;
    std::vector<Candidate> picked;

    if (n_features_ == 1) {
        // Merge outward from the query position in the sorted column to find
        // the k-th smallest distance, then take everything strictly closer
        // plus the lowest-index rows at exactly that distance.
        const double q = query(0);
        auto dist = [&](std::size_t pos) {
            const double diff = x_(static_cast<Eigen::Index>(sorted_[pos]), 0) - q;
            return diff * diff;
        };
        const auto it = std::lower_bound(sorted_.begin(), sorted_.end(), q, [&](std::size_t row, double value) {
            return x_(static_cast<Eigen::Index>(row), 0) < value;
        });
        std::size_t right = static_cast<std::size_t>(it - sorted_.begin());  // first candidate on the right
        std::size_t left = right;                                            // one past the next left candidate
        double kth = 0.0;
        for (std::size_t taken = 0; taken < k; ++taken) {
            const bool has_left = left > 0;
            const bool has_right = right < n;
            if (has_left && (!has_right || dist(left - 1) <= dist(right))) {
                kth = dist(--left);
            } else {
                kth = dist(right++);
            }
        }
        while (left > 0 && dist(left - 1) <= kth) --left;
        while (right < n && dist(right) <= kth) ++right;
        picked.reserve(right - left);
        for (std::size_t pos = left; pos < right; ++pos) picked.emplace_back(dist(pos), sorted_[pos]);
    } else {
        picked.reserve(n);
        for (std::size_t r = 0; r < n; ++r)
            picked.emplace_back((x_.row(static_cast<Eigen::Index>(r)) - query).squaredNorm(), r);
    }

    std::nth_element(picked.begin(), picked.begin() + static_cast<std::ptrdiff_t>(k - 1), picked.end());
    picked.resize(k);
    std::sort(picked.begin(), picked.end());
    std::vector<std::size_t> rows(k);
    for (std::size_t i = 0; i < k; ++i) rows[i] = picked[i].second;
    return rows;
}

Eigen::VectorXd KnnRegressor::predict(const Eigen::MatrixXd& features) const {
    check_predict_input(features);
    Eigen::VectorXd out(features.rows());
    parallel_for(static_cast<std::size_t>(features.rows()), [&](std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r) {
            double sum = 0.0;
            for (std::size_t row : neighbours(features.row(static_cast<Eigen::Index>(r))))
                sum += y_(static_cast<Eigen::Index>(row));
            out(static_cast<Eigen::Index>(r)) = sum / static_cast<double>(config_.k);
        }
    });
    return out;
}

std::string KnnRegressor::describe() const {
    std::ostringstream out;
    out << "knn(k=" << config_.k << ", distance=euclidean)";
    return out.str();
}

}  // namespace mlsm
