#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mlsm {

struct RegressionErrors {
    double mae = 0.0;
    double mse = 0.0;
    double rmse = 0.0;
};

RegressionErrors regression_errors(const std::vector<double>& y, const std::vector<double>& y_hat);

struct ConfusionMatrix {
    std::size_t tp = 0;
    std::size_t tn = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;

    std::size_t total() const noexcept { return tp + tn + fp + fn; }
};

ConfusionMatrix confusion(const std::vector<int>& labels, const std::vector<int>& predicted);

// Undefined ratios (0/0) are nullopt, never a number.
std::optional<double> precision(const ConfusionMatrix& cm) noexcept;
std::optional<double> recall(const ConfusionMatrix& cm) noexcept;
std::optional<double> f1_score(const ConfusionMatrix& cm) noexcept;
double accuracy(const ConfusionMatrix& cm) noexcept;

struct CurvePoint {
    double threshold = 0.0;
    double x = 0.0;  // FPR for ROC, recall for PR
    double y = 0.0;  // TPR for ROC, precision for PR
};

/// ROC points from (0, 0) through every distinct score (descending) to (1, 1).
/// Empty when either class is absent.
std::vector<CurvePoint> roc_curve(const std::vector<int>& labels, const std::vector<double>& scores);
/// Precision–recall points at every distinct score, recall ascending. Empty
/// when there are no positives.
std::vector<CurvePoint> pr_curve(const std::vector<int>& labels, const std::vector<double>& scores);

/// Trapezoidal area under the ROC curve; tied scores contribute one half.
/// nullopt for single-class labels.
std::optional<double> roc_auc(const std::vector<int>& labels, const std::vector<double>& scores);
/// Step-wise area under the PR curve: sum over distinct thresholds of
/// (R_k - R_{k-1}) * P_k. Linear interpolation between PR points is not used
/// because it overstates the area.
std::optional<double> pr_auc(const std::vector<int>& labels, const std::vector<double>& scores);

struct ClassificationReport {
    ConfusionMatrix confusion;
    double threshold = 0.5;
    double accuracy = 0.0;
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> f1;
    std::optional<double> roc_auc;
    std::optional<double> pr_auc;
};

/// Scores in [0, 1]; a sample is predicted positive when score >= threshold.
ClassificationReport classification_report(const std::vector<int>& labels, const std::vector<double>& scores,
                                           double threshold = 0.5);

std::vector<std::string> report_header();
std::vector<std::string> report_row(const ClassificationReport& report);
void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& curve, const std::string& x_name,
                     const std::string& y_name);

}  // namespace mlsm
