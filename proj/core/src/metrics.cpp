#include "mlsm/metrics.hpp"

#include "mlsm/error.hpp"
#include "mlsm/format.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

namespace mlsm {
namespace {

void check_lengths(std::size_t a, std::size_t b) {
    if (a != b) {
        std::ostringstream msg;
        msg << "length mismatch: " << a << " vs " << b;
        fail(ErrorCode::LengthMismatch, msg.str());
    }
}

void check_binary(const std::vector<int>& v, const char* what) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] != 0 && v[i] != 1) {
            std::ostringstream msg;
            msg << what << "[" << i << "] = " << v[i] << " is not 0 or 1";
            fail(ErrorCode::NonBinaryInput, msg.str());
        }
    }
}

void check_scores(const std::vector<double>& scores) {
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!(scores[i] >= 0.0 && scores[i] <= 1.0)) {
            std::ostringstream msg;
            msg << "score[" << i << "] = " << scores[i] << " outside [0, 1]";
            fail(ErrorCode::InvalidArgument, msg.str());
        }
    }
}

std::optional<double> ratio(std::size_t num, std::size_t den) {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
}

// Groups samples by distinct score, highest first, with per-group class counts.
struct ScoreGroup {
    double score;
    std::size_t positives;
    std::size_t negatives;
};

std::vector<ScoreGroup> score_groups(const std::vector<int>& labels, const std::vector<double>& scores) {
    check_lengths(labels.size(), scores.size());
    check_binary(labels, "labels");
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    std::vector<ScoreGroup> groups;
    for (std::size_t idx : order) {
        if (groups.empty() || groups.back().score != scores[idx]) groups.push_back({scores[idx], 0, 0});
        if (labels[idx] == 1) ++groups.back().positives;
        else ++groups.back().negatives;
    }
    return groups;
}

}  // namespace

RegressionErrors regression_errors(const std::vector<double>& y, const std::vector<double>& y_hat) {
    check_lengths(y.size(), y_hat.size());
    if (y.empty()) fail(ErrorCode::EmptyDataset, "regression_errors needs at least one sample");
    double abs_sum = 0.0;
    double sq_sum = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double e = y[i] - y_hat[i];
        abs_sum += std::abs(e);
        sq_sum += e * e;
    }
    const double n = static_cast<double>(y.size());
    RegressionErrors out;
    out.mae = abs_sum / n;
    out.mse = sq_sum / n;
    out.rmse = std::sqrt(out.mse);
    return out;
}

ConfusionMatrix confusion(const std::vector<int>& labels, const std::vector<int>& predicted) {
    check_lengths(labels.size(), predicted.size());
    check_binary(labels, "labels");
    check_binary(predicted, "predicted");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == 1) (predicted[i] == 1 ? cm.tp : cm.fn)++;
        else (predicted[i] == 1 ? cm.fp : cm.tn)++;
    }
    return cm;
}

std::optional<double> precision(const ConfusionMatrix& cm) noexcept { return ratio(cm.tp, cm.tp + cm.fp); }
std::optional<double> recall(const ConfusionMatrix& cm) noexcept { return ratio(cm.tp, cm.tp + cm.fn); }

std::optional<double> f1_score(const ConfusionMatrix& cm) noexcept {
    const auto p = precision(cm);
    const auto r = recall(cm);
    if (!p || !r || *p + *r == 0.0) return std::nullopt;
    return 2.0 * *p * *r / (*p + *r);
}

double accuracy(const ConfusionMatrix& cm) noexcept {
    return cm.total() == 0 ? 0.0 : static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
}

std::vector<CurvePoint> roc_curve(const std::vector<int>& labels, const std::vector<double>& scores) {
    const auto groups = score_groups(labels, scores);
    std::size_t pos = 0, neg = 0;
    for (const auto& g : groups) {
        pos += g.positives;
        neg += g.negatives;
    }
    if (pos == 0 || neg == 0) return {};
    std::vector<CurvePoint> curve;
    curve.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
    std::size_t tp = 0, fp = 0;
    for (const auto& g : groups) {
        tp += g.positives;
        fp += g.negatives;
        curve.push_back({g.score, static_cast<double>(fp) / static_cast<double>(neg),
                         static_cast<double>(tp) / static_cast<double>(pos)});
    }
    return curve;
}

std::vector<CurvePoint> pr_curve(const std::vector<int>& labels, const std::vector<double>& scores) {
    const auto groups = score_groups(labels, scores);
    std::size_t pos = 0;
    for (const auto& g : groups) pos += g.positives;
    if (pos == 0) return {};
    std::vector<CurvePoint> curve;
    std::size_t tp = 0, fp = 0;
    for (const auto& g : groups) {
        tp += g.positives;
        fp += g.negatives;
        curve.push_back({g.score, static_cast<double>(tp) / static_cast<double>(pos),
                         static_cast<double>(tp) / static_cast<double>(tp + fp)});
    }
    return curve;
}

std::optional<double> roc_auc(const std::vector<int>& labels, const std::vector<double>& scores) {
    const auto curve = roc_curve(labels, scores);
    if (curve.empty()) return std::nullopt;
    double area = 0.0;
    for (std::size_t i = 1; i < curve.size(); ++i)
        area += (curve[i].x - curve[i - 1].x) * (curve[i].y + curve[i - 1].y) * 0.5;
    return area;
}

std::optional<double> pr_auc(const std::vector<int>& labels, const std::vector<double>& scores) {
    const auto curve = pr_curve(labels, scores);
    if (curve.empty()) return std::nullopt;
    double area = 0.0;
    double previous_recall = 0.0;
    for (const auto& point : curve) {
        area += (point.x - previous_recall) * point.y;
        previous_recall = point.x;
    }
    return area;
}

ClassificationReport classification_report(const std::vector<int>& labels, const std::vector<double>& scores,
                                           double threshold) {
    check_lengths(labels.size(), scores.size());
    check_scores(scores);
    std::vector<int> predicted(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) predicted[i] = scores[i] >= threshold ? 1 : 0;

    ClassificationReport report;
    report.confusion = confusion(labels, predicted);
    report.threshold = threshold;
    report.accuracy = accuracy(report.confusion);
    report.precision = precision(report.confusion);
    report.recall = recall(report.confusion);
    report.f1 = f1_score(report.confusion);
    report.roc_auc = roc_auc(labels, scores);
    report.pr_auc = pr_auc(labels, scores);
    return report;
}

std::vector<std::string> report_header() {
    return {"n", "threshold", "tp", "tn", "fp", "fn", "accuracy", "precision", "recall", "f1", "roc_auc", "pr_auc"};
}

std::vector<std::string> report_row(const ClassificationReport& r) {
    return {std::to_string(r.confusion.total()),
            format_number(r.threshold),
            std::to_string(r.confusion.tp),
            std::to_string(r.confusion.tn),
            std::to_string(r.confusion.fp),
            std::to_string(r.confusion.fn),
            format_number(r.accuracy),
            format_number(r.precision),
            format_number(r.recall),
            format_number(r.f1),
            format_number(r.roc_auc),
            format_number(r.pr_auc)};
}

void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& curve, const std::string& x_name,
                     const std::string& y_name) {
    out << x_name << ',' << y_name << '\n';
    for (const auto& p : curve) out << format_number(p.x) << ',' << format_number(p.y) << '\n';
}

}  // namespace mlsm
