#include "mlsm/error.hpp"
#include "mlsm/metrics.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace mlsm;

namespace {

double pairwise_auc(const std::vector<int>& labels, const std::vector<double>& scores) {
    double wins = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 1) continue;
        for (std::size_t j = 0; j < labels.size(); ++j) {
            if (labels[j] != 0) continue;
            ++pairs;
            if (scores[i] > scores[j]) wins += 1.0;
            else if (scores[i] == scores[j]) wins += 0.5;
        }
    }
    return wins / static_cast<double>(pairs);
}

}  // namespace

TEST(RegressionErrors, HandValues) {
    const auto zero = regression_errors({1, 2, 3}, {1, 2, 3});
    EXPECT_EQ(zero.mae, 0.0);
    EXPECT_EQ(zero.mse, 0.0);
    EXPECT_EQ(zero.rmse, 0.0);

    const auto e = regression_errors({1, 2}, {2, 2});
    EXPECT_EQ(e.mae, 0.5);
    EXPECT_EQ(e.mse, 0.5);
    EXPECT_NEAR(e.rmse, 0.70710678118654752, 1e-15);

    const auto f = regression_errors({0, 0, 0, 0}, {1, -1, 3, -3});
    EXPECT_EQ(f.mae, 2.0);
    EXPECT_EQ(f.mse, 5.0);
}

TEST(RegressionErrors, RmseSquaredIsMse) {
    std::mt19937_64 rng(1);
    for (int t = 0; t < 50; ++t) {
        const auto a = testing_support::random_vector(rng, 30);
        const auto b = testing_support::random_vector(rng, 30);
        const auto e = regression_errors({a.data(), a.data() + 30}, {b.data(), b.data() + 30});
        EXPECT_NEAR(e.rmse * e.rmse, e.mse, 1e-12);
    }
}

TEST(RegressionErrors, Errors) {
    EXPECT_THROW(regression_errors({1, 2}, {1}), Error);
    EXPECT_THROW(regression_errors({}, {}), Error);
}

TEST(Confusion, Basics) {
    const auto all = confusion({1, 1, 1, 1, 1}, {1, 1, 1, 1, 1});
    EXPECT_EQ(all.tp, 5u);
    EXPECT_EQ(all.tn + all.fp + all.fn, 0u);

    const std::vector<int> labels{1, 0, 1, 1, 0, 0};
    std::vector<int> flipped;
    for (int l : labels) flipped.push_back(1 - l);
    const auto none = confusion(labels, flipped);
    EXPECT_EQ(none.tp, 0u);
    EXPECT_EQ(none.tn, 0u);
    EXPECT_EQ(accuracy(none), 0.0);

    try {
        confusion({0, 2}, {0, 1});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NonBinaryInput);
    }
    EXPECT_THROW(confusion({0, 1}, {0}), Error);
}

TEST(Confusion, RecountOracleAndIdentities) {
    std::mt19937_64 rng(2);
    for (int t = 0; t < 100; ++t) {
        const std::size_t n = 1 + t * 2;
        const auto labels = testing_support::random_labels(rng, n, 0.4);
        const auto predicted = testing_support::random_labels(rng, n, 0.6);
        const auto cm = confusion(labels, predicted);
        std::size_t pos = 0, pred_pos = 0, agree = 0;
        for (std::size_t i = 0; i < n; ++i) {
            pos += labels[i];
            pred_pos += predicted[i];
            agree += labels[i] == predicted[i];
        }
        EXPECT_EQ(cm.tp + cm.fn, pos);
        EXPECT_EQ(cm.tp + cm.fp, pred_pos);
        EXPECT_EQ(cm.total(), n);
        EXPECT_EQ(accuracy(cm), static_cast<double>(agree) / static_cast<double>(n));
        const auto p = precision(cm), r = recall(cm), f = f1_score(cm);
        if (cm.tp + cm.fp == 0) EXPECT_FALSE(p.has_value());
        else EXPECT_EQ(*p, static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fp));
        if (cm.tp + cm.fn == 0) EXPECT_FALSE(r.has_value());
        else EXPECT_EQ(*r, static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn));
        if (p && r && *p + *r > 0) EXPECT_EQ(*f, 2.0 * *p * *r / (*p + *r));
    }
}

TEST(Confusion, UndefinedRatiosAreMarked) {
    ConfusionMatrix cm;
    cm.tn = 4;
    EXPECT_FALSE(precision(cm).has_value());
    EXPECT_FALSE(recall(cm).has_value());
    EXPECT_FALSE(f1_score(cm).has_value());
    EXPECT_EQ(accuracy(cm), 1.0);
}

TEST(RocAuc, MatchesExhaustivePairwiseOracle) {
    std::mt19937_64 rng(3);
    int checked = 0;
    for (int t = 0; t < 100; ++t) {
        const std::size_t n = 2 + static_cast<std::size_t>(t * 2) % 199;
        const auto labels = testing_support::random_labels(rng, n);
        const auto scores = testing_support::tied_scores(rng, n, 1 + t % 12);
        const auto auc = roc_auc(labels, scores);
        const bool both = std::count(labels.begin(), labels.end(), 1) > 0 &&
                          std::count(labels.begin(), labels.end(), 0) > 0;
        ASSERT_EQ(auc.has_value(), both);
        if (!both) continue;
        EXPECT_NEAR(*auc, pairwise_auc(labels, scores), 1e-12) << "instance " << t;
        ++checked;
    }
    EXPECT_GT(checked, 90);
}

TEST(RocAuc, DegenerateCases) {
    EXPECT_EQ(*roc_auc({0, 1, 0, 1}, {0.1, 0.9, 0.2, 0.8}), 1.0);
    EXPECT_EQ(*pr_auc({0, 1, 0, 1}, {0.1, 0.9, 0.2, 0.8}), 1.0);
    EXPECT_EQ(*roc_auc({0, 1, 0, 1}, {0.5, 0.5, 0.5, 0.5}), 0.5);
    EXPECT_EQ(*roc_auc({0, 1}, {0.9, 0.1}), 0.0);
    EXPECT_FALSE(roc_auc({1, 1, 1}, {0.1, 0.2, 0.3}).has_value());
    EXPECT_FALSE(pr_auc({0, 0}, {0.1, 0.2}).has_value());
    EXPECT_TRUE(roc_curve({1, 1}, {0.1, 0.2}).empty());
}

TEST(RocAuc, InvariantUnderMonotoneTransform) {
    std::mt19937_64 rng(4);
    const auto labels = testing_support::random_labels(rng, 150);
    const auto scores = testing_support::tied_scores(rng, 150, 20);
    std::vector<double> transformed;
    for (double s : scores) transformed.push_back(std::exp(3.0 * s) - 7.0);
    EXPECT_EQ(*roc_auc(labels, scores), *roc_auc(labels, transformed));
}

TEST(Curves, RocEndpointsAndPrOrdering) {
    std::mt19937_64 rng(5);
    const auto labels = testing_support::random_labels(rng, 80);
    const auto scores = testing_support::tied_scores(rng, 80, 10);
    const auto roc = roc_curve(labels, scores);
    ASSERT_GE(roc.size(), 2u);
    EXPECT_EQ(roc.front().x, 0.0);
    EXPECT_EQ(roc.front().y, 0.0);
    EXPECT_EQ(roc.back().x, 1.0);
    EXPECT_EQ(roc.back().y, 1.0);
    for (std::size_t i = 1; i < roc.size(); ++i) {
        EXPECT_GE(roc[i].x, roc[i - 1].x);
        EXPECT_GE(roc[i].y, roc[i - 1].y);
    }
    const auto pr = pr_curve(labels, scores);
    for (std::size_t i = 1; i < pr.size(); ++i) EXPECT_GE(pr[i].x, pr[i - 1].x);
    for (const auto& p : pr) {
        EXPECT_GE(p.y, 0.0);
        EXPECT_LE(p.y, 1.0);
    }

    std::ostringstream out;
    write_curve_csv(out, roc, "fpr", "tpr");
    EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "fpr,tpr");
}

TEST(Report, ThresholdingAndRecallMonotonicity) {
    std::mt19937_64 rng(6);
    const auto labels = testing_support::random_labels(rng, 120);
    const auto scores = testing_support::tied_scores(rng, 120, 10);
    double previous_recall = -1.0;
    for (double thr : {0.9, 0.7, 0.5, 0.3, 0.1, 0.0}) {
        const auto report = classification_report(labels, scores, thr);
        std::vector<int> predicted;
        for (double s : scores) predicted.push_back(s >= thr ? 1 : 0);
        const auto cm = confusion(labels, predicted);
        EXPECT_EQ(report.confusion.tp, cm.tp);
        EXPECT_EQ(report.confusion.fp, cm.fp);
        EXPECT_EQ(report.accuracy, accuracy(cm));
        ASSERT_TRUE(report.recall.has_value());
        EXPECT_GE(*report.recall, previous_recall);
        previous_recall = *report.recall;
    }
    EXPECT_THROW(classification_report(labels, std::vector<double>(120, 1.5)), Error);
    EXPECT_EQ(report_header().size(), report_row(classification_report(labels, scores)).size());
}

TEST(Report, SingleClassPrintsNa) {
    const auto report = classification_report({1, 1, 1}, {0.2, 0.6, 0.9});
    const auto row = report_row(report);
    const auto header = report_header();
    const auto col = std::find(header.begin(), header.end(), "roc_auc") - header.begin();
    EXPECT_EQ(row[static_cast<std::size_t>(col)], "NA");
}
