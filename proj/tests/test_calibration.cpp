#include <gtest/gtest.h>

#include <cmath>

#include "botcal/calibration.hpp"
#include "botcal/error.hpp"
#include "botcal/evaluation.hpp"
#include "botcal/random.hpp"

using namespace botcal;

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Accuracy of the rule "bot iff score > t".
double accuracy_at(std::span<const ScoredLabel> s, double t) {
    std::size_t ok = 0;
    for (const auto& x : s) ok += (x.score > t) == (x.label == Label::bot);
    return static_cast<double>(ok) / static_cast<double>(s.size());
}

std::vector<ScoredLabel> random_sample(Rng& rng, std::size_t n, int levels) {
    std::vector<ScoredLabel> out;
    for (std::size_t i = 0; i < n; ++i) {
        const double s = static_cast<double>(rng.below(static_cast<std::uint64_t>(levels) + 1)) / levels;
        out.push_back({s, rng.bernoulli(0.3 + 0.4 * s) ? Label::bot : Label::human});
    }
    out[0].label = Label::bot;
    out[1].label = Label::human;
    return out;
}

}  // namespace

TEST(Platt, SymmetricDataCentresAtOneHalf) {
    Rng rng(5);
    std::vector<ScoredLabel> data;
    for (int i = 0; i < 500; ++i) {
        const double s = rng.uniform();
        data.push_back({s, Label::bot});
        data.push_back({1.0 - s, Label::human});
    }
    const auto cal = fit_platt(data);
    EXPECT_NEAR(calibrate(cal, 0.5), 0.5, 1e-6);
}

TEST(Platt, SeparatedClassesGivePositiveSlope) {
    std::vector<ScoredLabel> data;
    for (int i = 0; i < 100; ++i) {
        data.push_back({0.9, Label::bot});
        data.push_back({0.1, Label::human});
    }
    const auto cal = fit_platt(data);
    EXPECT_GT(cal.slope, 0.0);
    EXPECT_TRUE(std::isfinite(cal.intercept));
    EXPECT_TRUE(cal.smoothed);
}

TEST(Platt, RecoversKnownSigmoid) {
    Rng rng(314159);
    std::vector<ScoredLabel> data;
    for (int i = 0; i < 100000; ++i) {
        const double s = rng.uniform();
        data.push_back({s, rng.bernoulli(sigmoid(8.0 * s - 4.0)) ? Label::bot : Label::human});
    }
    const auto cal = fit_platt(data);
    EXPECT_NEAR(cal.slope, 8.0, 0.2);
    EXPECT_NEAR(cal.intercept, -4.0, 0.2);

    const auto raw = fit_platt(data, {.smooth_targets = false});
    EXPECT_NEAR(raw.slope, 8.0, 0.2);
    EXPECT_FALSE(raw.smoothed);
}

TEST(Platt, SingleClassAndNonConvergence) {
    const std::vector<ScoredLabel> bots = {{0.1, Label::bot}, {0.7, Label::bot}};
    EXPECT_THROW(fit_platt(bots), ValidationError);

    std::vector<ScoredLabel> data;
    for (int i = 0; i < 50; ++i) data.push_back({0.01 * i, i % 3 ? Label::bot : Label::human});
    try {
        fit_platt(data, {.max_iterations = 1});
        FAIL();
    } catch (const ConvergenceError& e) {
        EXPECT_GT(e.gradient_norm(), 0.0);
        EXPECT_NE(std::string(e.what()).find("gradient norm"), std::string::npos);
    }
}

TEST(Calibrate, MonotoneWithSigmoidMidpoint) {
    const Calibrator cal{6.5, -2.75, true, {}};
    EXPECT_LT(cal(0.0), cal(1.0));
    EXPECT_DOUBLE_EQ(cal(-cal.intercept / cal.slope), 0.5);
    double prev = -1.0;
    for (int i = 0; i <= 1000; ++i) {
        const double v = cal(i / 1000.0);
        EXPECT_GT(v, prev);
        EXPECT_GT(v, 0.0);
        EXPECT_LT(v, 1.0);
        prev = v;
    }
}

TEST(Calibrate, PreservesAucExactly) {
    Rng rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        const auto raw = random_sample(rng, 300, 100);
        const auto cal = fit_platt(raw);
        ASSERT_GT(cal.slope, 0.0);
        auto calibrated = raw;
        for (auto& s : calibrated) s.score = cal(s.score);
        EXPECT_EQ(auc(raw), auc(calibrated));
    }
}

TEST(Reliability, SingleBinHalfPositive) {
    const std::vector<ScoredLabel> data = {{0.41, Label::bot}, {0.42, Label::human}, {0.43, Label::bot},
                                           {0.44, Label::human}};
    const auto curve = reliability(data);
    for (std::size_t i = 0; i < kReliabilityBins; ++i) {
        if (i == 8) {
            EXPECT_EQ(curve.bins[i].count, 4u);
            EXPECT_EQ(curve.bins[i].positive_fraction, 0.5);
            EXPECT_NEAR(curve.bins[i].mean_score, 0.425, 1e-15);
        } else {
            EXPECT_TRUE(curve.bins[i].empty());
        }
    }
    EXPECT_EQ(curve.total, 4u);
}

TEST(Reliability, BinBoundaries) {
    EXPECT_EQ(reliability_bin(1.0), 19u);
    EXPECT_EQ(reliability_bin(0.0), 0u);
    EXPECT_EQ(reliability_bin(0.05), 1u);
    EXPECT_EQ(reliability_bin(std::nextafter(0.05, 0.0)), 0u);
    for (int i = 0; i < 20; ++i) {
        const double edge = static_cast<double>(i) / 20.0;
        EXPECT_EQ(reliability_bin(edge), static_cast<std::size_t>(i));
        if (i > 0) EXPECT_EQ(reliability_bin(std::nextafter(edge, 0.0)), static_cast<std::size_t>(i - 1));
    }
    // Scores of the form k/100 (forest outputs) always land in the bin that contains them.
    for (int k = 0; k <= 100; ++k) {
        const double s = k / 100.0;
        const auto b = reliability_bin(s);
        EXPECT_LE(static_cast<double>(b) / 20.0, s);
        if (b < 19) EXPECT_LT(s, static_cast<double>(b + 1) / 20.0);
    }
}

TEST(Reliability, CountsPartitionTheSample) {
    Rng rng(77);
    const auto data = random_sample(rng, 1000, 100);
    const auto curve = reliability(data);
    std::size_t total = 0;
    for (std::size_t i = 0; i < kReliabilityBins; ++i) {
        total += curve.bins[i].count;
        EXPECT_EQ(curve.bins[i].lo, static_cast<double>(i) / 20.0);
        EXPECT_EQ(curve.bins[i].hi, static_cast<double>(i + 1) / 20.0);
    }
    EXPECT_EQ(total, data.size());
}

TEST(Reliability, PerfectlyCalibratedData) {
    Rng rng(2718);
    std::vector<ScoredLabel> data;
    for (int i = 0; i < 100000; ++i) {
        const double s = rng.uniform();
        data.push_back({s, rng.bernoulli(s) ? Label::bot : Label::human});
    }
    EXPECT_LT(reliability(data).max_abs_gap(), 0.02);
}

TEST(Reliability, RejectsBadInput) {
    EXPECT_THROW(reliability(std::vector<ScoredLabel>{}), ValidationError);
    EXPECT_THROW(reliability(std::vector<ScoredLabel>{{1.5, Label::bot}}), ValidationError);
    EXPECT_THROW(reliability(std::vector<ScoredLabel>{{std::nan(""), Label::bot}}), ValidationError);
}

TEST(Display, LinearMap) {
    EXPECT_EQ(to_display(0.5).value, 2.5);
    EXPECT_EQ(to_display(0.0).value, 0.0);
    EXPECT_EQ(to_display(1.0).value, 5.0);
    EXPECT_THROW(to_display(1.0000001), ValidationError);
    EXPECT_THROW(to_display(-0.1), ValidationError);
    Rng rng(1);
    for (int i = 0; i < 1000; ++i) {
        const double c = rng.uniform();
        EXPECT_NEAR(from_display(to_display(c)), c, 1e-12);
        const DisplayScore d{rng.uniform(0.0, 5.0)};
        EXPECT_NEAR(to_display(from_display(d)).value, d.value, 1e-12);
    }
}

TEST(MlThreshold, WorkedExample) {
    const std::vector<ScoredLabel> data = {{0.9, Label::bot}, {0.8, Label::bot}, {0.2, Label::human},
                                           {0.3, Label::human}};
    EXPECT_DOUBLE_EQ(ml_threshold(data), 0.55);
}

TEST(MlThreshold, AllTiedPicksLowestInterval) {
    const std::vector<ScoredLabel> data = {{0.5, Label::bot}, {0.5, Label::human}, {0.5, Label::bot},
                                           {0.5, Label::human}};
    EXPECT_EQ(ml_threshold(data), 0.25);
    EXPECT_EQ(accuracy_at(data, ml_threshold(data)), 0.5);

    const std::vector<ScoredLabel> edge = {{0.0, Label::bot}, {0.0, Label::human}};
    EXPECT_EQ(ml_threshold(edge), -0.5);
}

TEST(MlThreshold, MatchesExhaustiveSearch) {
    Rng rng(55);
    for (int trial = 0; trial < 200; ++trial) {
        const auto data = random_sample(rng, 2 + rng.below(60), 10);
        std::vector<double> values;
        for (const auto& s : data) values.push_back(s.score);
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        std::vector<double> candidates = {values.front() - 0.5};
        for (std::size_t i = 0; i + 1 < values.size(); ++i) candidates.push_back((values[i] + values[i + 1]) / 2);
        candidates.push_back(values.back() + 0.5);
        double best = 0.0;
        for (double c : candidates) best = std::max(best, accuracy_at(data, c));

        const double t = ml_threshold(data);
        EXPECT_EQ(accuracy_at(data, t), best);
        const auto bots = static_cast<std::size_t>(
            std::count_if(data.begin(), data.end(), [](auto& s) { return s.label == Label::bot; }));
        const auto majority = std::max(bots, data.size() - bots);
        EXPECT_GE(accuracy_at(data, t), static_cast<double>(majority) / static_cast<double>(data.size()));
    }
}

TEST(MlThreshold, SingleClassIsAnError) {
    EXPECT_THROW(ml_threshold(std::vector<ScoredLabel>{{0.2, Label::human}}), ValidationError);
}
