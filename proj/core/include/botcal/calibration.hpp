#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>

#include "botcal/corpus.hpp"

namespace botcal {

struct ScoredLabel {
    double score = 0.0;
    Label label = Label::human;
};

struct PlattOptions {
    bool smooth_targets = true;
    int max_iterations = 200;
    double tolerance = 1e-10;  // on the Newton step, both parameters
};

// Logistic map F(s) = 1 / (1 + exp(-(slope * s + intercept))).
struct Calibrator {
    double slope = 0.0;
    double intercept = 0.0;
    bool smoothed = true;
    std::string provenance;

    double operator()(double raw) const;
    bool operator==(const Calibrator&) const = default;
};

// Maximum-likelihood logistic fit on (score, label) pairs. Throws
// ValidationError with one class present, ConvergenceError otherwise failing.
Calibrator fit_platt(std::span<const ScoredLabel> scores, const PlattOptions& options = {});

inline double calibrate(const Calibrator& cal, double raw) { return cal(raw); }

inline constexpr std::size_t kReliabilityBins = 20;

struct ReliabilityBin {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t count = 0;
    double mean_score = 0.0;         // meaningless when count == 0
    double positive_fraction = 0.0;  // meaningless when count == 0

    bool empty() const { return count == 0; }
};

struct ReliabilityCurve {
    std::array<ReliabilityBin, kReliabilityBins> bins{};
    std::size_t total = 0;

    // Count-weighted mean |positive_fraction - mean_score| over non-empty bins.
    double mean_abs_gap() const;
    double max_abs_gap() const;
};

// Bin i is [i/20, (i+1)/20); the last bin also holds 1.0.
std::size_t reliability_bin(double score);
ReliabilityCurve reliability(std::span<const ScoredLabel> scores);

struct DisplayScore {
    double value = 0.0;  // [0, 5]
};

DisplayScore to_display(double calibrated);
inline double from_display(DisplayScore d) { return d.value / 5.0; }

// Accuracy-maximizing cut: scores above the threshold are bots. Among tied
// intervals the one with the lowest lower edge wins and its midpoint is returned.
// Interval edges outside the observed scores are 0 and 1 (or -1 and 2 when a
// score sits exactly on the boundary).
double ml_threshold(std::span<const ScoredLabel> scores);

inline bool classify_bot(double score, double threshold) { return score > threshold; }

}  // namespace botcal
