#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "botcal/calibration.hpp"
#include "botcal/corpus.hpp"

namespace botcal {

inline constexpr int kDefaultBernsteinDegree = 40;
inline constexpr double kPublishedBotPrior = 0.15;

// Density on [0, 1]:
//   f(x) = sum_{k=1..m} w_k * m * C(m-1, k-1) x^(k-1) (1-x)^(m-k)
// with w_k the empirical mass of ((k-1)/m, k/m] (the first bin also holds 0).
// Weights are nonnegative and sum to one, so f >= 0 and integrates to one.
struct BernsteinDensity {
    int degree = kDefaultBernsteinDegree;
    std::vector<double> weights;
    Label label = Label::human;
    std::size_t n_samples = 0;
    std::string score_space = "raw";

    double operator()(double x) const;
    void validate() const;
    bool operator==(const BernsteinDensity&) const = default;
};

// Throws ValidationError for fewer than 2 samples, a score outside [0,1], or degree < 1.
BernsteinDensity fit_density(std::span<const double> raw_scores, int degree = kDefaultBernsteinDegree,
                             Label label = Label::human);

struct Prior {
    enum class Source { published_default, user_supplied };

    double value = kPublishedBotPrior;
    Source source = Source::published_default;

    static Prior user(double value);  // throws ValidationError outside [0,1]
};

struct CapModel {
    BernsteinDensity bot;
    BernsteinDensity human;
    double prior = kPublishedBotPrior;

    void validate() const;
    bool operator==(const CapModel&) const = default;
};

struct CapResult {
    double value = 0.0;
    double prior_used = 0.0;
    bool degenerate_evidence = false;  // both likelihood terms vanished; value is the prior
};

// Bayes' rule with the evidence denominator expanded over both classes.
CapResult bayes_posterior(double prior, double likelihood_bot, double likelihood_human);

CapResult cap(const CapModel& model, double raw_score, std::optional<Prior> prior_override = {});

CapModel fit_cap(std::span<const ScoredLabel> raw_scores, int degree = kDefaultBernsteinDegree,
                 double prior = kPublishedBotPrior);

struct CapCurvePoint {
    double score = 0.0;
    double prior = 0.0;
    double cap = 0.0;
};

// Evenly spaced scores 0, 1/(r-1), ..., 1 for each prior, prior-major order.
std::vector<CapCurvePoint> cap_curve(const CapModel& model, std::span<const double> priors,
                                     std::size_t resolution);

}  // namespace botcal
