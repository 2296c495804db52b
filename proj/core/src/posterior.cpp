#include "botcal/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "botcal/error.hpp"

namespace botcal {
namespace {

// Index k in 1..m of the bin ((k-1)/m, k/m] holding x; zero joins bin 1.
std::size_t bernstein_bin(double x, int m) {
    long k = static_cast<long>(std::ceil(x * m));
    k = std::clamp(k, 1L, static_cast<long>(m));
    while (k > 1 && x <= static_cast<double>(k - 1) / m) --k;
    while (k < m && x > static_cast<double>(k) / m) ++k;
    return static_cast<std::size_t>(k);
}

void check_prior(double prior) {
    if (!(prior >= 0.0 && prior <= 1.0)) {
        throw ValidationError("prior must lie in [0,1], got " + std::to_string(prior));
    }
}

}  // namespace

double BernsteinDensity::operator()(double x) const {
    if (!(x >= 0.0 && x <= 1.0)) return 0.0;
    const auto m = static_cast<std::size_t>(degree);
    const std::size_t n = m - 1;  // polynomial degree of the basis
    std::vector<double> xp(m), yp(m);
    xp[0] = yp[0] = 1.0;
    for (std::size_t j = 1; j < m; ++j) {
        xp[j] = xp[j - 1] * x;
        yp[j] = yp[j - 1] * (1.0 - x);
    }
    double binom = 1.0;
    double f = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        f += weights[j] * binom * xp[j] * yp[n - j];
        binom = binom * static_cast<double>(n - j) / static_cast<double>(j + 1);
    }
    return static_cast<double>(m) * f;
}

void BernsteinDensity::validate() const {
    if (degree < 1) throw ValidationError("Bernstein degree must be >= 1");
    if (weights.size() != static_cast<std::size_t>(degree)) {
        throw ValidationError("Bernstein density has " + std::to_string(weights.size()) +
                              " coefficients for degree " + std::to_string(degree));
    }
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw ValidationError("Bernstein coefficient must be finite and >= 0");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) throw ValidationError("Bernstein coefficients do not sum to one");
    if (score_space != "raw") throw ValidationError("CAP densities must be fit on raw scores");
}

BernsteinDensity fit_density(std::span<const double> raw_scores, int degree, Label label) {
    if (degree < 1) throw ValidationError("Bernstein degree must be >= 1");
    if (raw_scores.size() < 2) throw ValidationError("density fit needs at least 2 samples");
    std::vector<std::size_t> counts(static_cast<std::size_t>(degree), 0);
    for (double s : raw_scores) {
        if (!(s >= 0.0 && s <= 1.0)) {
            throw ValidationError("density fit: score " + std::to_string(s) + " outside [0,1]");
        }
        ++counts[bernstein_bin(s, degree) - 1];
    }
    BernsteinDensity d;
    d.degree = degree;
    d.label = label;
    d.n_samples = raw_scores.size();
    d.weights.resize(counts.size());
    const double n = static_cast<double>(raw_scores.size());
    for (std::size_t k = 0; k < counts.size(); ++k) d.weights[k] = static_cast<double>(counts[k]) / n;
    return d;
}

Prior Prior::user(double value) {
    check_prior(value);
    return {value, Source::user_supplied};
}

void CapModel::validate() const {
    bot.validate();
    human.validate();
    if (bot.label != Label::bot || human.label != Label::human) {
        throw ValidationError("CAP densities carry the wrong class tags");
    }
    check_prior(prior);
}

CapResult bayes_posterior(double prior, double likelihood_bot, double likelihood_human) {
    check_prior(prior);
    if (likelihood_bot == likelihood_human) {
        return {prior, prior, likelihood_bot == 0.0};
    }
    const double numerator = prior * likelihood_bot;
    const double denominator = numerator + (1.0 - prior) * likelihood_human;
    if (denominator == 0.0) return {prior, prior, false};
    return {std::clamp(numerator / denominator, 0.0, 1.0), prior, false};
}

CapResult cap(const CapModel& model, double raw_score, std::optional<Prior> prior_override) {
    if (!(raw_score >= 0.0 && raw_score <= 1.0)) throw ValidationError("CAP needs a raw score in [0,1]");
    const double prior = prior_override ? prior_override->value : model.prior;
    return bayes_posterior(prior, model.bot(raw_score), model.human(raw_score));
}

CapModel fit_cap(std::span<const ScoredLabel> raw_scores, int degree, double prior) {
    check_prior(prior);
    std::vector<double> bots, humans;
    for (const auto& s : raw_scores) (s.label == Label::bot ? bots : humans).push_back(s.score);
    CapModel model;
    model.bot = fit_density(bots, degree, Label::bot);
    model.human = fit_density(humans, degree, Label::human);
    model.prior = prior;
    return model;
}

std::vector<CapCurvePoint> cap_curve(const CapModel& model, std::span<const double> priors, std::size_t resolution) {
    if (priors.empty()) throw ValidationError("CAP curve needs at least one prior");
    if (resolution < 2) throw ValidationError("CAP curve resolution must be >= 2");
    for (double p : priors) check_prior(p);
    std::vector<CapCurvePoint> out;
    out.reserve(priors.size() * resolution);
    for (double p : priors) {
        for (std::size_t i = 0; i < resolution; ++i) {
            const double s = static_cast<double>(i) / static_cast<double>(resolution - 1);
            out.push_back({s, p, cap(model, s, Prior{p, Prior::Source::user_supplied}).value});
        }
    }
    return out;
}

}  // namespace botcal
