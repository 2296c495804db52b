#include "botcal/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "botcal/error.hpp"

namespace botcal {
namespace {

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

void require_both_classes(std::span<const ScoredLabel> scores, const char* what) {
    bool bot = false, human = false;
    for (const auto& s : scores) {
        if (!std::isfinite(s.score)) throw ValidationError(std::string(what) + ": non-finite score");
        (s.label == Label::bot ? bot : human) = true;
    }
    if (!bot || !human) throw ValidationError(std::string(what) + " needs both classes; got a single class");
}

}  // namespace

double Calibrator::operator()(double raw) const { return sigmoid(slope * raw + intercept); }

Calibrator fit_platt(std::span<const ScoredLabel> scores, const PlattOptions& options) {
    require_both_classes(scores, "Platt scaling");

    double n_pos = 0, n_neg = 0;
    for (const auto& s : scores) (s.label == Label::bot ? n_pos : n_neg) += 1;
    const double hi = options.smooth_targets ? (n_pos + 1.0) / (n_pos + 2.0) : 1.0;
    const double lo = options.smooth_targets ? 1.0 / (n_neg + 2.0) : 0.0;

    std::vector<double> t(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) t[i] = scores[i].label == Label::bot ? hi : lo;

    auto objective = [&](double a, double b) {
        double f = 0.0;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            const double z = a * scores[i].score + b;
            f += t[i] * softplus(-z) + (1.0 - t[i]) * softplus(z);
        }
        return f;
    };

    double a = 0.0;
    double b = std::log((n_pos + 1.0) / (n_neg + 1.0));
    double fval = objective(a, b);
    double grad_norm = 0.0;
    constexpr double kRidge = 1e-12;
    constexpr double kMinStep = 1e-10;

    for (int iter = 0; iter < options.max_iterations; ++iter) {
        double ga = 0, gb = 0, h11 = kRidge, h22 = kRidge, h21 = 0;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            const double s = scores[i].score;
            const double p = sigmoid(a * s + b);
            const double w = p * (1.0 - p);
            ga += (p - t[i]) * s;
            gb += p - t[i];
            h11 += w * s * s;
            h22 += w;
            h21 += w * s;
        }
        grad_norm = std::hypot(ga, gb);

        const double det = h11 * h22 - h21 * h21;
        const double da = -(h22 * ga - h21 * gb) / det;
        const double db = -(-h21 * ga + h11 * gb) / det;
        if (!std::isfinite(da) || !std::isfinite(db)) break;
        if (std::max(std::abs(da), std::abs(db)) < options.tolerance) {
            Calibrator out{a + da, b + db, options.smooth_targets, {}};
            return out;
        }

        const double gd = ga * da + gb * db;
        double step = 1.0;
        bool moved = false;
        while (step >= kMinStep) {
            const double na = a + step * da, nb = b + step * db;
            const double nf = objective(na, nb);
            if (nf < fval + 1e-4 * step * gd) {
                const double change = std::max(std::abs(na - a), std::abs(nb - b));
                a = na;
                b = nb;
                fval = nf;
                moved = true;
                if (change < options.tolerance) return {a, b, options.smooth_targets, {}};
                break;
            }
            step *= 0.5;
        }
        if (!moved) {
            // No representable decrease left: accept when already stationary.
            if (grad_norm <= 1e-8 * std::max(1.0, static_cast<double>(scores.size()))) {
                return {a, b, options.smooth_targets, {}};
            }
            break;
        }
    }
    throw ConvergenceError("Platt scaling did not converge; final gradient norm " + std::to_string(grad_norm),
                           grad_norm);
}

double ReliabilityCurve::mean_abs_gap() const {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& b : bins) {
        if (b.empty()) continue;
        sum += static_cast<double>(b.count) * std::abs(b.positive_fraction - b.mean_score);
        n += b.count;
    }
    return n ? sum / static_cast<double>(n) : 0.0;
}

double ReliabilityCurve::max_abs_gap() const {
    double worst = 0.0;
    for (const auto& b : bins) {
        if (!b.empty()) worst = std::max(worst, std::abs(b.positive_fraction - b.mean_score));
    }
    return worst;
}

std::size_t reliability_bin(double score) {
    constexpr auto kBins = static_cast<long>(kReliabilityBins);
    long i = static_cast<long>(std::floor(score * kBins));
    i = std::clamp(i, 0L, kBins - 1);
    // Settle against the stored boundaries so i/20 <= score < (i+1)/20 holds exactly.
    while (i > 0 && score < static_cast<double>(i) / kBins) --i;
    while (i < kBins - 1 && score >= static_cast<double>(i + 1) / kBins) ++i;
    return static_cast<std::size_t>(i);
}

ReliabilityCurve reliability(std::span<const ScoredLabel> scores) {
    if (scores.empty()) throw ValidationError("reliability curve needs at least one score");
    ReliabilityCurve curve;
    std::array<double, kReliabilityBins> score_sum{}, positives{};
    for (std::size_t i = 0; i < kReliabilityBins; ++i) {
        curve.bins[i].lo = static_cast<double>(i) / kReliabilityBins;
        curve.bins[i].hi = static_cast<double>(i + 1) / kReliabilityBins;
    }
    for (const auto& s : scores) {
        if (!(s.score >= 0.0 && s.score <= 1.0)) {
            throw ValidationError("reliability scores must lie in [0,1]");
        }
        const auto b = reliability_bin(s.score);
        ++curve.bins[b].count;
        score_sum[b] += s.score;
        positives[b] += s.label == Label::bot ? 1.0 : 0.0;
    }
    for (std::size_t i = 0; i < kReliabilityBins; ++i) {
        auto& bin = curve.bins[i];
        if (bin.empty()) continue;
        bin.mean_score = score_sum[i] / static_cast<double>(bin.count);
        bin.positive_fraction = positives[i] / static_cast<double>(bin.count);
    }
    curve.total = scores.size();
    return curve;
}

DisplayScore to_display(double calibrated) {
    if (!(calibrated >= 0.0 && calibrated <= 1.0)) {
        throw ValidationError("display transform needs a calibrated score in [0,1]");
    }
    return {5.0 * calibrated};
}

double ml_threshold(std::span<const ScoredLabel> scores) {
    require_both_classes(scores, "ML threshold");

    std::vector<ScoredLabel> sorted(scores.begin(), scores.end());
    std::sort(sorted.begin(), sorted.end(), [](const auto& x, const auto& y) { return x.score < y.score; });

    struct Level {
        double value;
        std::size_t bots = 0, humans = 0;
    };
    std::vector<Level> levels;
    std::size_t total_bots = 0;
    for (const auto& s : sorted) {
        if (levels.empty() || levels.back().value != s.score) levels.push_back({s.score});
        (s.label == Label::bot ? levels.back().bots : levels.back().humans) += 1;
        total_bots += s.label == Label::bot;
    }

    // Cut j sits in the gap above levels[j-1]; cut 0 calls everything a bot.
    const std::size_t k = levels.size();
    std::size_t best_cut = 0, best_correct = total_bots;
    std::size_t humans_below = 0, bots_below = 0;
    for (std::size_t j = 1; j <= k; ++j) {
        humans_below += levels[j - 1].humans;
        bots_below += levels[j - 1].bots;
        const std::size_t correct = humans_below + (total_bots - bots_below);
        if (correct > best_correct) {
            best_correct = correct;
            best_cut = j;
        }
    }

    const double lower = best_cut == 0 ? (levels.front().value > 0.0 ? 0.0 : -1.0) : levels[best_cut - 1].value;
    const double upper = best_cut == k ? (levels.back().value < 1.0 ? 1.0 : 2.0) : levels[best_cut].value;
    double mid = lower + (upper - lower) * 0.5;
    if (!(mid < upper)) mid = lower;
    return mid;
}

}  // namespace botcal
