#pragma once

#include <algorithm>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "botcal/calibration.hpp"

// Independent brute-force references shared by unit and acceptance tests.
namespace botcal::oracle {

inline double brute_force_auc(std::span<const ScoredLabel> s) {
    double wins = 0.0, pairs = 0.0;
    for (const auto& b : s) {
        if (b.label != Label::bot) continue;
        for (const auto& h : s) {
            if (h.label != Label::human) continue;
            pairs += 1.0;
            wins += b.score > h.score ? 1.0 : (b.score == h.score ? 0.5 : 0.0);
        }
    }
    return wins / pairs;
}

// Exhaustive CART on a handful of points: at every node try every feature and
// every midpoint between distinct values, keep the split with the lowest
// weighted Gini impurity (exact rational comparison), ties to the lower
// feature and then the lower threshold.
struct OracleNode {
    bool leaf = true;
    bool bot = false;
    std::size_t feature = 0;
    double threshold = 0.0;
    std::unique_ptr<OracleNode> left, right;

    bool predict(const std::vector<double>& x) const {
        if (leaf) return bot;
        return x[feature] <= threshold ? left->predict(x) : right->predict(x);
    }
};

using Points = std::vector<std::pair<std::vector<double>, bool>>;

inline std::unique_ptr<OracleNode> oracle_cart(const Points& pts) {
    auto node = std::make_unique<OracleNode>();
    long long b = 0;
    for (const auto& p : pts) b += p.second;
    const long long h = static_cast<long long>(pts.size()) - b;
    node->bot = b > h;
    if (b == 0 || h == 0 || pts.size() <= 1) return node;

    // impurity numerator/denominator: sum over sides of n_side - S_side / n_side
    // compared as  (n - S_l/n_l - S_r/n_r); lower is better, i.e. higher
    // S_l/n_l + S_r/n_r = (S_l n_r + S_r n_l) / (n_l n_r).
    bool found = false;
    long long best_num = 0, best_den = 1;
    std::size_t best_f = 0;
    double best_t = 0.0;
    const std::size_t d = pts.front().first.size();
    for (std::size_t f = 0; f < d; ++f) {
        std::vector<double> values;
        for (const auto& p : pts) values.push_back(p.first[f]);
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        for (std::size_t i = 0; i + 1 < values.size(); ++i) {
            const double t = (values[i] + values[i + 1]) / 2.0;
            long long lb = 0, lh = 0, rb = 0, rh = 0;
            for (const auto& p : pts) {
                if (p.first[f] <= t) {
                    (p.second ? lb : lh) += 1;
                } else {
                    (p.second ? rb : rh) += 1;
                }
            }
            const long long nl = lb + lh, nr = rb + rh;
            const long long num = (lb * lb + lh * lh) * nr + (rb * rb + rh * rh) * nl;
            const long long den = nl * nr;
            const bool better = !found || num * best_den > best_num * den;
            if (better) {  // strict, so earlier (lower feature, lower threshold) wins ties
                found = true;
                best_num = num;
                best_den = den;
                best_f = f;
                best_t = t;
            }
        }
    }
    if (!found) return node;
    Points l, r;
    for (const auto& p : pts) (p.first[best_f] <= best_t ? l : r).push_back(p);
    node->leaf = false;
    node->feature = best_f;
    node->threshold = best_t;
    node->left = oracle_cart(l);
    node->right = oracle_cart(r);
    return node;
}

}  // namespace botcal::oracle
