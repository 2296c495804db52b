#include "botcal/forest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

#include "botcal/error.hpp"
#include "botcal/random.hpp"

namespace botcal {
namespace {

constexpr std::uint64_t kLanguageIndependentStream = 100;

__extension__ using i128 = __int128;

// Split quality as the exact fraction (S_l*n_r + S_r*n_l) / (n_l*n_r), where
// S = bots^2 + humans^2 per side. Larger means lower weighted Gini impurity.
struct SplitQuality {
    i128 num = 0;
    i128 den = 1;

    static SplitQuality of(std::int64_t lb, std::int64_t lh, std::int64_t rb, std::int64_t rh) {
        const i128 nl = lb + lh, nr = rb + rh;
        const i128 sl = i128{lb} * lb + i128{lh} * lh;
        const i128 sr = i128{rb} * rb + i128{rh} * rh;
        return {sl * nr + sr * nl, nl * nr};
    }
    int compare(const SplitQuality& o) const {
        const i128 a = num * o.den, b = o.num * den;
        return a < b ? -1 : (a > b ? 1 : 0);
    }
};

struct Candidate {
    bool valid = false;
    SplitQuality quality;
    std::size_t feature = 0;
    double threshold = 0.0;

    // Higher quality, then lower feature index, then lower threshold.
    bool beats(const Candidate& o) const {
        if (!o.valid) return valid;
        if (!valid) return false;
        if (int c = quality.compare(o.quality); c != 0) return c > 0;
        if (feature != o.feature) return feature < o.feature;
        return threshold < o.threshold;
    }
};

class TreeBuilder {
public:
    TreeBuilder(const FeatureMatrix& x, std::span<const Label> y, int min_leaf, int mtry, std::uint64_t seed)
        : x_(x), y_(y), min_leaf_(static_cast<std::size_t>(min_leaf)), mtry_(static_cast<std::size_t>(mtry)),
          rng_(seed) {}

    std::vector<std::uint32_t> bootstrap() {
        const auto n = x_.rows;
        std::vector<std::uint32_t> rows(n);
        for (auto& r : rows) r = static_cast<std::uint32_t>(rng_.below(n));
        return rows;
    }

    std::vector<TreeNode> build(std::vector<std::uint32_t> rows) {
        nodes_.clear();
        grow(std::move(rows));
        return std::move(nodes_);
    }

private:
    int grow(std::vector<std::uint32_t> rows) {
        const int id = static_cast<int>(nodes_.size());
        nodes_.emplace_back();

        std::int64_t bots = 0;
        for (auto r : rows) bots += y_[r] == Label::bot;
        const std::int64_t humans = static_cast<std::int64_t>(rows.size()) - bots;

        auto make_leaf = [&] {
            nodes_[id].feature = -1;
            nodes_[id].bot = bots > humans;  // ties vote human
            return id;
        };
        if (bots == 0 || humans == 0 || rows.size() <= min_leaf_) return make_leaf();

        const Candidate best = find_split(rows, bots, humans);
        if (!best.valid) return make_leaf();

        std::vector<std::uint32_t> left, right;
        for (auto r : rows) (x_.row(r)[best.feature] <= best.threshold ? left : right).push_back(r);
        rows = {};
        nodes_[id].feature = static_cast<int>(best.feature);
        nodes_[id].threshold = best.threshold;
        const int l = grow(std::move(left));
        const int r = grow(std::move(right));
        nodes_[id].left = l;
        nodes_[id].right = r;
        return id;
    }

    Candidate find_split(const std::vector<std::uint32_t>& rows, std::int64_t bots, std::int64_t humans) {
        const std::size_t d = x_.cols();
        std::vector<std::size_t> order(d);
        std::iota(order.begin(), order.end(), std::size_t{0});
        rng_.shuffle(order.begin(), order.end());

        Candidate best;
        // Keep drawing past mtry until some feature admits a split.
        for (std::size_t i = 0; i < d; ++i) {
            if (i >= mtry_ && best.valid) break;
            const Candidate c = best_on_feature(rows, order[i], bots, humans);
            if (c.beats(best)) best = c;
        }
        return best;
    }

    Candidate best_on_feature(const std::vector<std::uint32_t>& rows, std::size_t f, std::int64_t bots,
                              std::int64_t humans) {
        buf_.clear();
        for (auto r : rows) buf_.emplace_back(x_.row(r)[f], y_[r] == Label::bot);
        std::sort(buf_.begin(), buf_.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });

        Candidate best;
        std::int64_t lb = 0, lh = 0;
        for (std::size_t i = 0; i + 1 < buf_.size(); ++i) {
            (buf_[i].second ? lb : lh) += 1;
            const double lo = buf_[i].first, hi = buf_[i + 1].first;
            if (!(lo < hi)) continue;
            Candidate c;
            c.valid = true;
            c.feature = f;
            c.quality = SplitQuality::of(lb, lh, bots - lb, humans - lh);
            c.threshold = lo + (hi - lo) * 0.5;
            if (!(c.threshold < hi)) c.threshold = lo;
            if (c.beats(best)) best = c;
        }
        return best;
    }

    const FeatureMatrix& x_;
    std::span<const Label> y_;
    std::size_t min_leaf_;
    std::size_t mtry_;
    Rng rng_;
    std::vector<TreeNode> nodes_;
    std::vector<std::pair<double, bool>> buf_;
};

struct GrownTree {
    DecisionTree tree;
    std::vector<std::uint16_t> in_bag;  // per training row
};

template <class Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
    std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads)
                                      : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) fn(i);
        });
    }
}

}  // namespace

void ForestParams::validate() const {
    if (n_trees < 1) throw ValidationError("n_trees must be >= 1");
    if (min_leaf < 1) throw ValidationError("min_leaf must be >= 1");
    if (features_per_split < 0) throw ValidationError("features_per_split must be >= 0");
}

int ForestParams::resolved_features_per_split(std::size_t d) const {
    if (d == 0) return 0;
    if (features_per_split > 0) return std::min(features_per_split, static_cast<int>(d));
    return static_cast<int>(std::ceil(std::sqrt(static_cast<double>(d))));
}

DecisionTree::DecisionTree(std::vector<TreeNode> nodes, std::size_t n_features) : nodes_(std::move(nodes)) {
    if (nodes_.empty()) throw ValidationError("tree has no nodes");
    const int n = static_cast<int>(nodes_.size());
    for (int i = 0; i < n; ++i) {
        const auto& node = nodes_[static_cast<std::size_t>(i)];
        if (node.is_leaf()) {
            if (node.feature != -1) throw ValidationError("bad leaf marker");
            continue;
        }
        if (static_cast<std::size_t>(node.feature) >= n_features) {
            throw ValidationError("tree references feature " + std::to_string(node.feature) +
                                  " outside a schema of " + std::to_string(n_features));
        }
        if (!std::isfinite(node.threshold)) throw ValidationError("non-finite split threshold");
        if (node.left <= i || node.right <= i || node.left >= n || node.right >= n || node.left == node.right) {
            throw ValidationError("malformed tree children at node " + std::to_string(i));
        }
    }
}

bool DecisionTree::predict(std::span<const double> row) const {
    std::size_t i = 0;
    while (!nodes_[i].is_leaf()) {
        const auto& n = nodes_[i];
        i = static_cast<std::size_t>(row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
    return nodes_[i].bot;
}

std::size_t DecisionTree::depth() const {
    std::vector<std::size_t> d(nodes_.size(), 0);
    std::size_t deepest = 0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        deepest = std::max(deepest, d[i]);
        if (!nodes_[i].is_leaf()) {
            d[static_cast<std::size_t>(nodes_[i].left)] = d[i] + 1;
            d[static_cast<std::size_t>(nodes_[i].right)] = d[i] + 1;
        }
    }
    return deepest;
}

ForestModel::ForestModel(SchemaPtr schema, std::vector<DecisionTree> trees, TrainingMeta meta)
    : schema_(std::move(schema)), trees_(std::move(trees)), meta_(std::move(meta)) {
    if (!schema_) throw ValidationError("forest has no schema");
    if (trees_.empty()) throw ValidationError("forest needs at least one tree");
    for (const auto& t : trees_) {
        for (const auto& n : t.nodes()) {
            if (!n.is_leaf() && static_cast<std::size_t>(n.feature) >= schema_->size()) {
                throw ValidationError("tree references a feature outside the schema");
            }
        }
    }
}

RawScore ForestModel::score_row(std::span<const double> row) const {
    std::size_t votes = 0;
    for (const auto& t : trees_) votes += t.predict(row) ? 1 : 0;
    return {votes, trees_.size()};
}

RawScore ForestModel::score(const FeatureVector& vec) const {
    if (!vec.schema || vec.schema->fingerprint() != fingerprint()) {
        throw SchemaMismatchError("feature schema " + (vec.schema ? vec.schema->fingerprint() : "<none>") +
                                  " does not match model schema " + fingerprint());
    }
    return score_row(vec.values);
}

RawScore score(const ForestModel& model, const FeatureVector& vec) { return model.score(vec); }

TrainedForest train_forest(const FeatureMatrix& x, std::span<const Label> labels, const ForestParams& params,
                           TrainingMeta meta) {
    params.validate();
    if (labels.size() != x.rows) throw ValidationError("label count does not match feature rows");
    if (x.cols() == 0) throw ValidationError("cannot train on an empty feature schema");
    const auto bots = std::count(labels.begin(), labels.end(), Label::bot);
    if (bots == 0 || bots == static_cast<std::ptrdiff_t>(labels.size())) {
        throw ValidationError("training data contains a single class");
    }

    const int mtry = params.resolved_features_per_split(x.cols());
    const auto n_trees = static_cast<std::size_t>(params.n_trees);
    std::vector<GrownTree> grown(n_trees);
    parallel_for(n_trees, params.threads, [&](std::size_t t) {
        TreeBuilder builder(x, labels, params.min_leaf, mtry, substream_seed(params.seed, t));
        std::vector<std::uint32_t> rows;
        std::vector<std::uint16_t> in_bag(x.rows, 0);
        if (params.bootstrap) {
            rows = builder.bootstrap();
            for (auto r : rows) in_bag[r] = static_cast<std::uint16_t>(std::min<int>(in_bag[r] + 1, 0xffff));
        } else {
            rows.resize(x.rows);
            std::iota(rows.begin(), rows.end(), std::uint32_t{0});
            std::fill(in_bag.begin(), in_bag.end(), std::uint16_t{1});
        }
        grown[t] = {DecisionTree(builder.build(std::move(rows)), x.cols()), std::move(in_bag)};
    });

    meta.seed = params.seed;
    meta.min_leaf = params.min_leaf;
    meta.features_per_split = mtry;
    meta.bootstrap = params.bootstrap;

    TrainedForest out;
    out.oob_scores.resize(x.rows);
    for (std::size_t r = 0; r < x.rows; ++r) {
        const auto row = x.row(r);
        std::size_t oob_trees = 0, oob_votes = 0, votes = 0;
        for (const auto& g : grown) {
            const bool v = g.tree.predict(row);
            votes += v;
            if (g.in_bag[r] == 0) {
                ++oob_trees;
                oob_votes += v;
            }
        }
        out.oob_scores[r] = oob_trees ? static_cast<double>(oob_votes) / static_cast<double>(oob_trees)
                                      : static_cast<double>(votes) / static_cast<double>(n_trees);
    }

    std::vector<DecisionTree> trees;
    trees.reserve(n_trees);
    for (auto& g : grown) trees.push_back(std::move(g.tree));
    out.model = ForestModel(x.schema, std::move(trees), std::move(meta));
    return out;
}

ScoringModels train(const FeatureMatrix& x, std::span<const Label> labels, const ForestParams& params,
                    const TrainingMeta& meta) {
    ScoringModels models;
    models.main = train_forest(x, labels, params, meta).model;

    for (auto g : kAllGroups) {
        auto sub = std::make_shared<const FeatureSchema>(x.schema->slice(g));
        if (sub->size() == 0) {
            models.warnings.push_back("feature group '" + std::string(to_string(g)) +
                                      "' is empty; its submodel is omitted");
            continue;
        }
        ForestParams p = params;
        p.seed = substream_seed(params.seed, 1 + static_cast<std::uint64_t>(g));
        models.groups.emplace(g, train_forest(x.select(sub), labels, p, meta).model);
    }

    auto stripped = std::make_shared<const FeatureSchema>(x.schema->without_linguistic());
    ForestParams p = params;
    p.seed = substream_seed(params.seed, kLanguageIndependentStream);
    models.language_independent = train_forest(x.select(stripped), labels, p, meta).model;
    return models;
}

std::vector<Label> labels_of(const LabeledCorpus& corpus) {
    std::vector<Label> y;
    y.reserve(corpus.entries.size());
    for (const auto& e : corpus.entries) y.push_back(e.label);
    return y;
}

FeatureMatrix extract_matrix(const LabeledCorpus& corpus, const SchemaPtr& schema) {
    FeatureMatrix out{schema, corpus.entries.size(), {}};
    out.data.reserve(out.rows * schema->size());
    for (const auto& e : corpus.entries) {
        auto v = extract(e.account, schema);
        out.data.insert(out.data.end(), v.values.begin(), v.values.end());
    }
    return out;
}

TrainingMeta describe_training(const LabeledCorpus& corpus, const ForestParams& params) {
    TrainingMeta meta;
    meta.seed = params.seed;
    meta.corpora = {corpus.name};
    std::optional<Timestamp> newest;
    for (const auto& e : corpus.entries) {
        const auto t = e.account.reference_time();
        if (!newest || t > *newest) newest = t;
    }
    if (newest) meta.data_as_of = format_timestamp(*newest);
    return meta;
}

ScoringModels train(const LabeledCorpus& corpus, const SchemaPtr& schema, const ForestParams& params) {
    validate(corpus);
    const auto x = extract_matrix(corpus, schema);
    const auto y = labels_of(corpus);
    return train(x, y, params, describe_training(corpus, params));
}

ScoreBundle score_bundle(const ScoringModels& models, const FeatureVector& full) {
    ScoreBundle out;
    out.raw = models.main.score(full);
    for (const auto& [g, model] : models.groups) out.subscores[g] = model.score(project(full, model.schema()));
    out.language_independent =
        models.language_independent.score(project(full, models.language_independent.schema()));
    return out;
}

ScoreBundle score_bundle(const ScoringModels& models, const Account& account) {
    return score_bundle(models, extract(account, models.main.schema()));
}

}  // namespace botcal
