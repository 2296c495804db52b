#include "botcal/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "botcal/error.hpp"
#include "botcal/random.hpp"
#include "internal.hpp"

namespace botcal {
namespace {

constexpr std::uint64_t kFoldStream = 0x1000;
constexpr std::uint64_t kPlanStream = 0x2000;
constexpr std::uint64_t kHoldoutStream = 0x3000;

FeatureMatrix concat(const std::vector<const FeatureMatrix*>& parts) {
    FeatureMatrix out{parts.front()->schema, 0, {}};
    for (const auto* p : parts) {
        out.rows += p->rows;
        out.data.insert(out.data.end(), p->data.begin(), p->data.end());
    }
    return out;
}

std::vector<ScoredLabel> pair_up(std::span<const double> scores, std::span<const Label> labels) {
    std::vector<ScoredLabel> out(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) out[i] = {scores[i], labels[i]};
    return out;
}

std::string join_names(const std::vector<std::string>& names) {
    std::string out;
    for (const auto& n : names) {
        if (!out.empty()) out += '+';
        out += n;
    }
    return out;
}

}  // namespace

double auc(std::span<const ScoredLabel> scores) {
    std::size_t n_bot = 0;
    for (const auto& s : scores) {
        if (std::isnan(s.score)) throw ValidationError("AUC: NaN score");
        n_bot += s.label == Label::bot;
    }
    const std::size_t n_human = scores.size() - n_bot;
    if (n_bot == 0 || n_human == 0) throw ValidationError("AUC needs both classes; got a single class");

    std::vector<ScoredLabel> sorted(scores.begin(), scores.end());
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.score < b.score; });

    // Twice the Mann-Whitney U of the bot sample, from average ranks per tie group.
    std::uint64_t u2 = 0, humans_below = 0;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        std::uint64_t b = 0, h = 0;
        while (j < sorted.size() && sorted[j].score == sorted[i].score) {
            (sorted[j].label == Label::bot ? b : h) += 1;
            ++j;
        }
        u2 += 2 * b * humans_below + b * h;
        humans_below += h;
        i = j;
    }
    return static_cast<double>(u2) / 2.0 / (static_cast<double>(n_bot) * static_cast<double>(n_human));
}

double Confusion::accuracy() const {
    const auto total = n();
    return total ? static_cast<double>(tp + tn) / static_cast<double>(total) : 0.0;
}

void Confusion::add(Label truth, bool predicted_bot) {
    if (truth == Label::bot) {
        (predicted_bot ? tp : fn) += 1;
    } else {
        (predicted_bot ? fp : tn) += 1;
    }
}

std::vector<std::size_t> FoldPlan::rows_in(int fold) const {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < fold_of.size(); ++i) {
        if (fold_of[i] == fold) rows.push_back(i);
    }
    return rows;
}

std::vector<std::size_t> FoldPlan::rows_outside(int fold) const {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < fold_of.size(); ++i) {
        if (fold_of[i] != fold) rows.push_back(i);
    }
    return rows;
}

FoldPlan make_fold_plan(std::span<const Label> labels, int k, std::uint64_t seed) {
    if (k < 2) throw ValidationError("cross-validation needs k >= 2");
    std::vector<std::size_t> bots, humans;
    for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] == Label::bot ? bots : humans).push_back(i);
    const auto uk = static_cast<std::size_t>(k);
    if (bots.size() < uk || humans.size() < uk) {
        throw ValidationError("with k=" + std::to_string(k) + " some fold would lack a class (" +
                              std::to_string(bots.size()) + " bots, " + std::to_string(humans.size()) +
                              " humans); use a smaller k");
    }
    Rng rng(seed);
    rng.shuffle(bots.begin(), bots.end());
    rng.shuffle(humans.begin(), humans.end());

    FoldPlan plan{k, seed, std::vector<int>(labels.size(), 0)};
    // Dealing bots then humans round-robin keeps both fold sizes and class
    // shares within one of each other.
    std::size_t pos = 0;
    for (auto i : bots) plan.fold_of[i] = static_cast<int>(pos++ % uk);
    for (auto i : humans) plan.fold_of[i] = static_cast<int>(pos++ % uk);
    return plan;
}

FoldPlan make_fold_plan(const LabeledCorpus& corpus, int k, std::uint64_t seed) {
    return make_fold_plan(labels_of(corpus), k, seed);
}

std::vector<ScoredLabel> CrossValidation::scored_labels() const {
    std::vector<ScoredLabel> out;
    out.reserve(scores.size());
    for (const auto& s : scores) out.push_back({s.score, s.label});
    return out;
}

Metrics evaluate_scores(std::span<const ScoredLabel> scores, double threshold) {
    Metrics m;
    m.auc = auc(scores);
    for (const auto& s : scores) m.confusion.add(s.label, classify_bot(s.score, threshold));
    m.n = scores.size();
    m.accuracy = m.confusion.accuracy();
    return m;
}

CrossValidation cross_validate(const FeatureMatrix& x, std::span<const Label> labels,
                               std::span<const std::string> ids, const ForestParams& params,
                               const FoldPlan& plan) {
    params.validate();
    if (plan.fold_of.size() != x.rows || labels.size() != x.rows || ids.size() != x.rows) {
        throw ValidationError("fold plan, labels and ids must cover every row");
    }
    CrossValidation cv;
    cv.scores.resize(x.rows);
    for (int f = 0; f < plan.k; ++f) {
        const auto test = plan.rows_in(f);
        const auto train_rows = plan.rows_outside(f);
        std::vector<Label> train_y, test_y;
        for (auto r : train_rows) train_y.push_back(labels[r]);
        for (auto r : test) test_y.push_back(labels[r]);
        const bool test_has_both = std::count(test_y.begin(), test_y.end(), Label::bot) > 0 &&
                                   std::count(test_y.begin(), test_y.end(), Label::human) > 0;
        if (!test_has_both) {
            throw ValidationError("fold " + std::to_string(f) + " lacks a class; use a smaller k");
        }

        ForestParams p = params;
        p.seed = substream_seed(params.seed, kFoldStream + static_cast<std::uint64_t>(f));
        const auto trained = train_forest(x.take(train_rows), train_y, p);
        const double threshold = ml_threshold(pair_up(trained.oob_scores, train_y));

        for (auto r : test) {
            const double s = trained.model.score_row(x.row(r)).value();
            cv.scores[r] = {ids[r], s, labels[r], f, threshold, classify_bot(s, threshold)};
        }
    }

    const auto scored = cv.scored_labels();
    cv.metrics.auc = auc(scored);
    for (const auto& s : cv.scores) cv.metrics.confusion.add(s.label, s.predicted_bot);
    cv.metrics.n = cv.scores.size();
    cv.metrics.accuracy = cv.metrics.confusion.accuracy();
    return cv;
}

CrossValidation cross_validate(const LabeledCorpus& corpus, const SchemaPtr& schema, const ForestParams& params,
                               const FoldPlan& plan) {
    validate(corpus);
    const auto x = extract_matrix(corpus, schema);
    const auto y = labels_of(corpus);
    std::vector<std::string> ids;
    ids.reserve(corpus.entries.size());
    for (const auto& e : corpus.entries) ids.push_back(e.account.id);
    return cross_validate(x, y, ids, params, plan);
}

LabeledCorpus shuffle_labels(const LabeledCorpus& corpus, std::uint64_t seed) {
    auto labels = labels_of(corpus);
    Rng rng(seed);
    rng.shuffle(labels.begin(), labels.end());
    LabeledCorpus out = corpus;
    out.name = corpus.name + "-shuffled";
    for (std::size_t i = 0; i < labels.size(); ++i) out.entries[i].label = labels[i];
    return out;
}

GeneralizationMatrix generalization_matrix(std::span<const LabeledCorpus> corpora, const SchemaPtr& schema,
                                           const ForestParams& params, int k, MatrixMode mode) {
    if (corpora.size() < 2) throw ValidationError("generalization matrix needs at least 2 corpora");
    params.validate();

    std::vector<FeatureMatrix> xs;
    std::vector<std::vector<Label>> ys;
    std::vector<std::vector<std::string>> ids;
    GeneralizationMatrix out;
    for (const auto& c : corpora) {
        validate(c);
        xs.push_back(extract_matrix(c, schema));
        ys.push_back(labels_of(c));
        auto& v = ids.emplace_back();
        for (const auto& e : c.entries) v.push_back(c.name + "/" + e.account.id);
        out.columns.push_back(c.name);
    }

    const std::size_t n = corpora.size();
    for (std::size_t r = 0; r < n; ++r) {
        std::vector<bool> member(n, false);
        for (std::size_t c = 0; c < n; ++c) {
            member[c] = mode == MatrixMode::cumulative ? c <= r : c != r;
        }

        std::vector<const FeatureMatrix*> parts;
        std::vector<Label> y;
        std::vector<std::string> row_ids, names;
        std::vector<std::pair<std::size_t, std::size_t>> spans(n);  // offset, count into the union
        for (std::size_t c = 0; c < n; ++c) {
            if (!member[c]) continue;
            spans[c] = {y.size(), ys[c].size()};
            parts.push_back(&xs[c]);
            y.insert(y.end(), ys[c].begin(), ys[c].end());
            row_ids.insert(row_ids.end(), ids[c].begin(), ids[c].end());
            names.push_back(corpora[c].name);
        }
        const auto x = concat(parts);
        const auto plan = make_fold_plan(y, k, substream_seed(params.seed, kPlanStream + r));
        const auto cv = cross_validate(x, y, row_ids, params, plan);

        std::optional<TrainedForest> full;
        double threshold = 0.5;
        const std::string row_name = join_names(names);
        out.rows.push_back(row_name);

        for (std::size_t c = 0; c < n; ++c) {
            Confusion conf;
            if (member[c]) {
                const auto [offset, count] = spans[c];
                for (std::size_t i = offset; i < offset + count; ++i) {
                    conf.add(cv.scores[i].label, cv.scores[i].predicted_bot);
                }
            } else {
                if (!full) {
                    ForestParams p = params;
                    p.seed = substream_seed(params.seed, kHoldoutStream + r);
                    full = train_forest(x, y, p);
                    threshold = ml_threshold(pair_up(full->oob_scores, y));
                }
                for (std::size_t i = 0; i < xs[c].rows; ++i) {
                    conf.add(ys[c][i], classify_bot(full->model.score_row(xs[c].row(i)).value(), threshold));
                }
            }
            out.cells.push_back({row_name, corpora[c].name, conf.accuracy(), member[c]});
        }
    }
    return out;
}

void write_metrics_csv(std::ostream& out, const std::string& experiment, const Metrics& m, bool header) {
    if (header) out << "experiment,n,auc,accuracy,tp,fp,tn,fn\n";
    out << experiment << ',' << m.n << ',' << detail::format_double(m.auc) << ','
        << detail::format_double(m.accuracy) << ',' << m.confusion.tp << ',' << m.confusion.fp << ','
        << m.confusion.tn << ',' << m.confusion.fn << '\n';
}

void write_matrix_csv(std::ostream& out, const GeneralizationMatrix& matrix) {
    out << "row,column,accuracy,mode\n";
    for (const auto& c : matrix.cells) {
        out << c.row << ',' << c.column << ',' << detail::format_double(c.accuracy) << ','
            << (c.in_sample ? "cv" : "holdout") << '\n';
    }
}

void write_scores_csv(std::ostream& out, std::span<const OutOfFoldScore> scores) {
    out << "id,score,label,fold\n";
    for (const auto& s : scores) {
        out << s.id << ',' << detail::format_double(s.score) << ',' << to_string(s.label) << ',' << s.fold << '\n';
    }
}

}  // namespace botcal
