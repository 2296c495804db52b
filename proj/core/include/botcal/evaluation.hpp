#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "botcal/calibration.hpp"
#include "botcal/corpus.hpp"
#include "botcal/features.hpp"
#include "botcal/forest.hpp"

namespace botcal {

// Mann-Whitney statistic normalized to [0,1]; ties count one half.
// Throws ValidationError unless both classes are present.
double auc(std::span<const ScoredLabel> scores);

struct Confusion {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

    std::size_t n() const { return tp + fp + tn + fn; }
    double accuracy() const;
    void add(Label truth, bool predicted_bot);
    bool operator==(const Confusion&) const = default;
};

struct Metrics {
    double auc = 0.5;
    double accuracy = 0.0;
    Confusion confusion;
    std::size_t n = 0;

    bool operator==(const Metrics&) const = default;
};

// Stratified assignment of corpus rows to k folds.
struct FoldPlan {
    int k = 5;
    std::uint64_t seed = 0;
    std::vector<int> fold_of;  // aligned with corpus entries

    std::vector<std::size_t> rows_in(int fold) const;
    std::vector<std::size_t> rows_outside(int fold) const;
};

// Folds differ in size by at most one and every fold gets a near-equal share
// of each class. Throws ValidationError when k < 2 or a fold would miss a class.
FoldPlan make_fold_plan(std::span<const Label> labels, int k, std::uint64_t seed);
FoldPlan make_fold_plan(const LabeledCorpus& corpus, int k, std::uint64_t seed);

struct OutOfFoldScore {
    std::string id;
    double score = 0.0;  // raw score from the model that did not see this row
    Label label = Label::human;
    int fold = 0;
    double threshold = 0.5;  // ML cut from the training folds
    bool predicted_bot = false;
};

struct CrossValidation {
    Metrics metrics;
    std::vector<OutOfFoldScore> scores;  // corpus order

    std::vector<ScoredLabel> scored_labels() const;
};

// Trains k forests (fold models are trained on the other k-1 folds). Each
// fold's threshold is the ML cut over the training folds' out-of-bag scores.
CrossValidation cross_validate(const LabeledCorpus& corpus, const SchemaPtr& schema,
                               const ForestParams& params, const FoldPlan& plan);
CrossValidation cross_validate(const FeatureMatrix& x, std::span<const Label> labels,
                               std::span<const std::string> ids, const ForestParams& params,
                               const FoldPlan& plan);

Metrics evaluate_scores(std::span<const ScoredLabel> scores, double threshold);

// Seeded label permutation; the null-hypothesis control.
LabeledCorpus shuffle_labels(const LabeledCorpus& corpus, std::uint64_t seed);

enum class MatrixMode { cumulative, leave_one_out };

struct MatrixCell {
    std::string row;
    std::string column;
    double accuracy = 0.0;
    bool in_sample = false;  // true: cross-validated, false: held-out corpus
};

struct GeneralizationMatrix {
    std::vector<std::string> rows;
    std::vector<std::string> columns;
    std::vector<MatrixCell> cells;  // row-major, rows.size() * columns.size()

    const MatrixCell& at(std::size_t row, std::size_t column) const {
        return cells[row * columns.size() + column];
    }
};

// Rows are training sets: cumulative unions in declaration order, or every
// corpus but one. Columns are the individual corpora. Corpora inside a row's
// training set are scored out-of-fold; the rest by the model trained on the
// whole row set.
GeneralizationMatrix generalization_matrix(std::span<const LabeledCorpus> corpora,
                                           const SchemaPtr& schema, const ForestParams& params,
                                           int k, MatrixMode mode = MatrixMode::cumulative);

void write_metrics_csv(std::ostream& out, const std::string& experiment, const Metrics& m,
                       bool header = true);
void write_matrix_csv(std::ostream& out, const GeneralizationMatrix& matrix);
void write_scores_csv(std::ostream& out, std::span<const OutOfFoldScore> scores);

}  // namespace botcal
