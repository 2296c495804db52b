#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "botcal/corpus.hpp"
#include "botcal/features.hpp"

namespace botcal {

struct ForestParams {
    int n_trees = 100;
    std::uint64_t seed = 0;
    int min_leaf = 1;
    int features_per_split = 0;  // 0 -> ceil(sqrt(d))
    bool bootstrap = true;
    int threads = 0;  // 0 -> hardware concurrency; results do not depend on it

    void validate() const;
    int resolved_features_per_split(std::size_t d) const;
};

// Fraction of trees voting bot. Always an exact multiple of 1/trees.
struct RawScore {
    std::size_t votes = 0;
    std::size_t trees = 1;

    double value() const { return static_cast<double>(votes) / static_cast<double>(trees); }
    bool operator==(const RawScore&) const = default;
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;  // go left when x[feature] <= threshold
    int left = -1;
    int right = -1;
    bool bot = false;  // leaf vote

    bool is_leaf() const { return feature < 0; }
    bool operator==(const TreeNode&) const = default;
};

class DecisionTree {
public:
    DecisionTree() = default;
    // Throws ValidationError when the node list is not a well-formed tree over
    // `n_features` columns.
    DecisionTree(std::vector<TreeNode> nodes, std::size_t n_features);

    bool predict(std::span<const double> row) const;
    const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
    std::size_t depth() const;

    bool operator==(const DecisionTree&) const = default;

private:
    std::vector<TreeNode> nodes_;
};

struct TrainingMeta {
    std::uint64_t seed = 0;
    std::vector<std::string> corpora;
    std::string data_as_of;  // newest timestamp in the training data
    int min_leaf = 1;
    int features_per_split = 0;
    bool bootstrap = true;

    bool operator==(const TrainingMeta&) const = default;
};

class ForestModel {
public:
    ForestModel() = default;
    ForestModel(SchemaPtr schema, std::vector<DecisionTree> trees, TrainingMeta meta);

    // Throws SchemaMismatchError naming both fingerprints.
    RawScore score(const FeatureVector& vec) const;
    // Unchecked; row must follow schema().
    RawScore score_row(std::span<const double> row) const;

    const SchemaPtr& schema() const noexcept { return schema_; }
    const std::string& fingerprint() const { return schema_->fingerprint(); }
    std::size_t n_trees() const noexcept { return trees_.size(); }
    const std::vector<DecisionTree>& trees() const noexcept { return trees_; }
    const TrainingMeta& meta() const noexcept { return meta_; }

    bool operator==(const ForestModel& o) const {
        return *schema_ == *o.schema_ && trees_ == o.trees_ && meta_ == o.meta_;
    }

private:
    SchemaPtr schema_;
    std::vector<DecisionTree> trees_;
    TrainingMeta meta_;
};

struct TrainedForest {
    ForestModel model;
    // Per training row: fraction of out-of-bag trees voting bot. Falls back to
    // the in-sample score for rows never left out (or when bootstrap is off).
    std::vector<double> oob_scores;
};

// Throws ValidationError for invalid params or a single-class label set.
TrainedForest train_forest(const FeatureMatrix& x, std::span<const Label> labels,
                           const ForestParams& params, TrainingMeta meta = {});

// Main model plus one submodel per non-empty feature group and a model
// trained without linguistic features.
struct ScoringModels {
    ForestModel main;
    std::map<FeatureGroup, ForestModel> groups;
    ForestModel language_independent;
    std::vector<std::string> warnings;

    bool operator==(const ScoringModels& o) const {
        return main == o.main && groups == o.groups && language_independent == o.language_independent;
    }
};

ScoringModels train(const LabeledCorpus& corpus, const SchemaPtr& schema, const ForestParams& params);
ScoringModels train(const FeatureMatrix& x, std::span<const Label> labels, const ForestParams& params,
                    const TrainingMeta& meta);

RawScore score(const ForestModel& model, const FeatureVector& vec);

struct ScoreBundle {
    RawScore raw;
    std::map<FeatureGroup, RawScore> subscores;
    RawScore language_independent;
};

ScoreBundle score_bundle(const ScoringModels& models, const FeatureVector& full);
ScoreBundle score_bundle(const ScoringModels& models, const Account& account);

TrainingMeta describe_training(const LabeledCorpus& corpus, const ForestParams& params);
std::vector<Label> labels_of(const LabeledCorpus& corpus);
FeatureMatrix extract_matrix(const LabeledCorpus& corpus, const SchemaPtr& schema);

}  // namespace botcal
