#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "botcal/evaluation.hpp"
#include "botcal/model_io.hpp"

namespace botcal {

struct ScoreResponse {
    std::string id;
    double raw = 0.0;
    double calibrated = 0.0;
    double display = 0.0;
    double cap = 0.0;
    double cap_prior_used = 0.0;
    std::map<FeatureGroup, double> subscores;
    double language_independent = 0.0;
    bool degenerate_evidence = false;
    std::string model_version;
};

// Throws SchemaMismatchError unless the bundle was trained on the built-in
// feature extractor's schema.
void check_schema(const ModelBundle& bundle);

ScoreResponse score_account(const ModelBundle& bundle, const std::string& model_version,
                            const Account& account, std::optional<Prior> prior = {});

// Single-line JSON with full-precision numbers; identical for CLI and service.
std::string to_json(const ScoreResponse& response);

struct TrainOptions {
    ForestParams forest;
    int folds = 5;
    PlattOptions platt;
    int degree = kDefaultBernsteinDegree;
    double prior = kPublishedBotPrior;
};

struct BundleFit {
    ModelBundle bundle;
    CrossValidation cv;  // out-of-fold scores used for Platt and the densities
};

// Trains the forests on the whole corpus; fits the calibrator and the CAP
// densities on k-fold out-of-fold raw scores.
BundleFit fit_bundle(const LabeledCorpus& corpus, const SchemaPtr& schema, const TrainOptions& options);

}  // namespace botcal
