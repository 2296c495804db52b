#include "botcal/scoring.hpp"

#include <nlohmann/json.hpp>

#include "botcal/error.hpp"
#include "botcal/random.hpp"

namespace botcal {
namespace {

constexpr std::uint64_t kBundlePlanStream = 0x4000;

}  // namespace

void check_schema(const ModelBundle& bundle) {
    const auto extractor = default_schema();
    if (bundle.schema->fingerprint() != extractor->fingerprint()) {
        throw SchemaMismatchError("model schema " + bundle.schema->fingerprint() + " (" + bundle.schema->version() +
                                  ") does not match feature extractor schema " + extractor->fingerprint() + " (" +
                                  extractor->version() + ")");
    }
}

ScoreResponse score_account(const ModelBundle& bundle, const std::string& model_version, const Account& account,
                            std::optional<Prior> prior) {
    const auto scores = score_bundle(bundle.forests, extract(account, bundle.schema));
    ScoreResponse r;
    r.id = account.id;
    r.raw = scores.raw.value();
    r.calibrated = bundle.calibrator(r.raw);
    r.display = to_display(r.calibrated).value;
    const auto posterior = cap(bundle.cap, r.raw, prior);
    r.cap = posterior.value;
    r.cap_prior_used = posterior.prior_used;
    r.degenerate_evidence = posterior.degenerate_evidence;
    for (const auto& [g, s] : scores.subscores) r.subscores[g] = s.value();
    r.language_independent = scores.language_independent.value();
    r.model_version = model_version;
    return r;
}

std::string to_json(const ScoreResponse& r) {
    nlohmann::ordered_json subscores = nlohmann::ordered_json::object();
    for (const auto& [g, s] : r.subscores) subscores[std::string(to_string(g))] = s;
    nlohmann::ordered_json j{{"id", r.id},
                             {"raw", r.raw},
                             {"calibrated", r.calibrated},
                             {"display", r.display},
                             {"cap", r.cap},
                             {"cap_prior_used", r.cap_prior_used},
                             {"subscores", subscores},
                             {"language_independent", r.language_independent},
                             {"degenerate_evidence", r.degenerate_evidence},
                             {"model_version", r.model_version}};
    return j.dump();
}

BundleFit fit_bundle(const LabeledCorpus& corpus, const SchemaPtr& schema, const TrainOptions& options) {
    validate(corpus);
    options.forest.validate();
    const auto x = extract_matrix(corpus, schema);
    const auto y = labels_of(corpus);
    std::vector<std::string> ids;
    ids.reserve(corpus.entries.size());
    for (const auto& e : corpus.entries) ids.push_back(e.account.id);

    BundleFit fit;
    const auto plan = make_fold_plan(y, options.folds, substream_seed(options.forest.seed, kBundlePlanStream));
    fit.cv = cross_validate(x, y, ids, options.forest, plan);
    const auto oof = fit.cv.scored_labels();

    fit.bundle.schema = schema;
    fit.bundle.forests = train(x, y, options.forest, describe_training(corpus, options.forest));
    fit.bundle.calibrator = fit_platt(oof, options.platt);
    fit.bundle.calibrator.provenance =
        std::to_string(options.folds) + "-fold out-of-fold raw scores of corpus '" + corpus.name + "'";
    fit.bundle.cap = fit_cap(oof, options.degree, options.prior);
    return fit;
}

}  // namespace botcal
