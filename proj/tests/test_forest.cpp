#include <gtest/gtest.h>

#include <cmath>

#include "botcal/error.hpp"
#include "botcal/forest.hpp"
#include "botcal/model_io.hpp"
#include "botcal/random.hpp"
#include "botcal/synth.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace botcal;
using namespace botcal::test;
using namespace botcal::oracle;

namespace {

SchemaPtr numeric_schema(std::size_t d) {
    std::vector<FeatureSpec> specs;
    for (std::size_t i = 0; i < d; ++i) specs.push_back({"f" + std::to_string(i), FeatureGroup::user_meta, false, 0.0});
    return std::make_shared<const FeatureSchema>("test", std::move(specs));
}

FeatureMatrix to_matrix(const Points& pts, const SchemaPtr& schema) {
    FeatureMatrix m;
    m.schema = schema;
    m.rows = pts.size();
    for (const auto& p : pts) m.data.insert(m.data.end(), p.first.begin(), p.first.end());
    return m;
}

const LabeledCorpus& synth_corpus() {
    static const LabeledCorpus corpus = [] {
        SynthConfig cfg;
        cfg.seed = 21;
        cfg.n_humans = 150;
        cfg.n_bots = 150;
        return generate_synthetic(cfg);
    }();
    return corpus;
}

ForestParams small_params(std::uint64_t seed = 1) {
    ForestParams p;
    p.n_trees = 25;
    p.seed = seed;
    return p;
}

bool is_multiple_of(double value, std::size_t trees) {
    const double t = static_cast<double>(trees);
    return value == static_cast<double>(std::llround(value * t)) / t;
}

}  // namespace

TEST(Forest, OneTreeMatchesBruteForceCart) {
    Rng rng(99);
    for (int trial = 0; trial < 400; ++trial) {
        const std::size_t n = 2 + rng.below(7);
        const std::size_t d = 1 + rng.below(3);
        Points pts;
        std::vector<Label> labels;
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> x;
            for (std::size_t f = 0; f < d; ++f) x.push_back(static_cast<double>(rng.below(4)) * 0.5);
            const bool bot = rng.bernoulli(0.5);
            pts.emplace_back(std::move(x), bot);
            labels.push_back(bot ? Label::bot : Label::human);
        }
        if (std::count(labels.begin(), labels.end(), Label::bot) == 0 ||
            std::count(labels.begin(), labels.end(), Label::human) == 0) {
            continue;
        }
        const auto schema = numeric_schema(d);
        ForestParams params;
        params.n_trees = 1;
        params.bootstrap = false;
        params.features_per_split = static_cast<int>(d);
        params.seed = trial;
        const auto forest = train_forest(to_matrix(pts, schema), labels, params).model;
        const auto oracle = oracle_cart(pts);

        for (int probe = 0; probe < 30; ++probe) {
            std::vector<double> x;
            for (std::size_t f = 0; f < d; ++f) x.push_back(static_cast<double>(rng.below(9)) * 0.25 - 0.25);
            ASSERT_EQ(forest.score_row(x).votes == 1, oracle->predict(x)) << "trial " << trial;
        }
        for (const auto& p : pts) ASSERT_EQ(forest.score_row(p.first).votes == 1, oracle->predict(p.first));
    }
}

TEST(Forest, SeparatingFeatureGivesPerfectTrainingAccuracy) {
    const auto schema = numeric_schema(3);
    Rng rng(4);
    Points pts;
    std::vector<Label> labels;
    for (int i = 0; i < 200; ++i) {
        const bool bot = i % 2 == 0;
        pts.push_back({{rng.uniform(), bot ? 1.0 + rng.uniform() : -rng.uniform(), rng.uniform()}, bot});
        labels.push_back(bot ? Label::bot : Label::human);
    }
    ForestParams params;
    params.n_trees = 30;
    params.seed = 8;
    const auto model = train_forest(to_matrix(pts, schema), labels, params).model;
    for (const auto& p : pts) EXPECT_EQ(model.score_row(p.first).value() > 0.5, p.second);
}

TEST(Forest, SingleClassIsRejected) {
    const auto schema = numeric_schema(1);
    const Points pts = {{{0.0}, false}, {{1.0}, false}};
    const std::vector<Label> labels = {Label::human, Label::human};
    try {
        train_forest(to_matrix(pts, schema), labels, ForestParams{});
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("single class"), std::string::npos) << e.what();
    }
    ForestParams bad;
    bad.n_trees = 0;
    EXPECT_THROW(bad.validate(), ValidationError);
}

TEST(Forest, VoteFraction) {
    const auto schema = numeric_schema(1);
    std::vector<DecisionTree> trees;
    for (int i = 0; i < 10; ++i) {
        TreeNode leaf;
        leaf.bot = i < 3;
        trees.emplace_back(std::vector<TreeNode>{leaf}, 1);
    }
    const ForestModel model(schema, trees, {});
    const FeatureVector v{schema, {0.0}};
    EXPECT_EQ(model.score(v), (RawScore{3, 10}));
    EXPECT_EQ(model.score(v).value(), 0.3);
}

TEST(Forest, MalformedTreesAreRejected) {
    TreeNode split;
    split.feature = 0;
    split.left = 1;
    split.right = 2;
    TreeNode leaf;
    EXPECT_NO_THROW(DecisionTree({split, leaf, leaf}, 1));
    EXPECT_THROW(DecisionTree({split, leaf}, 1), ValidationError);
    EXPECT_THROW(DecisionTree({split, leaf, leaf}, 0), ValidationError);
    split.left = 0;
    EXPECT_THROW(DecisionTree({split, leaf, leaf}, 1), ValidationError);
    EXPECT_THROW(DecisionTree({}, 1), ValidationError);
}

TEST(Forest, SchemaMismatchNamesBothFingerprints) {
    const auto x = extract_matrix(synth_corpus(), default_schema());
    const auto model = train_forest(x, labels_of(synth_corpus()), small_params()).model;
    const auto other = numeric_schema(2);
    try {
        model.score(FeatureVector{other, {0.0, 0.0}});
        FAIL();
    } catch (const SchemaMismatchError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find(other->fingerprint()), std::string::npos) << msg;
        EXPECT_NE(msg.find(default_schema()->fingerprint()), std::string::npos) << msg;
    }
}

TEST(Forest, ScoresAreQuantized) {
    const auto x = extract_matrix(synth_corpus(), default_schema());
    ForestParams params = small_params(3);
    params.n_trees = 100;
    const auto trained = train_forest(x, labels_of(synth_corpus()), params);

    SynthConfig probe;
    probe.seed = 1234;
    probe.n_humans = 500;
    probe.n_bots = 500;
    probe.separation = 0.5;
    for (const auto& e : generate_synthetic(probe).entries) {
        const auto s = trained.model.score(extract(e.account, default_schema()));
        ASSERT_EQ(s.trees, 100u);
        ASSERT_TRUE(is_multiple_of(s.value(), 100)) << s.value();
    }
    for (double oob : trained.oob_scores) {
        EXPECT_GE(oob, 0.0);
        EXPECT_LE(oob, 1.0);
    }

    params.n_trees = 1;
    const auto single = train_forest(x, labels_of(synth_corpus()), params).model;
    for (std::size_t r = 0; r < x.rows; ++r) {
        const double v = single.score_row(x.row(r)).value();
        EXPECT_TRUE(v == 0.0 || v == 1.0);
    }
}

TEST(Forest, DeterministicAndThreadIndependent) {
    auto params = small_params(77);
    params.threads = 1;
    const auto a = train(synth_corpus(), default_schema(), params);
    params.threads = 8;
    const auto b = train(synth_corpus(), default_schema(), params);
    EXPECT_EQ(a, b);
    ModelBundle ba{default_schema(), a, {}, {}}, bb{default_schema(), b, {}, {}};
    ba.cap.bot = ba.cap.human = bb.cap.bot = bb.cap.human = fit_density(std::vector<double>{0.1, 0.9});
    EXPECT_EQ(serialize_model(ba), serialize_model(bb));

    params.seed = 78;
    EXPECT_FALSE(train(synth_corpus(), default_schema(), params) == a);
}

TEST(Forest, TrainingMetadataIsRecorded) {
    const auto models = train(synth_corpus(), default_schema(), small_params(5));
    EXPECT_EQ(models.main.meta().seed, 5u);
    EXPECT_EQ(models.main.meta().corpora, std::vector<std::string>{"synthetic"});
    EXPECT_FALSE(models.main.meta().data_as_of.empty());
    EXPECT_EQ(models.main.n_trees(), 25u);
}

TEST(Forest, BundleCoversEveryGroup) {
    const auto models = train(synth_corpus(), default_schema(), small_params(6));
    EXPECT_EQ(models.groups.size(), 6u);
    EXPECT_TRUE(models.warnings.empty());

    Account silent;
    silent.id = "silent";
    silent.created_at = at("2019-01-01T00:00:00Z");
    const auto bundle = score_bundle(models, silent);
    EXPECT_EQ(bundle.subscores.size(), 6u);
    for (const auto& [g, s] : bundle.subscores) {
        EXPECT_GE(s.value(), 0.0);
        EXPECT_LE(s.value(), 1.0);
    }
    EXPECT_LE(bundle.raw.value(), 1.0);
    EXPECT_LE(bundle.language_independent.value(), 1.0);
}

TEST(Forest, LanguageIndependentScoreIgnoresText) {
    const auto models = train(synth_corpus(), default_schema(), small_params(9));
    for (std::size_t i = 0; i < 40; ++i) {
        auto a = synth_corpus().entries[i].account;
        auto b = a;
        for (auto& p : b.posts) {
            p.text = "win free prizes now http://x.example";
            p.lang = "xx";
        }
        b.lang = "zz";
        EXPECT_EQ(score_bundle(models, a).language_independent, score_bundle(models, b).language_independent);
    }
}

TEST(Forest, EmptyGroupSubmodelIsOmittedWithWarning) {
    const auto full = default_schema();
    std::vector<FeatureSpec> specs;
    for (const auto& s : full->specs()) {
        if (s.group == FeatureGroup::user_meta || s.group == FeatureGroup::temporal) specs.push_back(s);
    }
    const auto schema = std::make_shared<const FeatureSchema>(full->version(), specs);
    const auto x = extract_matrix(synth_corpus(), full).select(schema);
    const auto models = train(x, labels_of(synth_corpus()), small_params(2), {});
    EXPECT_EQ(models.groups.size(), 2u);
    EXPECT_EQ(models.warnings.size(), 4u);
}
