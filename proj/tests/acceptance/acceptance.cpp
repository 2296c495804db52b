// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <future>
#include <sstream>
#include <string>

#include <httplib.h>

#include "botcal/cli.hpp"
#include "botcal/error.hpp"
#include "botcal/evaluation.hpp"
#include "botcal/random.hpp"
#include "botcal/scoring.hpp"
#include "botcal/service.hpp"
#include "botcal/synth.hpp"
#include "../oracles.hpp"
#include "../support.hpp"

using namespace botcal;

namespace {

// Tolerances and budgets.
constexpr double kBayesTol = 1e-9;
constexpr double kNormTol = 1e-6;
constexpr double kUniformTol = 0.05;
constexpr double kReliabilitySlack = 0.01;
constexpr double kMinSeparableAuc = 0.95;
constexpr double kMinSeparableAccuracy = 0.90;
constexpr double kNullAucLo = 0.4, kNullAucHi = 0.6;

constexpr double kBudget1 = 1, kBudget2 = 30, kBudget3 = 5, kBudget4 = 120, kBudget5 = 120;
constexpr double kBudget6 = 120, kBudget7 = 300, kBudget8 = 600, kBudget9 = 60, kBudget10 = 300;

struct Outcome {
    bool pass = false;
    std::string detail;
};

LabeledCorpus synth(std::uint64_t seed, std::size_t n, double separation = 1.0,
                    std::array<double, 4> mix = {1, 1, 1, 1}, std::string name = "synthetic") {
    SynthConfig cfg;
    cfg.seed = seed;
    cfg.n_humans = n / 2;
    cfg.n_bots = n - n / 2;
    cfg.separation = separation;
    cfg.archetype_weights = mix;
    cfg.name = std::move(name);
    return generate_synthetic(cfg);
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

template <class F>
double simpson(F&& f, int intervals) {
    const double h = 1.0 / intervals;
    double sum = f(0.0) + f(1.0);
    for (int i = 1; i < intervals; ++i) sum += f(i * h) * (i % 2 ? 4.0 : 2.0);
    return sum * h / 3.0;
}

Outcome bayes_arithmetic() {
    const double v = bayes_posterior(0.15, 4.0, 1.0).value;
    bool ok = std::abs(v - 12.0 / 29.0) <= kBayesTol;

    Rng rng(1);
    std::vector<double> bots, humans;
    for (int i = 0; i < 400; ++i) {
        bots.push_back(std::sqrt(rng.uniform()));
        humans.push_back(1.0 - std::sqrt(rng.uniform()));
    }
    CapModel m{fit_density(bots, 40, Label::bot), fit_density(humans, 40, Label::human), 0.15};
    CapModel same{m.bot, m.bot, 0.15};
    same.human.label = Label::human;
    for (int i = 0; i <= 100; ++i) {
        const double s = i / 100.0;
        ok = ok && cap(m, s, Prior::user(0.0)).value == 0.0 && cap(m, s, Prior::user(1.0)).value == 1.0;
        for (double p : {0.05, 0.15, 0.5, 0.9}) ok = ok && cap(same, s, Prior::user(p)).value == p;
    }
    return {ok, fmt("cap(0.15, 4:1) = %.12f vs 12/29 = %.12f", v, 12.0 / 29.0)};
}

Outcome density_normalization() {
    Rng rng(2);
    double worst_integral = 0.0, min_value = 1e300;
    const std::size_t sizes[] = {10, 100, 10000};
    for (int set = 0; set < 50; ++set) {
        const std::size_t n = sizes[set % 3];
        std::vector<double> s;
        for (std::size_t i = 0; i < n; ++i) {
            s.push_back(set % 2 ? static_cast<double>(rng.below(101)) / 100.0 : rng.uniform() * rng.uniform());
        }
        const auto f = fit_density(s, 40);
        worst_integral = std::max(worst_integral, std::abs(simpson(f, 10000) - 1.0));
        for (int i = 1; i <= 999; ++i) min_value = std::min(min_value, f(i / 1000.0));
    }
    return {worst_integral <= kNormTol && min_value >= 0.0,
            fmt("max |integral - 1| = %.3g, min density on grid = %.3g", worst_integral, min_value)};
}

Outcome uniform_recovery() {
    std::vector<double> s;
    for (int i = 0; i <= 10000; ++i) s.push_back(i / 10000.0);
    const auto f = fit_density(s, 40);
    double worst = 0.0;
    for (int i = 1; i <= 99; ++i) worst = std::max(worst, std::abs(f(i / 100.0) - 1.0));
    return {worst < kUniformTol, fmt("max |f - 1| on [0.01, 0.99] = %.4f", worst)};
}

CrossValidation separable_cv() {
    static const CrossValidation cv = [] {
        const auto c = synth(2000, 2000);
        ForestParams p;
        p.seed = 2000;
        return cross_validate(c, default_schema(), p, make_fold_plan(c, 5, 2000));
    }();
    return cv;
}

Outcome auc_invariance() {
    const auto raw = separable_cv().scored_labels();
    const auto cal = fit_platt(raw);
    auto calibrated = raw;
    for (auto& s : calibrated) s.score = cal(s.score);
    const double a = auc(raw), b = auc(calibrated);
    return {cal.slope > 0 && a == b, fmt("AUC raw %.17g, calibrated %.17g, slope %.4g", a, b, cal.slope)};
}

Outcome calibration_efficacy() {
    TrainOptions opts;
    opts.forest.seed = 5;
    const auto fit = fit_bundle(synth(50, 2000), default_schema(), opts);
    const auto held_out = synth(51, 2000);
    std::vector<ScoredLabel> raw, calibrated;
    for (const auto& e : held_out.entries) {
        const double s = fit.bundle.forests.main.score(extract(e.account, default_schema())).value();
        raw.push_back({s, e.label});
        calibrated.push_back({fit.bundle.calibrator(s), e.label});
    }
    const double before = reliability(raw).mean_abs_gap(), after = reliability(calibrated).mean_abs_gap();
    return {after <= before + kReliabilitySlack, fmt("reliability gap %.4f before, %.4f after Platt", before, after)};
}

Outcome forest_semantics() {
    const auto train_set = synth(60, 600, 0.5);
    ForestParams p;
    p.seed = 60;
    const auto model = train_forest(extract_matrix(train_set, default_schema()), labels_of(train_set), p).model;
    std::size_t off_grid = 0;
    const auto probe = synth(61, 1000, 0.5);
    for (const auto& e : probe.entries) {
        const double v = model.score(extract(e.account, default_schema())).value();
        const double t = static_cast<double>(model.n_trees());
        off_grid += v != static_cast<double>(std::llround(v * t)) / t;
    }

    Rng rng(62);
    std::size_t mismatches = 0, datasets = 0;
    while (datasets < 500) {
        const std::size_t n = 2 + rng.below(7), d = 1 + rng.below(3);
        oracle::Points pts;
        std::vector<Label> labels;
        std::vector<double> data;
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> x;
            for (std::size_t f = 0; f < d; ++f) x.push_back(static_cast<double>(rng.below(5)));
            data.insert(data.end(), x.begin(), x.end());
            const bool bot = rng.bernoulli(0.5);
            pts.emplace_back(std::move(x), bot);
            labels.push_back(bot ? Label::bot : Label::human);
        }
        if (std::count(labels.begin(), labels.end(), Label::bot) % static_cast<long>(n) == 0) continue;
        ++datasets;
        std::vector<FeatureSpec> specs;
        for (std::size_t f = 0; f < d; ++f) specs.push_back({"x" + std::to_string(f), FeatureGroup::user_meta});
        const FeatureMatrix m{std::make_shared<const FeatureSchema>("oracle", specs), n, data};
        ForestParams one;
        one.n_trees = 1;
        one.bootstrap = false;
        one.features_per_split = static_cast<int>(d);
        one.seed = datasets;
        const auto tree = train_forest(m, labels, one).model;
        const auto ref = oracle::oracle_cart(pts);
        for (int probe_i = 0; probe_i < 40; ++probe_i) {
            std::vector<double> x;
            for (std::size_t f = 0; f < d; ++f) x.push_back(static_cast<double>(rng.below(11)) * 0.5 - 0.5);
            mismatches += (tree.score_row(x).votes == 1) != ref->predict(x);
        }
    }
    return {off_grid == 0 && mismatches == 0,
            fmt("%zu/1000 scores off the 1/%zu grid; %zu oracle mismatches over %zu datasets", off_grid,
                model.n_trees(), mismatches, datasets)};
}

Outcome pipeline_separability() {
    const auto& m = separable_cv().metrics;
    const auto c = shuffle_labels(synth(2000, 2000), 7);
    ForestParams p;
    p.seed = 2000;
    const double null_auc = cross_validate(c, default_schema(), p, make_fold_plan(c, 5, 7)).metrics.auc;
    return {m.auc >= kMinSeparableAuc && m.accuracy >= kMinSeparableAccuracy && null_auc >= kNullAucLo &&
                null_auc <= kNullAucHi,
            fmt("AUC %.4f, accuracy %.4f; shuffled-label AUC %.4f", m.auc, m.accuracy, null_auc)};
}

int run(std::vector<std::string> args, std::string* out = nullptr) {
    args.insert(args.begin(), "botcal");
    std::ostringstream o, e;
    const int code = run_cli(args, o, e);
    if (out) *out = o.str();
    if (code != 0) std::fprintf(stderr, "botcal %s failed: %s\n", args[1].c_str(), e.str().c_str());
    return code;
}

Outcome generalization_shape() {
    test::TempDir dir;
    const std::pair<Archetype, const char*> kinds[] = {
        {Archetype::spam, "spam"}, {Archetype::fake_follower, "fake_follower"}, {Archetype::political, "political"}};
    std::vector<std::string> args = {"matrix", "--seed", "8", "--folds", "5"};
    for (const auto& [a, name] : kinds) {
        const auto c = synth(800 + static_cast<std::uint64_t>(a), 800, 1.0, only(a), name);
        save_corpus(c, dir / (std::string(name) + ".jsonl"), dir / (std::string(name) + ".csv"));
        args.push_back("--corpus");
        args.push_back((dir / (std::string(name) + ".jsonl")).string() + "," + (dir / (std::string(name) + ".csv")).string());
    }
    std::string first, second;
    if (run(args, &first) != 0 || run(args, &second) != 0) return {false, "matrix command failed"};

    std::istringstream in(first);
    std::string line;
    std::getline(in, line);
    bool ok = line == "row,column,accuracy,mode";
    std::vector<std::vector<double>> acc(3, std::vector<double>(3, -1.0));
    std::size_t cells = 0;
    while (std::getline(in, line)) {
        std::stringstream ls(line);
        std::string row, col, a, mode;
        std::getline(ls, row, ',');
        std::getline(ls, col, ',');
        std::getline(ls, a, ',');
        std::getline(ls, mode, ',');
        const std::size_t r = cells / 3, c = cells % 3;
        const double v = std::stod(a);
        ok = ok && col == kinds[c].second && mode == (c <= r ? "cv" : "holdout") && v >= 0.0 && v <= 1.0;
        acc[r][c] = v;
        ++cells;
    }
    ok = ok && cells == 9 && first == second;
    // Bringing a corpus into training does not lower accuracy on it.
    for (std::size_t c = 1; c < 3; ++c) ok = ok && acc[c][c] >= acc[c - 1][c];
    return {ok, fmt("%zu cells, identical reruns: %s; fake_follower %.3f -> %.3f, political %.3f -> %.3f", cells,
                    first == second ? "yes" : "no", acc[0][1], acc[1][1], acc[1][2], acc[2][2])};
}

Outcome auc_oracle() {
    Rng rng(9);
    std::size_t mismatches = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 2 + rng.below(199);
        std::vector<ScoredLabel> s;
        for (std::size_t i = 0; i < n; ++i) {
            const double v = trial % 2 ? rng.uniform() : static_cast<double>(rng.below(21)) / 20.0;
            s.push_back({v, rng.bernoulli(0.5) ? Label::bot : Label::human});
        }
        s[0].label = Label::bot;
        s[1].label = Label::human;
        mismatches += auc(s) != oracle::brute_force_auc(s);
    }
    return {mismatches == 0, fmt("%zu of 50 samples differ from pair enumeration", mismatches)};
}

Outcome end_to_end() {
    auto pipeline = [](const test::TempDir& d) {
        auto p = [&](const char* f) { return (d / f).string(); };
        return run({"synth", "--seed", "10", "--humans", "1000", "--bots", "1000", "--out", p("c.jsonl"), "--labels",
                    p("c.csv")}) == 0 &&
               run({"train", "--seed", "10", "--accounts", p("c.jsonl"), "--labels", p("c.csv"), "--out",
                    p("m.botcal"), "--oof-out", p("oof.csv")}) == 0 &&
               run({"calibrate", "--scores", p("oof.csv"), "--out", p("platt.json"), "--reliability", p("rel.csv"),
                    "--model", p("m.botcal"), "--model-out", p("m2.botcal")}) == 0 &&
               run({"cap-fit", "--scores", p("oof.csv"), "--out", p("cap.json"), "--curve", p("curve.csv"),
                    "--model", p("m2.botcal"), "--model-out", p("m3.botcal")}) == 0 &&
               run({"synth", "--seed", "11", "--humans", "50", "--bots", "50", "--separation", "0.5", "--out",
                    p("probe.jsonl"), "--labels", p("probe.csv")}) == 0 &&
               run({"score", "--model", p("m3.botcal"), "--accounts", p("probe.jsonl"), "--out", p("scores.jsonl")}) ==
                   0;
    };
    test::TempDir a, b;
    if (!pipeline(a) || !pipeline(b)) return {false, "pipeline command failed"};
    std::size_t differing = 0;
    const char* artifacts[] = {"c.jsonl", "c.csv",     "m.botcal",  "oof.csv",    "platt.json",  "rel.csv",
                               "m2.botcal", "cap.json", "curve.csv", "m3.botcal", "probe.jsonl", "scores.jsonl"};
    for (const char* f : artifacts) differing += test::slurp(a / f) != test::slurp(b / f);

    ServiceOptions opts;
    opts.port = 0;
    ScoringService service(load_model(a / "m3.botcal"), opts);
    const int port = service.start();
    const auto accounts = read_accounts(a / "probe.jsonl");
    std::vector<std::future<std::string>> replies;
    for (const auto& acc : accounts) {
        replies.push_back(std::async(std::launch::async, [port, body = format_account(acc)] {
            httplib::Client client("127.0.0.1", port);
            const auto res = client.Post("/score", body, "application/json");
            return res && res->status == 200 ? res->body : std::string("<error>");
        }));
    }
    std::istringstream cli_lines(test::slurp(a / "scores.jsonl"));
    std::string line;
    std::size_t mismatched = 0;
    for (auto& r : replies) {
        std::getline(cli_lines, line);
        mismatched += r.get() != line;
    }
    service.stop();
    return {differing == 0 && mismatched == 0 && accounts.size() == 100,
            fmt("%zu of %zu artifacts differ between runs; %zu of %zu service responses differ from CLI", differing,
                std::size(artifacts), mismatched, accounts.size())};
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double budget_s;
        std::function<Outcome()> check;
    };
    const Criterion criteria[] = {
        {1, "Bayes arithmetic", kBudget1, bayes_arithmetic},
        {2, "density normalization", kBudget2, density_normalization},
        {3, "uniform recovery", kBudget3, uniform_recovery},
        {4, "AUC invariance under Platt", kBudget4, auc_invariance},
        {5, "calibration efficacy", kBudget5, calibration_efficacy},
        {6, "forest semantics", kBudget6, forest_semantics},
        {7, "pipeline separability", kBudget7, pipeline_separability},
        {8, "generalization matrix", kBudget8, generalization_shape},
        {9, "AUC oracle", kBudget9, auc_oracle},
        {10, "end-to-end determinism", kBudget10, end_to_end},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool pass = o.pass && secs < c.budget_s;
        failures += !pass;
        std::printf("%s  criterion %2d  %-28s %7.2fs (budget %4.0fs)  %s\n", pass ? "PASS" : "FAIL", c.id, c.name,
                    secs, c.budget_s, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(std::size(criteria)) - failures, std::size(criteria));
    return failures == 0 ? 0 : 1;
}
