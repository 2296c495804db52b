#include "botcal/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "botcal/error.hpp"
#include "botcal/evaluation.hpp"
#include "botcal/scoring.hpp"
#include "botcal/service.hpp"
#include "botcal/synth.hpp"
#include "internal.hpp"

namespace botcal {
namespace {

struct ForestFlags {
    int trees = 100;
    int min_leaf = 1;
    int features_per_split = 0;
    int threads = 0;

    void add(CLI::App& cmd) {
        cmd.add_option("--trees", trees, "Trees per forest")->check(CLI::PositiveNumber);
        cmd.add_option("--min-leaf", min_leaf, "Stop splitting at this many samples")->check(CLI::PositiveNumber);
        cmd.add_option("--features-per-split", features_per_split, "Candidate features per split (0 = ceil(sqrt d))")
            ->check(CLI::NonNegativeNumber);
        cmd.add_option("--threads", threads, "Training threads (0 = all cores; output does not depend on it)")
            ->check(CLI::NonNegativeNumber);
    }
    ForestParams params(std::uint64_t seed) const {
        ForestParams p;
        p.n_trees = trees;
        p.min_leaf = min_leaf;
        p.features_per_split = features_per_split;
        p.threads = threads;
        p.seed = seed;
        p.validate();
        return p;
    }
};

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    return out;
}

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

// CSV with a header naming at least `score` and `label` columns.
std::vector<ScoredLabel> read_scores_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    auto split = [](const std::string& line) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
            cells.push_back(cell);
        }
        return cells;
    };
    std::string line;
    if (!std::getline(in, line)) throw ParseError("scores file '" + path + "' is empty");
    const auto header = split(line);
    std::size_t score_col = header.size(), label_col = header.size();
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == "score") score_col = i;
        if (header[i] == "label") label_col = i;
    }
    if (score_col == header.size() || label_col == header.size()) {
        throw ParseError("scores file needs 'score' and 'label' columns", 1);
    }
    std::vector<ScoredLabel> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto cells = split(line);
        if (cells.size() <= std::max(score_col, label_col)) throw ParseError("too few columns", line_no);
        ScoredLabel s;
        if (!detail::parse_double(cells[score_col], s.score) || !std::isfinite(s.score)) {
            throw ParseError("bad score '" + cells[score_col] + "'", line_no);
        }
        const auto& l = cells[label_col];
        if (l == "1") {
            s.label = Label::bot;
        } else if (l == "0") {
            s.label = Label::human;
        } else {
            try {
                s.label = parse_label(l);
            } catch (const ValidationError& e) {
                throw ParseError(e.what(), line_no);
            }
        }
        out.push_back(s);
    }
    return out;
}

void write_reliability_csv(std::ostream& out, const ReliabilityCurve& curve) {
    out << "bin_lo,bin_hi,mean_score,tp_fraction,count\n";
    for (const auto& b : curve.bins) {
        out << detail::format_double(b.lo) << ',' << detail::format_double(b.hi) << ',';
        if (b.empty()) {
            out << ",,0\n";
        } else {
            out << detail::format_double(b.mean_score) << ',' << detail::format_double(b.positive_fraction) << ','
                << b.count << '\n';
        }
    }
}

CorpusLoad load_and_report(const std::string& accounts, const std::string& labels, std::ostream& err) {
    auto load = load_corpus(accounts, labels);
    validate(load.corpus);
    if (!load.unlabeled_ids.empty()) {
        err << "warning: " << load.unlabeled_ids.size() << " account(s) without a label were skipped\n";
    }
    if (!load.orphan_labels.empty()) {
        err << "warning: " << load.orphan_labels.size() << " label(s) reference missing accounts\n";
    }
    return load;
}

ModelBundle maybe_update_model(const std::string& model_in, const std::string& model_out) {
    if (model_in.empty() != model_out.empty()) {
        throw ValidationError("--model and --model-out must be given together");
    }
    return model_in.empty() ? ModelBundle{} : load_model(model_in);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"botcal: bot scores, calibration and complete automation probability"};
    app.require_subcommand(1);
    std::uint64_t seed = 0;
    app.add_option("--seed", seed, "Seed for all randomness")->envname("BOTCAL_SEED");

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a seeded synthetic labeled corpus");
    SynthConfig synth_cfg;
    std::string synth_out, synth_labels, synth_mix;
    synth->add_option("--seed", seed, "Seed")->envname("BOTCAL_SEED");
    synth->add_option("--humans", synth_cfg.n_humans, "Human accounts")->required();
    synth->add_option("--bots", synth_cfg.n_bots, "Bot accounts")->required();
    synth->add_option("--separation", synth_cfg.separation, "Class distinguishability in [0,1]")
        ->check(CLI::Range(0.0, 1.0));
    synth->add_option("--archetypes", synth_mix, "Bot mix, e.g. spam=1,political=2 (default: all equal)");
    synth->add_option("--name", synth_cfg.name, "Corpus name and id prefix");
    synth->add_option("--out", synth_out, "Accounts file (JSON lines)")->required();
    synth->add_option("--labels", synth_labels, "Labels CSV")->required();

    // train
    auto* train_cmd = app.add_subcommand("train", "Train forests, calibrator and CAP densities");
    std::string accounts, labels, model_path, oof_out;
    ForestFlags forest_flags;
    TrainOptions train_opts;
    bool no_smoothing = false;
    train_cmd->add_option("--seed", seed, "Seed")->envname("BOTCAL_SEED");
    train_cmd->add_option("--accounts", accounts, "Accounts file")->required();
    train_cmd->add_option("--labels", labels, "Labels CSV")->required();
    train_cmd->add_option("--out", model_path, "Model bundle to write")->required();
    train_cmd->add_option("--folds", train_opts.folds, "Folds for out-of-fold calibration scores")
        ->check(CLI::Range(2, 100));
    train_cmd->add_option("--prior", train_opts.prior, "CAP prior P(Bot)")->check(CLI::Range(0.0, 1.0));
    train_cmd->add_option("--degree", train_opts.degree, "Bernstein degree")->check(CLI::PositiveNumber);
    train_cmd->add_flag("--no-smoothing", no_smoothing, "Disable Platt target smoothing");
    train_cmd->add_option("--oof-out", oof_out, "Write out-of-fold scores CSV (id,score,label,fold)");
    forest_flags.add(*train_cmd);

    // calibrate
    auto* calibrate_cmd = app.add_subcommand("calibrate", "Fit Platt scaling on (score,label) CSV");
    std::string scores_path, params_out, reliability_out, reliability_cal_out, model_in, model_out;
    calibrate_cmd->add_option("--scores", scores_path, "CSV with score and label columns")->required();
    calibrate_cmd->add_option("--out", params_out, "Calibrator parameters (JSON)")->required();
    calibrate_cmd->add_option("--reliability", reliability_out, "Reliability curve of the input scores");
    calibrate_cmd->add_option("--reliability-calibrated", reliability_cal_out,
                              "Reliability curve after calibration");
    calibrate_cmd->add_flag("--no-smoothing", no_smoothing, "Disable Platt target smoothing");
    calibrate_cmd->add_option("--model", model_in, "Bundle whose calibrator is replaced");
    calibrate_cmd->add_option("--model-out", model_out, "Updated bundle");

    // cap-fit
    auto* cap_cmd = app.add_subcommand("cap-fit", "Fit Bernstein likelihoods and CAP curves on raw scores");
    std::string densities_out, curve_out;
    int degree = kDefaultBernsteinDegree;
    double prior = kPublishedBotPrior;
    std::size_t grid = 101;
    cap_cmd->add_option("--scores", scores_path, "CSV with raw score and label columns")->required();
    cap_cmd->add_option("--out", densities_out, "Density coefficients (JSON)")->required();
    cap_cmd->add_option("--curve", curve_out, "Curve CSV: s,f_bot,f_human,cap@priors");
    cap_cmd->add_option("--degree", degree, "Bernstein degree")->check(CLI::PositiveNumber);
    cap_cmd->add_option("--prior", prior, "Default prior stored with the model")->check(CLI::Range(0.0, 1.0));
    cap_cmd->add_option("--grid", grid, "Curve points")->check(CLI::Range(2, 100000));
    cap_cmd->add_option("--model", model_in, "Bundle whose CAP model is replaced");
    cap_cmd->add_option("--model-out", model_out, "Updated bundle");

    // score
    auto* score_cmd = app.add_subcommand("score", "Score an accounts file with a model bundle");
    std::string responses_out;
    std::optional<double> prior_override;
    score_cmd->add_option("--model", model_path, "Model bundle")->required();
    score_cmd->add_option("--accounts", accounts, "Accounts file")->required();
    score_cmd->add_option("--out", responses_out, "Responses (JSON lines); stdout when omitted");
    score_cmd->add_option("--prior", prior_override, "CAP prior override")->check(CLI::Range(0.0, 1.0));

    // evaluate
    auto* eval_cmd = app.add_subcommand("evaluate", "Stratified k-fold cross-validation");
    std::string metrics_out, experiment = "cv";
    int folds = 5;
    bool shuffle = false;
    eval_cmd->add_option("--seed", seed, "Seed")->envname("BOTCAL_SEED");
    eval_cmd->add_option("--accounts", accounts, "Accounts file")->required();
    eval_cmd->add_option("--labels", labels, "Labels CSV")->required();
    eval_cmd->add_option("--folds", folds, "k")->check(CLI::Range(2, 100));
    eval_cmd->add_option("--out", metrics_out, "Metrics CSV");
    eval_cmd->add_option("--oof-out", oof_out, "Out-of-fold scores CSV");
    eval_cmd->add_option("--experiment", experiment, "Experiment name in the metrics row");
    eval_cmd->add_flag("--shuffle-labels", shuffle, "Permute labels first (null control)");
    forest_flags.add(*eval_cmd);

    // matrix
    auto* matrix_cmd = app.add_subcommand("matrix", "Cross-dataset generalization matrix");
    std::vector<std::string> corpus_specs;
    std::string matrix_out;
    bool leave_one_out = false;
    matrix_cmd->add_option("--seed", seed, "Seed")->envname("BOTCAL_SEED");
    matrix_cmd->add_option("--corpus", corpus_specs, "accounts.jsonl,labels.csv (repeat, in training order)")
        ->required()
        ->allow_extra_args(false);
    matrix_cmd->add_option("--folds", folds, "k for in-sample cells")->check(CLI::Range(2, 100));
    matrix_cmd->add_option("--out", matrix_out, "Matrix CSV; stdout when omitted");
    matrix_cmd->add_flag("--leave-one-out", leave_one_out, "Rows leave one corpus out instead of accumulating");
    forest_flags.add(*matrix_cmd);

    // serve
    auto* serve_cmd = app.add_subcommand("serve", "Serve POST /score and GET /health");
    ServiceOptions service_opts;
    serve_cmd->add_option("--model", model_path, "Model bundle")->required();
    serve_cmd->add_option("--host", service_opts.host, "Bind address");
    serve_cmd->add_option("--port", service_opts.port, "Port")->check(CLI::Range(0, 65535));
    serve_cmd->add_option("--prior", service_opts.default_prior, "Default CAP prior")->check(CLI::Range(0.0, 1.0));

    // schema
    auto* schema_cmd = app.add_subcommand("schema", "Print the feature roster as CSV");
    std::string schema_out;
    schema_cmd->add_option("--out", schema_out, "Write to file instead of stdout");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        if (!reversed.empty()) reversed.pop_back();  // program name
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        if (code == 0) return kExitOk;
        err << app.help();
        return kExitValidation;
    }

    try {
        if (synth->parsed()) {
            synth_cfg.seed = seed;
            if (!synth_mix.empty()) {
                synth_cfg.archetype_weights = {0, 0, 0, 0};
                std::stringstream ss(synth_mix);
                std::string item;
                while (std::getline(ss, item, ',')) {
                    const auto eq = item.find('=');
                    const auto a = parse_archetype(item.substr(0, eq));
                    double w = 1.0;
                    if (eq != std::string::npos && !detail::parse_double(item.substr(eq + 1), w)) {
                        throw ValidationError("bad archetype weight in '" + item + "'");
                    }
                    synth_cfg.archetype_weights[static_cast<std::size_t>(a)] = w;
                }
            }
            const auto corpus = generate_synthetic(synth_cfg);
            save_corpus(corpus, synth_out, synth_labels);
            out << "wrote " << corpus.entries.size() << " accounts (" << corpus.count(Label::human) << " human, "
                << corpus.count(Label::bot) << " bot) to " << synth_out << '\n';
        } else if (train_cmd->parsed()) {
            train_opts.forest = forest_flags.params(seed);
            train_opts.platt.smooth_targets = !no_smoothing;
            const auto load = load_and_report(accounts, labels, err);
            const auto fit = fit_bundle(load.corpus, default_schema(), train_opts);
            for (const auto& w : fit.bundle.forests.warnings) err << "warning: " << w << '\n';
            save_model(fit.bundle, model_path);
            if (!oof_out.empty()) {
                auto f = open_out(oof_out);
                write_scores_csv(f, fit.cv.scores);
            }
            out << "trained " << fit.bundle.forests.main.n_trees() << " trees on " << load.corpus.entries.size()
                << " accounts; out-of-fold AUC " << fixed(fit.cv.metrics.auc, 4) << ", accuracy "
                << fixed(fit.cv.metrics.accuracy, 4) << "; model " << model_version(fit.bundle) << '\n';
        } else if (calibrate_cmd->parsed()) {
            auto bundle = maybe_update_model(model_in, model_out);
            const auto scores = read_scores_csv(scores_path);
            PlattOptions opts;
            opts.smooth_targets = !no_smoothing;
            auto cal = fit_platt(scores, opts);
            cal.provenance = "scores file '" + std::filesystem::path(scores_path).filename().string() + "'";
            auto f = open_out(params_out);
            f << serialize_calibrator(cal);
            const auto before = reliability(scores);
            std::vector<ScoredLabel> calibrated = scores;
            for (auto& s : calibrated) s.score = cal(s.score);
            const auto after = reliability(calibrated);
            if (!reliability_out.empty()) {
                auto r = open_out(reliability_out);
                write_reliability_csv(r, before);
            }
            if (!reliability_cal_out.empty()) {
                auto r = open_out(reliability_cal_out);
                write_reliability_csv(r, after);
            }
            if (!model_in.empty()) {
                bundle.calibrator = cal;
                save_model(bundle, model_out);
            }
            out << "slope " << detail::format_double(cal.slope) << " intercept "
                << detail::format_double(cal.intercept) << "; reliability gap " << fixed(before.mean_abs_gap(), 4)
                << " -> " << fixed(after.mean_abs_gap(), 4) << '\n';
        } else if (cap_cmd->parsed()) {
            auto bundle = maybe_update_model(model_in, model_out);
            const auto scores = read_scores_csv(scores_path);
            const auto model = fit_cap(scores, degree, prior);
            auto f = open_out(densities_out);
            f << serialize_cap_model(model);
            if (!curve_out.empty()) {
                constexpr double kCurvePriors[] = {0.05, 0.15, 0.30, 0.50};
                auto c = open_out(curve_out);
                c << "s,f_bot,f_human,cap_0.05,cap_0.15,cap_0.30,cap_0.50\n";
                for (std::size_t i = 0; i < grid; ++i) {
                    const double s = static_cast<double>(i) / static_cast<double>(grid - 1);
                    c << detail::format_double(s) << ',' << detail::format_double(model.bot(s)) << ','
                      << detail::format_double(model.human(s));
                    for (double p : kCurvePriors) c << ',' << detail::format_double(cap(model, s, Prior::user(p)).value);
                    c << '\n';
                }
            }
            if (!model_in.empty()) {
                bundle.cap = model;
                save_model(bundle, model_out);
            }
            out << "fit degree-" << degree << " densities on " << model.bot.n_samples << " bot and "
                << model.human.n_samples << " human scores\n";
        } else if (score_cmd->parsed()) {
            const auto bundle = load_model(model_path);
            check_schema(bundle);
            const auto version = model_version(bundle);
            std::optional<Prior> p;
            if (prior_override) p = Prior::user(*prior_override);
            const auto input = read_accounts(accounts);
            std::ofstream file;
            if (!responses_out.empty()) file = open_out(responses_out);
            std::ostream& sink = responses_out.empty() ? out : file;
            for (const auto& a : input) {
                const auto r = score_account(bundle, version, a, p);
                sink << to_json(r) << '\n';
                if (!responses_out.empty()) {
                    out << a.id << "  display " << fixed(r.display, 1) << "/5  cap " << fixed(r.cap, 3) << '\n';
                }
            }
        } else if (eval_cmd->parsed()) {
            const auto params = forest_flags.params(seed);
            auto corpus = load_and_report(accounts, labels, err).corpus;
            if (shuffle) corpus = shuffle_labels(corpus, seed);
            const auto plan = make_fold_plan(corpus, folds, seed);
            const auto cv = cross_validate(corpus, default_schema(), params, plan);
            if (!metrics_out.empty()) {
                auto f = open_out(metrics_out);
                write_metrics_csv(f, experiment, cv.metrics);
            }
            if (!oof_out.empty()) {
                auto f = open_out(oof_out);
                write_scores_csv(f, cv.scores);
            }
            write_metrics_csv(out, experiment, cv.metrics);
        } else if (matrix_cmd->parsed()) {
            const auto params = forest_flags.params(seed);
            std::vector<LabeledCorpus> corpora;
            for (const auto& spec : corpus_specs) {
                const auto comma = spec.find(',');
                if (comma == std::string::npos) throw ValidationError("--corpus expects accounts,labels");
                corpora.push_back(load_and_report(spec.substr(0, comma), spec.substr(comma + 1), err).corpus);
            }
            const auto matrix = generalization_matrix(corpora, default_schema(), params, folds,
                                                      leave_one_out ? MatrixMode::leave_one_out
                                                                    : MatrixMode::cumulative);
            if (matrix_out.empty()) {
                write_matrix_csv(out, matrix);
            } else {
                auto f = open_out(matrix_out);
                write_matrix_csv(f, matrix);
                out << "wrote " << matrix.cells.size() << " cells to " << matrix_out << '\n';
            }
        } else if (serve_cmd->parsed()) {
            ScoringService service(load_model(model_path), service_opts);
            service.run([&](int port) {
                out << "serving model " << service.version() << " on " << service_opts.host << ':' << port << std::endl;
            });
        } else if (schema_cmd->parsed()) {
            std::ofstream file;
            if (!schema_out.empty()) file = open_out(schema_out);
            std::ostream& sink = schema_out.empty() ? out : file;
            sink << "name,group,linguistic\n";
            for (const auto& s : default_schema()->specs()) {
                sink << s.name << ',' << to_string(s.group) << ',' << (s.linguistic ? "true" : "false") << '\n';
            }
        }
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitOk;
}

}  // namespace botcal
