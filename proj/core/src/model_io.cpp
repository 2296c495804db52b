#include "botcal/model_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "botcal/error.hpp"
#include "internal.hpp"

namespace botcal {
namespace {

using nlohmann::json;

constexpr std::string_view kTrailer = "end botcal-model";

json schema_json(const FeatureSchema& schema) {
    json features = json::array();
    for (const auto& s : schema.specs()) {
        features.push_back(json::array({s.name, std::string(to_string(s.group)), s.linguistic, s.default_value}));
    }
    return {{"version", schema.version()}, {"fingerprint", schema.fingerprint()}, {"features", features}};
}

SchemaPtr schema_from(const json& j) {
    std::vector<FeatureSpec> specs;
    for (const auto& f : j.at("features")) {
        specs.push_back({f.at(0).get<std::string>(), parse_group(f.at(1).get<std::string>()), f.at(2).get<bool>(),
                         f.at(3).get<double>()});
    }
    auto schema = std::make_shared<const FeatureSchema>(j.at("version").get<std::string>(), std::move(specs));
    const auto stored = j.at("fingerprint").get<std::string>();
    if (schema->fingerprint() != stored) {
        throw ParseError("schema fingerprint " + stored + " does not match its roster (" + schema->fingerprint() + ")");
    }
    return schema;
}

json forest_json(const ForestModel& forest) {
    json names = json::array();
    for (const auto& s : forest.schema()->specs()) names.push_back(s.name);
    const auto& m = forest.meta();
    json meta{{"seed", m.seed},
              {"corpora", m.corpora},
              {"data_as_of", m.data_as_of},
              {"min_leaf", m.min_leaf},
              {"features_per_split", m.features_per_split},
              {"bootstrap", m.bootstrap}};
    json trees = json::array();
    for (const auto& t : forest.trees()) {
        // Leaves are 0/1 votes; splits are [feature, threshold, left, right].
        json nodes = json::array();
        for (const auto& n : t.nodes()) {
            if (n.is_leaf()) {
                nodes.push_back(n.bot ? 1 : 0);
            } else {
                nodes.push_back(json::array({n.feature, n.threshold, n.left, n.right}));
            }
        }
        trees.push_back(std::move(nodes));
    }
    return {{"features", names}, {"fingerprint", forest.fingerprint()}, {"meta", meta}, {"trees", trees}};
}

ForestModel forest_from(const json& j, const SchemaPtr& parent) {
    std::vector<FeatureSpec> specs;
    for (const auto& name : j.at("features")) {
        const auto n = name.get<std::string>();
        const auto idx = parent->index_of(n);
        if (!idx) throw ParseError("forest references unknown feature '" + n + "'");
        specs.push_back((*parent)[*idx]);
    }
    auto schema = std::make_shared<const FeatureSchema>(parent->version(), std::move(specs));
    if (schema->fingerprint() != j.at("fingerprint").get<std::string>()) {
        throw ParseError("forest fingerprint does not match its feature list");
    }
    const auto& mj = j.at("meta");
    TrainingMeta meta;
    meta.seed = mj.at("seed").get<std::uint64_t>();
    meta.corpora = mj.at("corpora").get<std::vector<std::string>>();
    meta.data_as_of = mj.at("data_as_of").get<std::string>();
    meta.min_leaf = mj.at("min_leaf").get<int>();
    meta.features_per_split = mj.at("features_per_split").get<int>();
    meta.bootstrap = mj.at("bootstrap").get<bool>();

    std::vector<DecisionTree> trees;
    for (const auto& tj : j.at("trees")) {
        std::vector<TreeNode> nodes;
        nodes.reserve(tj.size());
        for (const auto& nj : tj) {
            TreeNode n;
            if (nj.is_number_integer()) {
                n.bot = nj.get<int>() != 0;
            } else {
                n.feature = nj.at(0).get<int>();
                n.threshold = nj.at(1).get<double>();
                n.left = nj.at(2).get<int>();
                n.right = nj.at(3).get<int>();
                if (n.feature < 0) throw ParseError("negative split feature");
            }
            nodes.push_back(n);
        }
        trees.emplace_back(std::move(nodes), schema->size());
    }
    return ForestModel(std::move(schema), std::move(trees), std::move(meta));
}

json calibrator_json(const Calibrator& c) {
    return {{"slope", c.slope}, {"intercept", c.intercept}, {"smoothed", c.smoothed}, {"provenance", c.provenance}};
}

Calibrator calibrator_from(const json& j) {
    Calibrator c;
    c.slope = j.at("slope").get<double>();
    c.intercept = j.at("intercept").get<double>();
    c.smoothed = j.at("smoothed").get<bool>();
    c.provenance = j.at("provenance").get<std::string>();
    if (!std::isfinite(c.slope) || !std::isfinite(c.intercept)) throw ParseError("non-finite calibrator");
    return c;
}

json density_json(const BernsteinDensity& d) {
    return {{"degree", d.degree},
            {"weights", d.weights},
            {"label", std::string(to_string(d.label))},
            {"n_samples", d.n_samples},
            {"score_space", d.score_space}};
}

BernsteinDensity density_from(const json& j) {
    BernsteinDensity d;
    d.degree = j.at("degree").get<int>();
    d.weights = j.at("weights").get<std::vector<double>>();
    d.label = parse_label(j.at("label").get<std::string>());
    d.n_samples = j.at("n_samples").get<std::size_t>();
    d.score_space = j.at("score_space").get<std::string>();
    return d;
}

json cap_json(const CapModel& cap) {
    return {{"prior", cap.prior}, {"bot", density_json(cap.bot)}, {"human", density_json(cap.human)}};
}

CapModel cap_from(const json& j) {
    CapModel cap;
    cap.prior = j.at("prior").get<double>();
    cap.bot = density_from(j.at("bot"));
    cap.human = density_from(j.at("human"));
    cap.validate();
    return cap;
}

template <class Fn>
auto decode(Fn&& fn) {
    try {
        return fn();
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed document: ") + e.what());
    }
}

json parse_json(std::string_view text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed document: ") + e.what());
    }
}

}  // namespace

std::string serialize_model(const ModelBundle& bundle) {
    json groups = json::object();
    for (const auto& [g, forest] : bundle.forests.groups) groups[std::string(to_string(g))] = forest_json(forest);
    json doc{{"schema", schema_json(*bundle.schema)},
             {"forests",
              {{"main", forest_json(bundle.forests.main)},
               {"groups", groups},
               {"language_independent", forest_json(bundle.forests.language_independent)}}},
             {"calibrator", calibrator_json(bundle.calibrator)},
             {"cap", cap_json(bundle.cap)}};
    std::string out;
    out += kModelMagic;
    out += ' ';
    out += kModelFormatVersion;
    out += '\n';
    out += doc.dump();
    out += '\n';
    out += kTrailer;
    out += '\n';
    return out;
}

ModelBundle parse_model(std::string_view text) {
    const auto eol = text.find('\n');
    if (eol == std::string_view::npos) throw ParseError("truncated model file: no header line");
    const auto header = text.substr(0, eol);
    const auto space = header.find(' ');
    if (space == std::string_view::npos || header.substr(0, space) != kModelMagic) {
        throw ParseError("not a botcal model file (header '" + std::string(header.substr(0, 40)) + "')");
    }
    const auto version = header.substr(space + 1);
    if (version != kModelFormatVersion) {
        throw VersionError("model file version " + std::string(version) + " is not supported (expected " +
                           std::string(kModelFormatVersion) + ")");
    }
    const std::string trailer = "\n" + std::string(kTrailer) + "\n";
    if (text.size() < eol + trailer.size() || text.substr(text.size() - trailer.size()) != trailer) {
        throw ParseError("truncated model file: missing trailer");
    }
    const auto body = text.substr(eol + 1, text.size() - trailer.size() - eol - 1);
    const json doc = parse_json(body);

    return decode([&] {
        ModelBundle bundle;
        bundle.schema = schema_from(doc.at("schema"));
        const auto& forests = doc.at("forests");
        bundle.forests.main = forest_from(forests.at("main"), bundle.schema);
        if (bundle.forests.main.fingerprint() != bundle.schema->fingerprint()) {
            throw ParseError("main forest does not use the bundle schema");
        }
        for (const auto& [name, fj] : forests.at("groups").items()) {
            bundle.forests.groups.emplace(parse_group(name), forest_from(fj, bundle.schema));
        }
        bundle.forests.language_independent = forest_from(forests.at("language_independent"), bundle.schema);
        bundle.calibrator = calibrator_from(doc.at("calibrator"));
        bundle.cap = cap_from(doc.at("cap"));
        return bundle;
    });
}

void save_model(const ModelBundle& bundle, const std::filesystem::path& path) {
    const auto text = serialize_model(bundle);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write model file '" + path.string() + "'");
    out << text;
    if (!out) throw std::runtime_error("write failed for model file '" + path.string() + "'");
}

ModelBundle load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open model file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_model(ss.str());
}

std::string model_version(const ModelBundle& bundle) {
    return std::string(kModelFormatVersion) + "-" + detail::hex64(detail::fnv1a(serialize_model(bundle))).substr(0, 12);
}

std::string serialize_calibrator(const Calibrator& cal) { return calibrator_json(cal).dump(2) + "\n"; }

Calibrator parse_calibrator(std::string_view text) {
    const auto j = parse_json(text);
    return decode([&] { return calibrator_from(j); });
}

std::string serialize_cap_model(const CapModel& cap) { return cap_json(cap).dump(2) + "\n"; }

CapModel parse_cap_model(std::string_view text) {
    const auto j = parse_json(text);
    return decode([&] { return cap_from(j); });
}

}  // namespace botcal
