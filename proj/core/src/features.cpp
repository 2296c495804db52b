#include "botcal/features.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "botcal/error.hpp"
#include "internal.hpp"

namespace botcal {
namespace {

constexpr std::string_view kSchemaVersion = "botcal-features-1";

// Small valence lexicon, AFINN-style integer scores.
const std::unordered_map<std::string, int>& valence_lexicon() {
    static const std::unordered_map<std::string, int> lexicon = {
        {"good", 3},      {"great", 3},     {"love", 3},      {"happy", 3},    {"awesome", 4},
        {"amazing", 4},   {"excellent", 3}, {"nice", 3},      {"win", 4},      {"best", 3},
        {"fun", 4},       {"thanks", 2},    {"thank", 2},     {"beautiful", 3}, {"glad", 3},
        {"enjoy", 2},     {"excited", 3},   {"wonderful", 4}, {"free", 1},     {"lol", 3},
        {"yes", 1},       {"hope", 2},      {"proud", 2},     {"cool", 1},     {"like", 2},
        {"bad", -3},      {"sad", -2},      {"hate", -3},     {"angry", -3},   {"terrible", -3},
        {"awful", -3},    {"worst", -3},    {"fail", -2},     {"fake", -3},    {"wrong", -2},
        {"stupid", -2},   {"crisis", -3},   {"corrupt", -3},  {"lies", -2},    {"liar", -3},
        {"fear", -2},     {"kill", -3},     {"disaster", -2}, {"no", -1},      {"poor", -2},
        {"sick", -2},     {"shame", -2},    {"attack", -1},   {"war", -2},     {"scam", -2},
    };
    return lexicon;
}

std::string fnv1a_hex(std::string_view data) { return detail::hex64(detail::fnv1a(data)); }

struct RosterEntry {
    const char* name;
    FeatureGroup group;
    bool linguistic;
    double default_value;
};

using G = FeatureGroup;

// Rates and counts impute to 0, ratios and fractions to 0.5, entropies to 0.
constexpr RosterEntry kRoster[] = {
    {"account_age_days", G::user_meta, false, 0.0},
    {"log_followers", G::user_meta, false, 0.0},
    {"log_friends", G::user_meta, false, 0.0},
    {"log_statuses", G::user_meta, false, 0.0},
    {"follower_friend_ratio", G::user_meta, false, 0.5},
    {"screen_name_length", G::user_meta, false, 0.0},
    {"screen_name_digits", G::user_meta, false, 0.0},
    {"description_length", G::user_meta, false, 0.0},
    {"lifetime_posts_per_day", G::user_meta, false, 0.0},
    {"log_friend_growth", G::user_meta, false, 0.0},
    {"deletion_mismatch", G::user_meta, false, 0.0},
    {"has_description", G::user_meta, false, 0.0},
    {"has_tz", G::user_meta, false, 0.0},
    {"has_posts", G::user_meta, false, 0.0},

    {"log_neighbor_count", G::friend_meta, false, 0.0},
    {"neighbor_lang_match", G::friend_meta, true, 0.5},
    {"neighbor_lang_match_median", G::friend_meta, true, 0.5},
    {"timezone_mismatch", G::friend_meta, false, 0.0},
    {"follower_fraction", G::friend_meta, false, 0.5},
    {"neighbor_tz_coverage", G::friend_meta, false, 0.5},

    {"repost_fraction", G::network, false, 0.5},
    {"mention_rate", G::network, false, 0.0},
    {"mention_post_fraction", G::network, false, 0.5},
    {"hashtag_rate", G::network, false, 0.0},

    {"mean_words", G::content_language, true, 0.0},
    {"std_words", G::content_language, true, 0.0},
    {"mean_word_length", G::content_language, true, 0.0},
    {"mean_chars", G::content_language, true, 0.0},
    {"url_rate", G::content_language, true, 0.0},
    {"url_post_fraction", G::content_language, true, 0.5},
    {"lexical_diversity", G::content_language, true, 0.5},
    {"duplicate_fraction", G::content_language, true, 0.5},
    {"post_lang_entropy", G::content_language, true, 0.0},
    {"post_lang_match", G::content_language, true, 0.5},

    {"mean_valence", G::sentiment, true, 0.0},
    {"std_valence", G::sentiment, true, 0.0},
    {"positive_fraction", G::sentiment, true, 0.5},
    {"negative_fraction", G::sentiment, true, 0.5},

    {"log_mean_gap", G::temporal, false, 0.0},
    {"log_std_gap", G::temporal, false, 0.0},
    {"log_min_gap", G::temporal, false, 0.0},
    {"gap_cv", G::temporal, false, 0.0},
    {"hour_entropy", G::temporal, false, 0.0},
    {"weekday_entropy", G::temporal, false, 0.0},
    {"recent_rate", G::temporal, false, 0.0},
    {"source_entropy", G::temporal, false, 0.0},
    {"distinct_sources", G::temporal, false, 0.0},
};

constexpr std::size_t kRosterSize = std::size(kRoster);

constexpr std::size_t roster_index(std::string_view name) {
    for (std::size_t i = 0; i < kRosterSize; ++i) {
        if (kRoster[i].name == name) return i;
    }
    throw std::logic_error("unknown feature");
}

double mean_of(std::span<const double> xs) {
    return xs.empty() ? 0.0 : std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

// Population standard deviation.
double sd_of(std::span<const double> xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean_of(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(xs.size()));
}

std::vector<std::string> tokens(std::string_view text) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t j = i;
        while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
        if (j > i) out.emplace_back(text.substr(i, j - i));
        i = j;
    }
    return out;
}

std::string normalize_word(std::string_view token) {
    std::size_t b = 0, e = token.size();
    while (b < e && std::ispunct(static_cast<unsigned char>(token[b]))) ++b;
    while (e > b && std::ispunct(static_cast<unsigned char>(token[e - 1]))) --e;
    std::string w(token.substr(b, e - b));
    std::transform(w.begin(), w.end(), w.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return w;
}

template <class Key>
double entropy_of_labels(const std::vector<Key>& labels) {
    std::map<Key, std::size_t> hist;
    for (const auto& l : labels) ++hist[l];
    std::vector<std::size_t> counts;
    counts.reserve(hist.size());
    for (const auto& [k, c] : hist) counts.push_back(c);
    return entropy_bits(counts);
}

double age_days(const Account& a) { return std::max(0.0, days_between(a.created_at, a.reference_time())); }

double recent_rate(const Account& a) {
    if (a.posts.empty()) return 0.0;
    // Window from the oldest listed post to the reference time, at least a day.
    const double span = std::max(1.0, days_between(a.posts.back().created_at, a.reference_time()));
    return static_cast<double>(a.posts.size()) / span;
}

using Slots = std::array<std::optional<double>, kRosterSize>;

void set(Slots& slots, std::string_view name, double value) { slots[roster_index(name)] = value; }

void user_meta(const Account& a, Slots& s) {
    const double age = age_days(a);
    const double age_floor = std::max(1.0, age);
    set(s, "account_age_days", age);
    set(s, "log_followers", std::log1p(static_cast<double>(a.followers_count)));
    set(s, "log_friends", std::log1p(static_cast<double>(a.friends_count)));
    set(s, "log_statuses", std::log1p(static_cast<double>(a.statuses_count)));
    set(s, "follower_friend_ratio",
        (static_cast<double>(a.followers_count) + 1.0) / (static_cast<double>(a.friends_count) + 1.0));
    set(s, "screen_name_length", static_cast<double>(a.screen_name.size()));
    set(s, "screen_name_digits",
        static_cast<double>(std::count_if(a.screen_name.begin(), a.screen_name.end(),
                                          [](unsigned char c) { return std::isdigit(c); })));
    set(s, "description_length", static_cast<double>(a.description.size()));
    set(s, "lifetime_posts_per_day", static_cast<double>(a.statuses_count) / age_floor);
    set(s, "log_friend_growth", std::log1p(static_cast<double>(a.friends_count) / age_floor));
    set(s, "deletion_mismatch", std::log1p(deletion_mismatch(a)));
    set(s, "has_description", a.description.empty() ? 0.0 : 1.0);
    set(s, "has_tz", a.tz_offset_minutes ? 1.0 : 0.0);
    set(s, "has_posts", a.posts.empty() ? 0.0 : 1.0);
}

void friend_meta(const Account& a, Slots& s) {
    set(s, "log_neighbor_count", std::log1p(static_cast<double>(a.neighbors.size())));
    set(s, "timezone_mismatch", timezone_mismatch(a));
    if (a.neighbors.empty()) return;

    const double n = static_cast<double>(a.neighbors.size());
    const auto followers = std::count_if(a.neighbors.begin(), a.neighbors.end(),
                                         [](const NeighborSummary& x) { return x.relation == Relation::follower; });
    const auto with_tz = std::count_if(a.neighbors.begin(), a.neighbors.end(),
                                       [](const NeighborSummary& x) { return x.tz_offset_minutes.has_value(); });
    set(s, "follower_fraction", static_cast<double>(followers) / n);
    set(s, "neighbor_tz_coverage", static_cast<double>(with_tz) / n);

    if (a.lang.empty()) return;
    std::vector<double> matches;
    matches.reserve(a.neighbors.size());
    for (const auto& nb : a.neighbors) matches.push_back(nb.lang == a.lang ? 1.0 : 0.0);
    std::sort(matches.begin(), matches.end());
    const std::size_t m = matches.size();
    const double median = m % 2 ? matches[m / 2] : 0.5 * (matches[m / 2 - 1] + matches[m / 2]);
    set(s, "neighbor_lang_match", neighbor_language_match(a));
    set(s, "neighbor_lang_match_median", median);
}

void network(const Account& a, Slots& s) {
    if (a.posts.empty()) return;
    const double n = static_cast<double>(a.posts.size());
    double reposts = 0, mentions = 0, mention_posts = 0, hashtags = 0;
    for (const auto& p : a.posts) {
        reposts += p.is_repost ? 1 : 0;
        mentions += static_cast<double>(p.mention_count);
        mention_posts += p.mention_count > 0 ? 1 : 0;
        hashtags += static_cast<double>(p.hashtag_count);
    }
    set(s, "repost_fraction", reposts / n);
    set(s, "mention_rate", mentions / n);
    set(s, "mention_post_fraction", mention_posts / n);
    set(s, "hashtag_rate", hashtags / n);
}

void content_and_sentiment(const Account& a, Slots& s) {
    if (a.posts.empty()) return;
    const double n = static_cast<double>(a.posts.size());
    const auto& lexicon = valence_lexicon();

    std::vector<double> words, chars, valences;
    std::vector<std::string> langs;
    std::unordered_set<std::string> vocabulary;
    std::unordered_set<std::string> seen_texts;
    double token_total = 0, token_chars = 0, urls = 0, url_posts = 0, duplicates = 0, lang_matches = 0;
    double positive = 0, negative = 0;

    for (const auto& p : a.posts) {
        const auto toks = tokens(p.text);
        words.push_back(static_cast<double>(toks.size()));
        chars.push_back(static_cast<double>(p.text.size()));
        int valence = 0;
        for (const auto& t : toks) {
            token_total += 1;
            token_chars += static_cast<double>(t.size());
            auto w = normalize_word(t);
            if (auto it = lexicon.find(w); it != lexicon.end()) valence += it->second;
            vocabulary.insert(std::move(w));
        }
        valences.push_back(valence);
        positive += valence > 0 ? 1 : 0;
        negative += valence < 0 ? 1 : 0;
        urls += static_cast<double>(p.url_count);
        url_posts += p.url_count > 0 ? 1 : 0;
        duplicates += seen_texts.insert(p.text).second ? 0 : 1;
        langs.push_back(p.lang);
        lang_matches += (p.lang == a.lang) ? 1 : 0;
    }

    set(s, "mean_words", mean_of(words));
    set(s, "std_words", sd_of(words));
    set(s, "mean_chars", mean_of(chars));
    set(s, "url_rate", urls / n);
    set(s, "url_post_fraction", url_posts / n);
    set(s, "duplicate_fraction", duplicates / n);
    set(s, "post_lang_entropy", entropy_of_labels(langs));
    if (!a.lang.empty()) set(s, "post_lang_match", lang_matches / n);
    if (token_total > 0) {
        set(s, "mean_word_length", token_chars / token_total);
        set(s, "lexical_diversity", static_cast<double>(vocabulary.size()) / token_total);
    }

    set(s, "mean_valence", mean_of(valences));
    set(s, "std_valence", sd_of(valences));
    set(s, "positive_fraction", positive / n);
    set(s, "negative_fraction", negative / n);
}

void temporal(const Account& a, Slots& s) {
    if (a.posts.empty()) return;
    using namespace std::chrono;
    std::array<std::size_t, 24> hours{};
    std::array<std::size_t, 7> weekdays{};
    for (const auto& p : a.posts) {
        const auto day = floor<days>(p.created_at);
        ++hours[static_cast<std::size_t>(floor<std::chrono::hours>(p.created_at - day).count())];
        ++weekdays[weekday{day}.c_encoding()];
    }
    set(s, "hour_entropy", entropy_bits(hours));
    set(s, "weekday_entropy", entropy_bits(weekdays));
    set(s, "recent_rate", recent_rate(a));
    set(s, "source_entropy", source_entropy(a));
    std::unordered_set<std::string> sources;
    for (const auto& p : a.posts) sources.insert(p.source);
    set(s, "distinct_sources", static_cast<double>(sources.size()));

    if (a.posts.size() < 2) return;
    std::vector<double> gaps;
    gaps.reserve(a.posts.size() - 1);
    for (std::size_t i = 0; i + 1 < a.posts.size(); ++i) {
        gaps.push_back(static_cast<double>((a.posts[i].created_at - a.posts[i + 1].created_at).count()));
    }
    const double m = mean_of(gaps);
    const double sd = sd_of(gaps);
    set(s, "log_mean_gap", std::log1p(m));
    set(s, "log_std_gap", std::log1p(sd));
    set(s, "log_min_gap", std::log1p(*std::min_element(gaps.begin(), gaps.end())));
    set(s, "gap_cv", m > 0 ? sd / m : 0.0);
}

}  // namespace

std::string_view to_string(FeatureGroup group) {
    switch (group) {
        case G::user_meta: return "user_meta";
        case G::friend_meta: return "friend_meta";
        case G::network: return "network";
        case G::content_language: return "content_language";
        case G::sentiment: return "sentiment";
        case G::temporal: return "temporal";
    }
    return "unknown";
}

FeatureGroup parse_group(std::string_view text) {
    for (auto g : kAllGroups) {
        if (to_string(g) == text) return g;
    }
    throw ValidationError("unknown feature group '" + std::string(text) + "'");
}

FeatureSchema::FeatureSchema(std::string version, std::vector<FeatureSpec> specs)
    : version_(std::move(version)), specs_(std::move(specs)) {
    std::unordered_set<std::string> names;
    std::string canonical = version_;
    for (const auto& s : specs_) {
        if (!names.insert(s.name).second) throw ValidationError("duplicate feature name '" + s.name + "'");
        char def[40];
        std::snprintf(def, sizeof def, "%.17g", s.default_value);
        canonical += '\n' + s.name + '|' + std::string(to_string(s.group)) + '|' +
                     (s.linguistic ? "1" : "0") + '|' + def;
    }
    fingerprint_ = fnv1a_hex(canonical);
}

std::optional<std::size_t> FeatureSchema::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < specs_.size(); ++i) {
        if (specs_[i].name == name) return i;
    }
    return std::nullopt;
}

FeatureSchema FeatureSchema::slice(FeatureGroup group) const {
    std::vector<FeatureSpec> out;
    std::copy_if(specs_.begin(), specs_.end(), std::back_inserter(out),
                 [group](const FeatureSpec& s) { return s.group == group; });
    return FeatureSchema(version_, std::move(out));
}

FeatureSchema FeatureSchema::without_linguistic() const {
    std::vector<FeatureSpec> out;
    std::copy_if(specs_.begin(), specs_.end(), std::back_inserter(out),
                 [](const FeatureSpec& s) { return !s.linguistic; });
    if (out.empty()) {
        throw ValidationError("every feature is linguistic; a language-independent model is impossible");
    }
    return FeatureSchema(version_, std::move(out));
}

std::vector<std::size_t> FeatureSchema::columns_in(const FeatureSchema& parent) const {
    std::vector<std::size_t> cols;
    cols.reserve(specs_.size());
    for (const auto& s : specs_) {
        auto idx = parent.index_of(s.name);
        if (!idx) throw SchemaMismatchError("feature '" + s.name + "' missing from schema " + parent.fingerprint());
        cols.push_back(*idx);
    }
    return cols;
}

SchemaPtr default_schema() {
    static const SchemaPtr schema = [] {
        std::vector<FeatureSpec> specs;
        for (const auto& r : kRoster) specs.push_back({r.name, r.group, r.linguistic, r.default_value});
        return std::make_shared<const FeatureSchema>(std::string(kSchemaVersion), std::move(specs));
    }();
    return schema;
}

double FeatureVector::at(std::string_view name) const {
    auto idx = schema->index_of(name);
    if (!idx) throw std::out_of_range("no feature '" + std::string(name) + "'");
    return values[*idx];
}

double entropy_bits(std::span<const std::size_t> counts) {
    const double total = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::size_t{0}));
    if (total <= 0) return 0.0;
    double h = 0.0;
    for (auto c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / total;
        h -= p * std::log2(p);
    }
    return std::max(0.0, h);
}

double neighbor_language_match(const Account& a) {
    if (a.neighbors.empty() || a.lang.empty()) return 0.5;
    const auto same = std::count_if(a.neighbors.begin(), a.neighbors.end(),
                                    [&](const NeighborSummary& n) { return n.lang == a.lang; });
    return static_cast<double>(same) / static_cast<double>(a.neighbors.size());
}

double timezone_mismatch(const Account& a) {
    if (!a.tz_offset_minutes) return 0.0;
    std::size_t with_tz = 0, far = 0;
    for (const auto& n : a.neighbors) {
        if (!n.tz_offset_minutes) continue;
        ++with_tz;
        if (std::abs(*n.tz_offset_minutes - *a.tz_offset_minutes) > 120) ++far;
    }
    return with_tz ? static_cast<double>(far) / static_cast<double>(with_tz) : 0.0;
}

double source_entropy(const Account& a) {
    std::vector<std::string> sources;
    sources.reserve(a.posts.size());
    for (const auto& p : a.posts) sources.push_back(p.source);
    return entropy_of_labels(sources);
}

double deletion_mismatch(const Account& a) {
    if (a.posts.empty()) return 0.0;
    const double age = std::max(1.0, age_days(a));
    // Lifetime rate floored at one post over the account age.
    const double lifetime = std::max(static_cast<double>(a.statuses_count), 1.0) / age;
    return recent_rate(a) / lifetime;
}

FeatureVector extract(const Account& account, const SchemaPtr& schema) {
    Slots slots{};
    user_meta(account, slots);
    friend_meta(account, slots);
    network(account, slots);
    content_and_sentiment(account, slots);
    temporal(account, slots);

    FeatureVector out{schema, {}};
    out.values.reserve(schema->size());
    for (const auto& spec : schema->specs()) {
        std::size_t idx = kRosterSize;
        for (std::size_t i = 0; i < kRosterSize; ++i) {
            if (kRoster[i].name == spec.name) {
                idx = i;
                break;
            }
        }
        if (idx == kRosterSize) throw ValidationError("schema feature '" + spec.name + "' is not computable");
        double v = slots[idx].value_or(spec.default_value);
        if (!std::isfinite(v)) v = spec.default_value;
        out.values.push_back(v);
    }
    return out;
}

FeatureVector project(const FeatureVector& vec, const SchemaPtr& sub) {
    FeatureVector out{sub, {}};
    const auto cols = sub->columns_in(*vec.schema);
    out.values.reserve(cols.size());
    for (auto c : cols) out.values.push_back(vec.values[c]);
    return out;
}

FeatureVector group_slice(const FeatureVector& vec, FeatureGroup group) {
    return project(vec, std::make_shared<const FeatureSchema>(vec.schema->slice(group)));
}

FeatureVector group_slice(const FeatureVector& vec, std::string_view group) {
    return group_slice(vec, parse_group(group));
}

FeatureVector strip_linguistic(const FeatureVector& vec) {
    return project(vec, std::make_shared<const FeatureSchema>(vec.schema->without_linguistic()));
}

FeatureVector FeatureMatrix::vector(std::size_t r) const {
    const auto rw = row(r);
    return {schema, std::vector<double>(rw.begin(), rw.end())};
}

FeatureMatrix FeatureMatrix::select(const SchemaPtr& sub) const {
    const auto cols = sub->columns_in(*schema);
    FeatureMatrix out{sub, rows, {}};
    out.data.reserve(rows * cols.size());
    for (std::size_t r = 0; r < rows; ++r) {
        const auto rw = row(r);
        for (auto c : cols) out.data.push_back(rw[c]);
    }
    return out;
}

FeatureMatrix FeatureMatrix::take(std::span<const std::size_t> keep) const {
    FeatureMatrix out{schema, keep.size(), {}};
    out.data.reserve(keep.size() * cols());
    for (auto r : keep) {
        const auto rw = row(r);
        out.data.insert(out.data.end(), rw.begin(), rw.end());
    }
    return out;
}

FeatureMatrix extract_matrix(std::span<const Account> accounts, const SchemaPtr& schema) {
    FeatureMatrix out{schema, accounts.size(), {}};
    out.data.reserve(accounts.size() * schema->size());
    for (const auto& a : accounts) {
        auto v = extract(a, schema);
        out.data.insert(out.data.end(), v.values.begin(), v.values.end());
    }
    return out;
}

}  // namespace botcal
