#include "botcal/synth.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <cmath>
#include <numeric>

#include "botcal/error.hpp"
#include "botcal/random.hpp"

namespace botcal {
namespace {

// Generative parameters for one population. Bots use a blend of the human
// persona and their archetype's persona, weighted by the separation.
struct Persona {
    double log_age_mu, log_age_sd;  // days
    double log_followers_mu, log_followers_sd;
    double log_friends_mu, log_friends_sd;
    double posts_mean;
    double log_gap_mu, gap_sigma;  // seconds between posts
    double lifetime_log_mu, lifetime_log_sd;  // lifetime total relative to the recent rate
    double sources_mean, main_source_p, automation_p;
    double url_p, hashtag_mean, mention_mean, repost_p, dup_p;
    double diurnal;  // probability a night-time post is moved to waking hours
    double neighbors_mean, neighbor_lang_match_p, neighbor_tz_p, tz_mismatch_p, follower_p;
    double has_desc_p, desc_words;
    double name_digits;
    double has_tz_p;
    double post_lang_match_p;
    double positive_p, negative_p;
    double words_mean;
};

constexpr Persona kHuman{
    std::log(1400.0), 0.7, std::log(250.0), 1.3, std::log(300.0), 1.0,
    40, std::log(18000.0), 1.4,
    0.0, 0.5,
    2.2, 0.7, 0.05,
    0.25, 0.3, 0.6, 0.3, 0.02,
    0.85,
    25, 0.85, 0.6, 0.1, 0.5,
    0.85, 10,
    0.4,
    0.65,
    0.92,
    0.08, 0.04,
    12};

constexpr Persona kSpam{
    std::log(300.0), 0.8, std::log(40.0), 1.2, std::log(900.0), 1.0,
    55, std::log(400.0), 0.4,
    std::log(0.08), 0.5,
    1.0, 0.98, 0.95,
    0.95, 1.8, 0.2, 0.05, 0.45,
    0.05,
    20, 0.7, 0.5, 0.3, 0.3,
    0.5, 6,
    3.0,
    0.3,
    0.95,
    0.12, 0.01,
    9};

constexpr Persona kFakeFollower{
    std::log(120.0), 0.6, std::log(5.0), 1.0, std::log(1500.0), 0.6,
    1.5, std::log(200000.0), 1.2,
    0.0, 0.3,
    1.0, 1.0, 0.5,
    0.1, 0.05, 0.1, 0.5, 0.1,
    0.3,
    8, 0.6, 0.3, 0.4, 0.1,
    0.1, 3,
    4.0,
    0.1,
    0.8,
    0.05, 0.02,
    6};

// Very few posts but a realistic-looking profile.
constexpr Persona kPornLike{
    std::log(200.0), 0.7, std::log(150.0), 1.0, std::log(600.0), 1.0,
    4, std::log(30000.0), 0.9,
    std::log(0.5), 0.5,
    1.2, 0.9, 0.8,
    0.95, 0.5, 0.3, 0.1, 0.3,
    0.2,
    20, 0.5, 0.5, 0.5, 0.5,
    0.95, 12,
    1.0,
    0.6,
    0.9,
    0.3, 0.01,
    8};

constexpr Persona kPolitical{
    std::log(500.0), 0.8, std::log(300.0), 1.2, std::log(700.0), 1.0,
    55, std::log(1500.0), 0.6,
    std::log(0.3), 0.5,
    1.6, 0.85, 0.7,
    0.4, 1.2, 1.2, 0.85, 0.2,
    0.15,
    30, 0.25, 0.7, 0.85, 0.6,
    0.7, 10,
    2.0,
    0.8,
    0.5,
    0.03, 0.2,
    14};

const Persona& persona_of(Archetype a) {
    switch (a) {
        case Archetype::spam: return kSpam;
        case Archetype::fake_follower: return kFakeFollower;
        case Archetype::porn_like: return kPornLike;
        case Archetype::political: return kPolitical;
    }
    return kSpam;
}

Persona blend(const Persona& from, const Persona& to, double t) {
    using Fields = std::array<double, sizeof(Persona) / sizeof(double)>;
    static_assert(sizeof(Fields) == sizeof(Persona));
    const auto a = std::bit_cast<Fields>(from);
    const auto b = std::bit_cast<Fields>(to);
    Fields out{};
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + t * (b[i] - a[i]);
    return std::bit_cast<Persona>(out);
}

// Class overlap: some bots only partly adopt their archetype, and some humans
// (news feeds, heavy schedulers) drift toward one.
constexpr double kStealthyBotShare = 0.15;
constexpr double kStealthyBotMaxBlend = 0.6;
constexpr double kBotLikeHumanShare = 0.06;
constexpr double kBotLikeHumanMaxBlend = 0.45;

constexpr const char* kLangs[] = {"en", "es", "pt", "fr", "ja", "ar"};
constexpr double kLangWeights[] = {0.55, 0.15, 0.10, 0.08, 0.07, 0.05};
constexpr int kTzOffsets[] = {-480, -420, -360, -300, 0, 60, 180, 330, 540};
constexpr const char* kHumanSources[] = {"Twitter for iPhone", "Twitter for Android", "Twitter Web Client",
                                         "Twitter for iPad", "TweetDeck", "Instagram"};
constexpr const char* kBotSources[] = {"IFTTT", "dlvr.it", "Buffer", "Hootsuite", "twittbot.net", "Botize"};
constexpr const char* kNeutral[] = {
    "the",     "a",      "today",   "just",    "time",    "people",  "new",     "day",     "news",    "city",
    "game",    "music",  "video",   "photo",   "check",   "out",     "this",    "that",    "with",    "from",
    "about",   "what",   "when",    "where",   "coffee",  "work",    "home",    "school",  "week",    "night",
    "morning", "team",   "post",    "story",   "world",   "read",    "watch",   "live",    "update",  "market",
    "deal",    "price",  "vote",    "policy",  "debate",  "media",   "report",  "local",   "weather", "food",
    "travel",  "friend", "family",  "book",    "movie",   "show",    "sport",   "match",   "season",  "start",
    "end",     "year",   "month",   "still",   "maybe",   "really",  "think",   "know",    "want",    "need",
    "look",    "make",   "going",   "back",    "again",   "last",    "first",   "next",    "open",    "share",
    "follow",  "click",  "link",    "online",  "shop",    "sale",    "offer",   "crypto",  "bitcoin", "stream"};
constexpr const char* kPositive[] = {"good", "great", "love", "happy", "awesome", "amazing", "nice",
                                     "best", "fun", "thanks", "beautiful", "excited", "win", "free"};
constexpr const char* kNegative[] = {"bad", "sad", "hate", "angry", "terrible", "worst", "fake",
                                     "wrong", "corrupt", "lies", "crisis", "disaster", "shame", "scam"};

template <class T, std::size_t N>
const T& pick(Rng& rng, const T (&arr)[N]) {
    return arr[rng.below(N)];
}

std::size_t poisson(Rng& rng, double mean) {
    if (mean <= 0) return 0;
    const double limit = std::exp(-mean);
    std::size_t k = 0;
    double p = rng.uniform();
    while (p > limit && k < 1000) {
        ++k;
        p *= rng.uniform();
    }
    return k;
}

std::string pick_lang(Rng& rng) {
    double u = rng.uniform();
    for (std::size_t i = 0; i < std::size(kLangs); ++i) {
        if (u < kLangWeights[i]) return kLangs[i];
        u -= kLangWeights[i];
    }
    return kLangs[0];
}

std::string other_lang(Rng& rng, const std::string& not_this) {
    std::string l;
    do {
        l = pick(rng, kLangs);
    } while (l == not_this);
    return l;
}

std::string token(Rng& rng, std::size_t len) {
    static constexpr char kChars[] = "abcdefghijklmnopqrstuvwxyz0123456789";
    std::string s;
    for (std::size_t i = 0; i < len; ++i) s += kChars[rng.below(sizeof kChars - 1)];
    return s;
}

std::string screen_name(Rng& rng, double digits_mean) {
    static constexpr char kLetters[] = "abcdefghijklmnopqrstuvwxyz";
    std::string s;
    const auto letters = 5 + rng.below(8);
    for (std::size_t i = 0; i < letters; ++i) s += kLetters[rng.below(26)];
    if (rng.bernoulli(0.3)) s += '_';
    const auto digits = std::min<std::size_t>(poisson(rng, digits_mean), 6);
    for (std::size_t i = 0; i < digits; ++i) s += static_cast<char>('0' + rng.below(10));
    return s;
}

std::string sentence(Rng& rng, const Persona& p) {
    const auto n = static_cast<std::size_t>(std::max(1.0, std::round(rng.normal(p.words_mean, 3.0))));
    std::string s;
    for (std::size_t i = 0; i < n; ++i) {
        if (!s.empty()) s += ' ';
        const double u = rng.uniform();
        if (u < p.positive_p) {
            s += pick(rng, kPositive);
        } else if (u < p.positive_p + p.negative_p) {
            s += pick(rng, kNegative);
        } else {
            s += pick(rng, kNeutral);
        }
    }
    return s;
}

Account make_account(Rng& rng, const Persona& p, std::string id) {
    using namespace std::chrono;
    Account a;
    a.id = std::move(id);
    a.screen_name = screen_name(rng, p.name_digits);
    a.lang = pick_lang(rng);
    if (rng.bernoulli(p.has_tz_p)) a.tz_offset_minutes = pick(rng, kTzOffsets);
    if (rng.bernoulli(p.has_desc_p)) {
        Persona d = p;
        d.words_mean = p.desc_words;
        a.description = sentence(rng, d);
    }
    a.followers_count = static_cast<std::int64_t>(std::round(rng.lognormal(p.log_followers_mu, p.log_followers_sd)));
    a.friends_count = static_cast<std::int64_t>(std::round(rng.lognormal(p.log_friends_mu, p.log_friends_sd)));

    const Timestamp epoch = sys_days{year{2019} / 5 / 1};
    const Timestamp now = epoch - seconds{static_cast<std::int64_t>(rng.uniform(0, 30 * kSecondsPerDay))};

    // Posts, newest first.
    const auto n_posts = static_cast<std::size_t>(
        std::clamp(std::round(p.posts_mean * rng.lognormal(0.0, 0.35)), 0.0, 60.0));
    std::vector<Timestamp> times;
    Timestamp t = now - seconds{static_cast<std::int64_t>(rng.uniform(0, 3600))};
    const int tz = a.tz_offset_minutes.value_or(0);
    for (std::size_t i = 0; i < n_posts; ++i) {
        Timestamp placed = t;
        const auto local = (placed.time_since_epoch().count() + tz * 60) % 86400;
        const auto hour = (local + 86400) % 86400 / 3600;
        if (hour >= 1 && hour < 7 && rng.bernoulli(p.diurnal)) {
            placed -= seconds{static_cast<std::int64_t>((hour + rng.uniform(1.0, 3.0)) * 3600)};
        }
        times.push_back(placed);
        t -= seconds{static_cast<std::int64_t>(std::max(1.0, rng.lognormal(p.log_gap_mu, p.gap_sigma)))};
    }
    std::sort(times.begin(), times.end(), std::greater<>{});

    const auto n_sources = static_cast<std::size_t>(std::clamp(std::round(rng.normal(p.sources_mean, 0.5)), 1.0, 6.0));
    const bool automated = rng.bernoulli(p.automation_p);
    std::vector<std::string> sources;
    for (std::size_t i = 0; i < n_sources; ++i) {
        sources.push_back(automated ? kBotSources[(i + rng.below(6)) % 6] : kHumanSources[(i + rng.below(6)) % 6]);
    }

    for (std::size_t i = 0; i < n_posts; ++i) {
        Post post;
        post.created_at = times[i];
        post.source = rng.bernoulli(p.main_source_p) ? sources.front() : sources[rng.below(sources.size())];
        post.lang = rng.bernoulli(p.post_lang_match_p) ? a.lang : other_lang(rng, a.lang);
        post.is_repost = rng.bernoulli(p.repost_p);
        post.url_count = (rng.bernoulli(p.url_p) ? 1 : 0) + (rng.bernoulli(p.url_p * 0.3) ? 1 : 0);
        post.hashtag_count = static_cast<std::int64_t>(std::min<std::size_t>(poisson(rng, p.hashtag_mean), 10));
        post.mention_count = static_cast<std::int64_t>(std::min<std::size_t>(poisson(rng, p.mention_mean), 10));
        if (!a.posts.empty() && rng.bernoulli(p.dup_p)) {
            post.text = a.posts[rng.below(a.posts.size())].text;
        } else {
            std::string text = post.is_repost ? "RT @" + token(rng, 8) + ": " : "";
            text += sentence(rng, p);
            for (std::int64_t k = 0; k < post.hashtag_count; ++k) text += " #" + std::string(pick(rng, kNeutral));
            for (std::int64_t k = 0; k < post.mention_count; ++k) text += " @" + token(rng, 7);
            for (std::int64_t k = 0; k < post.url_count; ++k) text += " https://t.co/" + token(rng, 10);
            post.text = std::move(text);
        }
        a.posts.push_back(std::move(post));
    }

    double age = std::clamp(rng.lognormal(p.log_age_mu, p.log_age_sd), 1.0, 4000.0);
    a.created_at = now - seconds{static_cast<std::int64_t>(age * kSecondsPerDay)};
    if (!a.posts.empty() && a.posts.back().created_at < a.created_at) {
        a.created_at = a.posts.back().created_at - seconds{static_cast<std::int64_t>(rng.uniform(1, 30) * kSecondsPerDay)};
    }
    age = std::max(1.0, days_between(a.created_at, a.reference_time()));
    double recent_rate = 0.0;
    if (!a.posts.empty()) {
        recent_rate = static_cast<double>(a.posts.size()) /
                      std::max(1.0, days_between(a.posts.back().created_at, a.reference_time()));
    }
    const double lifetime = recent_rate * age * rng.lognormal(p.lifetime_log_mu, p.lifetime_log_sd);
    a.statuses_count = std::max(static_cast<std::int64_t>(a.posts.size()), static_cast<std::int64_t>(std::round(lifetime)));

    const auto n_neighbors = std::min<std::size_t>(
        static_cast<std::size_t>(std::round(p.neighbors_mean * rng.lognormal(0.0, 0.3))), 60);
    for (std::size_t i = 0; i < n_neighbors; ++i) {
        NeighborSummary nb;
        nb.lang = rng.bernoulli(p.neighbor_lang_match_p) ? a.lang : other_lang(rng, a.lang);
        if (rng.bernoulli(p.neighbor_tz_p)) {
            const int base = a.tz_offset_minutes.value_or(0);
            if (rng.bernoulli(p.tz_mismatch_p)) {
                nb.tz_offset_minutes = base + (rng.bernoulli(0.5) ? 1 : -1) * static_cast<int>(180 + 60 * rng.below(7));
            } else {
                nb.tz_offset_minutes = base + static_cast<int>(60 * rng.below(3)) - 60;
            }
        }
        nb.relation = rng.bernoulli(p.follower_p) ? Relation::follower : Relation::friend_of;
        a.neighbors.push_back(std::move(nb));
    }
    return a;
}

}  // namespace

std::string_view to_string(Archetype a) {
    switch (a) {
        case Archetype::spam: return "spam";
        case Archetype::fake_follower: return "fake_follower";
        case Archetype::porn_like: return "porn_like";
        case Archetype::political: return "political";
    }
    return "unknown";
}

Archetype parse_archetype(std::string_view text) {
    for (auto a : kAllArchetypes) {
        if (to_string(a) == text) return a;
    }
    throw ValidationError("unknown bot archetype '" + std::string(text) + "'");
}

std::array<double, 4> only(Archetype a) {
    std::array<double, 4> w{};
    w[static_cast<std::size_t>(a)] = 1.0;
    return w;
}

void SynthConfig::validate() const {
    if (n_humans + n_bots == 0) throw ValidationError("synthetic corpus must contain at least one account");
    if (!(separation >= 0.0 && separation <= 1.0)) throw ValidationError("separation must lie in [0,1]");
    double total = 0.0;
    for (double w : archetype_weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw ValidationError("archetype weights must be finite and >= 0");
        total += w;
    }
    if (n_bots > 0 && !(total > 0.0)) throw ValidationError("archetype weights must have a positive sum");
}

LabeledCorpus generate_synthetic(const SynthConfig& cfg) {
    cfg.validate();

    Rng rng(substream_seed(cfg.seed, 0));
    const double total_weight =
        std::accumulate(cfg.archetype_weights.begin(), cfg.archetype_weights.end(), 0.0);

    struct Draw {
        Label label;
        Archetype archetype;
    };
    std::vector<Draw> draws;
    draws.reserve(cfg.n_humans + cfg.n_bots);
    for (std::size_t i = 0; i < cfg.n_humans; ++i) draws.push_back({Label::human, Archetype::spam});
    for (std::size_t i = 0; i < cfg.n_bots; ++i) {
        double u = rng.uniform() * total_weight;
        std::size_t k = 0;
        while (k + 1 < cfg.archetype_weights.size() && u >= cfg.archetype_weights[k]) {
            u -= cfg.archetype_weights[k];
            ++k;
        }
        while (cfg.archetype_weights[k] <= 0.0) --k;  // only reachable through rounding at the top end
        draws.push_back({Label::bot, kAllArchetypes[k]});
    }
    rng.shuffle(draws.begin(), draws.end());

    LabeledCorpus corpus;
    corpus.name = cfg.name;
    corpus.entries.reserve(draws.size());
    for (std::size_t i = 0; i < draws.size(); ++i) {
        const auto& d = draws[i];
        Rng account_rng(substream_seed(cfg.seed, i + 1));
        Archetype toward = d.archetype;
        double t = 0.0;
        if (d.label == Label::bot) {
            t = account_rng.bernoulli(kStealthyBotShare) ? account_rng.uniform(0.0, kStealthyBotMaxBlend) : 1.0;
        } else if (account_rng.bernoulli(kBotLikeHumanShare)) {
            toward = kAllArchetypes[account_rng.below(kAllArchetypes.size())];
            t = account_rng.uniform(0.0, kBotLikeHumanMaxBlend);
        }
        const Persona persona = blend(kHuman, persona_of(toward), cfg.separation * t);
        char index[24];
        std::snprintf(index, sizeof index, "%06zu", i);
        corpus.entries.push_back({make_account(account_rng, persona, cfg.name + "-" + index), d.label});
    }
    return corpus;
}

}  // namespace botcal
