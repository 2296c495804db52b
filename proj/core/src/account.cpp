#include "botcal/account.hpp"

#include <nlohmann/json.hpp>

#include "botcal/error.hpp"

namespace botcal {
namespace {

using nlohmann::json;

std::string get_string(const json& obj, const char* key, bool required = false) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) {
        if (required) throw ParseError(std::string("missing field '") + key + "'");
        return {};
    }
    if (!it->is_string()) throw ParseError(std::string("field '") + key + "' must be a string");
    return it->get<std::string>();
}

std::int64_t get_count(const json& obj, const char* key, bool required = false) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        if (required) throw ParseError(std::string("missing field '") + key + "'");
        return 0;
    }
    if (!it->is_number_integer()) throw ParseError(std::string("field '") + key + "' must be an integer");
    return it->get<std::int64_t>();
}

std::optional<int> get_offset(const json& obj) {
    auto it = obj.find("tz_offset_minutes");
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (!it->is_number_integer()) throw ParseError("field 'tz_offset_minutes' must be an integer");
    return it->get<int>();
}

Post parse_post(const json& j) {
    if (!j.is_object()) throw ParseError("post must be an object");
    Post p;
    p.text = get_string(j, "text");
    p.created_at = parse_timestamp(get_string(j, "created_at", true));
    p.source = get_string(j, "source");
    p.lang = get_string(j, "lang");
    p.url_count = get_count(j, "url_count");
    p.hashtag_count = get_count(j, "hashtag_count");
    p.mention_count = get_count(j, "mention_count");
    if (auto it = j.find("is_repost"); it != j.end()) {
        if (!it->is_boolean()) throw ParseError("field 'is_repost' must be a boolean");
        p.is_repost = it->get<bool>();
    }
    return p;
}

NeighborSummary parse_neighbor(const json& j) {
    if (!j.is_object()) throw ParseError("neighbor must be an object");
    NeighborSummary n;
    n.lang = get_string(j, "lang");
    n.tz_offset_minutes = get_offset(j);
    n.relation = parse_relation(get_string(j, "relation", true));
    return n;
}

json post_json(const Post& p) {
    return json{{"text", p.text},
                {"created_at", format_timestamp(p.created_at)},
                {"source", p.source},
                {"lang", p.lang},
                {"url_count", p.url_count},
                {"hashtag_count", p.hashtag_count},
                {"mention_count", p.mention_count},
                {"is_repost", p.is_repost}};
}

}  // namespace

std::string_view to_string(Relation r) { return r == Relation::follower ? "follower" : "friend"; }

Relation parse_relation(std::string_view text) {
    if (text == "friend") return Relation::friend_of;
    if (text == "follower") return Relation::follower;
    throw ParseError("unknown neighbor relation '" + std::string(text) + "'");
}

void validate(const Account& a) {
    if (a.id.empty()) throw ValidationError("account id is empty");
    const auto where = "account '" + a.id + "': ";
    if (a.followers_count < 0 || a.friends_count < 0 || a.statuses_count < 0) {
        throw ValidationError(where + "negative count");
    }
    for (std::size_t i = 0; i < a.posts.size(); ++i) {
        const auto& p = a.posts[i];
        if (p.url_count < 0 || p.hashtag_count < 0 || p.mention_count < 0) {
            throw ValidationError(where + "negative post count");
        }
        if (i > 0 && p.created_at > a.posts[i - 1].created_at) {
            throw ValidationError(where + "posts are not sorted newest first");
        }
    }
    if (!a.posts.empty() && a.created_at > a.posts.front().created_at) {
        throw ValidationError(where + "created_at is after the newest post");
    }
}

Account parse_account(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(e.what());
    }
    if (!j.is_object()) throw ParseError("account record must be an object");

    Account a;
    a.id = get_string(j, "id", true);
    a.screen_name = get_string(j, "screen_name");
    a.created_at = parse_timestamp(get_string(j, "created_at", true));
    a.followers_count = get_count(j, "followers_count", true);
    a.friends_count = get_count(j, "friends_count", true);
    a.statuses_count = get_count(j, "statuses_count", true);
    a.description = get_string(j, "description");
    a.lang = get_string(j, "lang");
    a.tz_offset_minutes = get_offset(j);
    if (auto it = j.find("posts"); it != j.end()) {
        if (!it->is_array()) throw ParseError("field 'posts' must be an array");
        for (const auto& p : *it) a.posts.push_back(parse_post(p));
    }
    if (auto it = j.find("neighbors"); it != j.end()) {
        if (!it->is_array()) throw ParseError("field 'neighbors' must be an array");
        for (const auto& n : *it) a.neighbors.push_back(parse_neighbor(n));
    }
    validate(a);
    return a;
}

std::string format_account(const Account& a) {
    json j{{"id", a.id},
           {"screen_name", a.screen_name},
           {"created_at", format_timestamp(a.created_at)},
           {"followers_count", a.followers_count},
           {"friends_count", a.friends_count},
           {"statuses_count", a.statuses_count},
           {"description", a.description},
           {"lang", a.lang}};
    if (a.tz_offset_minutes) j["tz_offset_minutes"] = *a.tz_offset_minutes;
    auto posts = json::array();
    for (const auto& p : a.posts) posts.push_back(post_json(p));
    j["posts"] = std::move(posts);
    auto neighbors = json::array();
    for (const auto& n : a.neighbors) {
        json nj{{"lang", n.lang}, {"relation", to_string(n.relation)}};
        if (n.tz_offset_minutes) nj["tz_offset_minutes"] = *n.tz_offset_minutes;
        neighbors.push_back(std::move(nj));
    }
    j["neighbors"] = std::move(neighbors);
    return j.dump();
}

}  // namespace botcal
