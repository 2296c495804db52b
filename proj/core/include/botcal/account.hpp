#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "botcal/time.hpp"

namespace botcal {

struct Post {
    std::string text;
    Timestamp created_at{};
    std::string source;  // client or device label
    std::string lang;
    std::int64_t url_count = 0;
    std::int64_t hashtag_count = 0;
    std::int64_t mention_count = 0;
    bool is_repost = false;

    bool operator==(const Post&) const = default;
};

enum class Relation { friend_of, follower };

struct NeighborSummary {
    std::string lang;
    std::optional<int> tz_offset_minutes;
    Relation relation = Relation::friend_of;

    bool operator==(const NeighborSummary&) const = default;
};

struct Account {
    std::string id;
    std::string screen_name;
    Timestamp created_at{};
    std::int64_t followers_count = 0;
    std::int64_t friends_count = 0;
    std::int64_t statuses_count = 0;  // lifetime total
    std::string description;
    std::string lang;
    std::optional<int> tz_offset_minutes;
    std::vector<Post> posts;  // most recent first
    std::vector<NeighborSummary> neighbors;

    bool operator==(const Account&) const = default;

    // Time the account was observed: the newest post, or creation when silent.
    Timestamp reference_time() const {
        return posts.empty() ? created_at : posts.front().created_at;
    }
};

// Throws ValidationError on: empty id, negative counts, unsorted posts,
// or creation after the newest post.
void validate(const Account& account);

// One accounts-file record. Throws ParseError (line 0) or ValidationError.
Account parse_account(std::string_view json_text);

// Compact single-line JSON; absent optionals are omitted.
std::string format_account(const Account& account);

std::string_view to_string(Relation r);
Relation parse_relation(std::string_view text);

}  // namespace botcal
