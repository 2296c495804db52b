#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>

#include "botcal/account.hpp"
#include "botcal/corpus.hpp"
#include "botcal/time.hpp"

namespace botcal::test {

inline Timestamp at(const char* iso) { return parse_timestamp(iso); }

inline Post post(Timestamp when, std::string source = "web", std::string text = "hello world") {
    Post p;
    p.text = std::move(text);
    p.created_at = when;
    p.source = std::move(source);
    p.lang = "en";
    return p;
}

// An account with `n` posts spaced `gap` apart, newest at `newest`.
inline Account account_with_posts(std::string id, std::size_t n, Timestamp newest = at("2020-01-10T12:00:00Z"),
                                  std::chrono::seconds gap = std::chrono::hours(3)) {
    Account a;
    a.id = std::move(id);
    a.screen_name = "user_" + a.id;
    a.created_at = newest - std::chrono::days(400);
    a.followers_count = 120;
    a.friends_count = 80;
    a.statuses_count = static_cast<std::int64_t>(n) * 10;
    a.lang = "en";
    for (std::size_t i = 0; i < n; ++i) a.posts.push_back(post(newest - gap * static_cast<int>(i)));
    return a;
}

inline NeighborSummary neighbor(std::string lang, std::optional<int> tz = {}, Relation r = Relation::friend_of) {
    return {std::move(lang), tz, r};
}

// Scratch directory removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("botcal-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << text;
}

}  // namespace botcal::test
