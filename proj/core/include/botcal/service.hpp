#pragma once

#include <chrono>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "botcal/model_io.hpp"

namespace botcal {

inline constexpr std::size_t kMaxRequestBytes = std::size_t{1} << 20;

struct ServiceOptions {
    std::string host = "127.0.0.1";
    int port = 8080;  // 0 binds an ephemeral port
    std::optional<double> default_prior;  // absent: the bundle's own prior
};

struct HttpReply {
    int status = 200;
    std::string body;
};

// Stateless scoring over an immutable bundle.
class ScoringService {
public:
    ScoringService(ModelBundle bundle, ServiceOptions options);
    ~ScoringService();
    ScoringService(const ScoringService&) = delete;
    ScoringService& operator=(const ScoringService&) = delete;

    // Transport-free handlers; `query_prior` is the raw `prior` query value.
    HttpReply handle_score(std::string_view body, std::string_view query_prior = {}) const;
    HttpReply handle_health() const;

    // Binds and serves on a background thread; returns the bound port.
    int start();
    // Serves on the calling thread until stop(); on_bound sees the bound port.
    void run(const std::function<void(int)>& on_bound = {});
    void stop();

    const ModelBundle& bundle() const noexcept { return bundle_; }
    const std::string& version() const noexcept { return version_; }

private:
    struct Server;

    int bind();

    ModelBundle bundle_;
    ServiceOptions options_;
    std::string version_;
    std::chrono::steady_clock::time_point started_;
    std::unique_ptr<Server> server_;
};

}  // namespace botcal
