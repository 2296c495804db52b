#include "botcal/service.hpp"

#include <thread>

#define CPPHTTPLIB_LISTEN_BACKLOG 512
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "botcal/error.hpp"
#include "botcal/scoring.hpp"
#include "internal.hpp"

namespace botcal {
namespace {

HttpReply error_reply(int status, const std::string& message) {
    return {status, nlohmann::json{{"error", message}}.dump()};
}

}  // namespace

struct ScoringService::Server {
    httplib::Server http;
    std::thread thread;
};

ScoringService::ScoringService(ModelBundle bundle, ServiceOptions options)
    : bundle_(std::move(bundle)), options_(std::move(options)), started_(std::chrono::steady_clock::now()) {
    check_schema(bundle_);
    bundle_.cap.validate();
    if (options_.default_prior) Prior::user(*options_.default_prior);
    version_ = model_version(bundle_);
}

ScoringService::~ScoringService() {
    stop();
    server_.reset();
}

HttpReply ScoringService::handle_score(std::string_view body, std::string_view query_prior) const {
    if (body.size() > kMaxRequestBytes) return error_reply(413, "request body exceeds 1 MiB");

    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
        return error_reply(400, std::string("malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) return error_reply(400, "request body must be an account object");

    std::optional<double> prior = options_.default_prior;
    if (!query_prior.empty()) {
        double v = 0.0;
        if (!detail::parse_double(query_prior, v)) return error_reply(400, "prior must be a number");
        prior = v;
    } else if (auto it = doc.find("prior"); it != doc.end() && !it->is_null()) {
        if (!it->is_number()) return error_reply(400, "prior must be a number");
        prior = it->get<double>();
    }
    if (prior && !(*prior >= 0.0 && *prior <= 1.0)) return error_reply(400, "prior must lie in [0,1]");

    try {
        const auto account = parse_account(body);
        std::optional<Prior> override;
        if (prior) override = Prior::user(*prior);
        return {200, to_json(score_account(bundle_, version_, account, override))};
    } catch (const ValidationError& e) {
        return error_reply(400, e.what());
    }
}

HttpReply ScoringService::handle_health() const {
    const auto uptime = std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count();
    return {200, nlohmann::json{{"status", "ok"}, {"model_version", version_}, {"uptime_seconds", uptime}}.dump()};
}

int ScoringService::bind() {
    if (server_) throw std::logic_error("service already started");
    server_ = std::make_unique<Server>();
    auto& http = server_->http;
    http.set_payload_max_length(kMaxRequestBytes);
    http.Post("/score", [this](const httplib::Request& req, httplib::Response& res) {
        const auto reply = handle_score(req.body, req.has_param("prior") ? req.get_param_value("prior") : "");
        res.status = reply.status;
        res.set_content(reply.body, "application/json");
    });
    http.Get("/health", [this](const httplib::Request&, httplib::Response& res) {
        const auto reply = handle_health();
        res.status = reply.status;
        res.set_content(reply.body, "application/json");
    });
    http.set_error_handler([](const httplib::Request&, httplib::Response& res) {
        if (res.status == 413) res.set_content(R"({"error":"request body exceeds 1 MiB"})", "application/json");
    });

    int port = options_.port;
    if (port == 0) {
        port = http.bind_to_any_port(options_.host);
    } else if (!http.bind_to_port(options_.host, port)) {
        port = -1;
    }
    if (port < 0) {
        server_.reset();
        throw std::runtime_error("cannot bind " + options_.host + ":" + std::to_string(options_.port));
    }
    return port;
}

int ScoringService::start() {
    const int port = bind();
    server_->thread = std::thread([this] { server_->http.listen_after_bind(); });
    server_->http.wait_until_ready();
    return port;
}

void ScoringService::run(const std::function<void(int)>& on_bound) {
    const int port = bind();
    if (on_bound) on_bound(port);
    server_->http.listen_after_bind();
}

// Safe to call from another thread while run() blocks.
void ScoringService::stop() {
    if (!server_) return;
    server_->http.stop();
    if (server_->thread.joinable()) server_->thread.join();
}

}  // namespace botcal
