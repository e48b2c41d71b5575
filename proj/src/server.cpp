#include "dflow/server.hpp"

#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "dflow/codegen.hpp"
#include "dflow/merger.hpp"
#include "dflow/parser.hpp"
#include "dflow/printer.hpp"
#include "dflow/validator.hpp"
#include "dflow/zip.hpp"

namespace dflow {

using nlohmann::json;

namespace {

json stored_json(const ModelStore::Stored& row) {
    return json{{"model_id", row.model_id},
                {"username", row.username},
                {"source", row.source},
                {"created_at", row.created_at_iso()},
                {"version", row.version}};
}

void reply_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, int status, const std::string& message) {
    reply_json(res, status, json{{"error", message}});
}

// 422 body carries the same shape as /model/validation
void reply_report(httplib::Response& res, int status, const ValidationReport& report) {
    res.status = status;
    res.set_content(report_to_json(report), "application/json");
}

std::optional<json> parse_body(const httplib::Request& req, httplib::Response& res) {
    json body = json::parse(req.body, nullptr, /*allow_exceptions=*/false);
    if (body.is_discarded() || !body.is_object()) {
        reply_error(res, 400, "request body must be a JSON object");
        return std::nullopt;
    }
    return body;
}

std::optional<std::string> required_text(const json& body, const char* key,
                                         httplib::Response& res) {
    if (!body.contains(key) || !body[key].is_string()) {
        reply_error(res, 400, std::string("missing string field '") + key + "'");
        return std::nullopt;
    }
    return body[key].get<std::string>();
}

std::optional<long long> path_id(const httplib::Request& req) {
    try {
        return std::stoll(req.matches[1]);
    } catch (const std::exception&) {
        return std::nullopt;  // digits beyond the id range
    }
}

json conflicts_json(const std::vector<Diagnostic>& diags) {
    json arr = json::array();
    for (const auto& d : diags)
        arr.push_back({{"code", d.code},
                       {"severity", severity_name(d.severity)},
                       {"message", d.message},
                       {"span",
                        {{"file", d.span.file},
                         {"start_line", d.span.start_line},
                         {"start_col", d.span.start_col},
                         {"end_line", d.span.end_line},
                         {"end_col", d.span.end_col}}}});
    return arr;
}

} // namespace

struct DflowServer::Impl {
    ServerConfig config;
    ModelStore store;
    httplib::Server server;
    int port = 0;
    std::thread worker;

    explicit Impl(ServerConfig cfg)
        : config(std::move(cfg)), store(config.db_path, config.clock) {
        routes();
        server.set_logger([this](const httplib::Request& req, const httplib::Response& res) {
            if (config.log)
                config.log(req.method + " " + req.path + " -> " + std::to_string(res.status));
        });
    }

    void routes() {
        server.Post("/model", [this](const httplib::Request& req, httplib::Response& res) {
            auto body = parse_body(req, res);
            if (!body) return;
            auto username = required_text(*body, "username", res);
            if (!username) return;
            auto source = required_text(*body, "source", res);
            if (!source) return;
            ValidationReport report = check_source(*source, "request");
            if (!report.valid) return reply_report(res, 422, report);
            long long id = store.insert(*username, *source);
            reply_json(res, 201, json{{"model_id", id}});
        });

        server.Get(R"(/model/(\d+))", [this](const httplib::Request& req, httplib::Response& res) {
            auto id = path_id(req);
            if (!id) return reply_error(res, 404, "unknown model_id");
            auto row = store.get(*id);
            if (!row) return reply_error(res, 404, "unknown model_id");
            reply_json(res, 200, stored_json(*row));
        });

        server.Put(R"(/model/(\d+))", [this](const httplib::Request& req, httplib::Response& res) {
            auto maybe_id = path_id(req);
            if (!maybe_id) return reply_error(res, 404, "unknown model_id");
            long long id = *maybe_id;
            if (!store.get(id)) return reply_error(res, 404, "unknown model_id");
            auto body = parse_body(req, res);
            if (!body) return;
            auto source = required_text(*body, "source", res);
            if (!source) return;
            std::optional<std::string> username;
            if (body->contains("username") && (*body)["username"].is_string())
                username = (*body)["username"].get<std::string>();
            ValidationReport report = check_source(*source, "request");
            if (!report.valid) return reply_report(res, 422, report);
            store.update(id, *source, username);
            auto row = store.get(id);
            reply_json(res, 200, json{{"model_id", id}, {"version", row ? row->version : 0}});
        });

        server.Delete(R"(/model/(\d+))",
                      [this](const httplib::Request& req, httplib::Response& res) {
                          auto id = path_id(req);
                          if (!id || !store.remove(*id))
                              return reply_error(res, 404, "unknown model_id");
                          reply_json(res, 200, json{{"deleted", true}, {"model_id", *id}});
                      });

        server.Post("/model/validation",
                    [](const httplib::Request& req, httplib::Response& res) {
                        auto body = parse_body(req, res);
                        if (!body) return;
                        auto source = required_text(*body, "source", res);
                        if (!source) return;
                        ValidationReport report = check_source(*source, "request");
                        reply_report(res, 200, report);
                    });

        server.Post("/model/codegen", [](const httplib::Request& req, httplib::Response& res) {
            auto body = parse_body(req, res);
            if (!body) return;
            auto source = required_text(*body, "source", res);
            if (!source) return;
            ValidationReport report = check_source(*source, "request");
            if (!report.valid) return reply_report(res, 422, report);
            Model model = *parse(*source, "request").model;
            GeneratedProject project = generate(model);
            res.status = 200;
            res.set_content(make_zip(project.files), "application/zip");
        });

        server.Get("/model/merge", [this](const httplib::Request&, httplib::Response& res) {
            std::vector<Model> models;
            for (const auto& row : store.latest_per_user()) {
                ParseResult parsed = parse(row.source, "user:" + row.username);
                if (parsed.ok()) models.push_back(std::move(*parsed.model));
            }
            MergeResult merged = merge(models);
            if (!merged.ok())
                return reply_json(res, 409, json{{"conflicts", conflicts_json(merged.diagnostics)}});
            res.status = 200;
            res.set_content(print(*merged.model), "text/plain");
        });

        server.Get(R"(/user/([^/]+)/model/latest)",
                   [this](const httplib::Request& req, httplib::Response& res) {
                       auto row = store.latest_for(req.matches[1]);
                       if (!row) return reply_error(res, 404, "no models for user");
                       reply_json(res, 200, stored_json(*row));
                   });
    }
};

DflowServer::DflowServer(ServerConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}

DflowServer::~DflowServer() { stop(); }

bool DflowServer::bind(const std::string& host, int port) {
    if (port == 0) {
        int picked = impl_->server.bind_to_any_port(host);
        if (picked <= 0) return false;
        impl_->port = picked;
        return true;
    }
    if (!impl_->server.bind_to_port(host, port)) return false;
    impl_->port = port;
    return true;
}

int DflowServer::port() const { return impl_->port; }

void DflowServer::serve() { impl_->server.listen_after_bind(); }

void DflowServer::start() {
    impl_->worker = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

void DflowServer::stop() {
    if (impl_->server.is_running()) impl_->server.stop();
    if (impl_->worker.joinable()) impl_->worker.join();
}

ModelStore& DflowServer::store() { return impl_->store; }

} // namespace dflow
