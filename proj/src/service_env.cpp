#include "dflow/service_env.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <httplib.h>
#include <json.hpp>

namespace dflow {

namespace {

bool pattern_matches(const std::string& pattern, const std::string& url) {
    if (!pattern.empty() && pattern.back() == '*')
        return url.compare(0, pattern.size() - 1, pattern, 0, pattern.size() - 1) == 0;
    return pattern == url;
}

} // namespace

StubEnv StubEnv::from_json(const std::string& json_text) {
    nlohmann::json doc = nlohmann::json::parse(json_text, nullptr, /*allow_exceptions=*/false);
    if (doc.is_discarded() || !doc.is_array())
        throw std::runtime_error("stub table must be a JSON array");
    std::vector<StubRule> rules;
    for (const auto& item : doc) {
        StubRule rule;
        auto verb = verb_from(item.value("verb", "GET"));
        if (!verb) throw std::runtime_error("stub rule has unknown verb");
        rule.verb = *verb;
        if (!item.contains("url_pattern") || !item["url_pattern"].is_string())
            throw std::runtime_error("stub rule is missing url_pattern");
        rule.url_pattern = item["url_pattern"].get<std::string>();
        rule.status = item.value("status", 200);
        rule.body_json = item.contains("body") ? item["body"].dump() : "{}";
        rules.push_back(std::move(rule));
    }
    return StubEnv(std::move(rules));
}

StubEnv StubEnv::from_file(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw std::runtime_error("cannot open stub table: " + path);
    std::ostringstream text;
    text << file.rdbuf();
    return from_json(text.str());
}

HttpResult StubEnv::invoke(const ComposedRequest& request) {
    for (const auto& rule : rules_) {
        if (rule.verb != request.verb) continue;
        if (!pattern_matches(rule.url_pattern, request.url)) continue;
        HttpResult r;
        r.transport_ok = true;
        r.status = rule.status;
        r.body = rule.body_json;
        return r;
    }
    HttpResult r;
    r.error = "no stub matches " + request.url;
    return r;
}

HttpResult HttpEnv::invoke(const ComposedRequest& request) {
    // split scheme://authority from the path+query part
    std::string url = request.url;
    size_t scheme = url.find("://");
    size_t path_start = scheme == std::string::npos ? url.find('/') : url.find('/', scheme + 3);
    std::string origin = path_start == std::string::npos ? url : url.substr(0, path_start);
    std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

    httplib::Client client(origin);
    client.set_connection_timeout(timeout_seconds_, 0);
    client.set_read_timeout(timeout_seconds_, 0);

    httplib::Headers headers(request.headers.begin(), request.headers.end());
    httplib::Result result;
    switch (request.verb) {
        case HttpVerb::Get:
            result = client.Get(path, headers);
            break;
        case HttpVerb::Post:
            result = client.Post(path, headers, request.body_json, "application/json");
            break;
        case HttpVerb::Put:
            result = client.Put(path, headers, request.body_json, "application/json");
            break;
        case HttpVerb::Delete:
            result = client.Delete(path, headers);
            break;
    }
    HttpResult r;
    if (!result) {
        r.error = "transport failure: " + httplib::to_string(result.error());
        return r;
    }
    r.transport_ok = true;
    r.status = result->status;
    r.body = result->body;
    return r;
}

} // namespace dflow
