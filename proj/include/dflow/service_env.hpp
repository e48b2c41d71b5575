#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "dflow/model.hpp"

namespace dflow {

struct ComposedRequest {
    HttpVerb verb = HttpVerb::Get;
    std::string url;  // scheme://host[:port]/path[/...]?k=v&...
    std::vector<std::pair<std::string, std::string>> headers;
    std::string body_json;  // empty when the call has no body params
};

struct HttpResult {
    bool transport_ok = false;
    int status = 0;
    std::string body;
    std::string error;  // transport failure description
};

// Where service calls go: a stub table in tests and scripted chats, a real
// HTTP client in live mode. Implementations must tolerate concurrent reads.
class ServiceEnv {
public:
    virtual ~ServiceEnv() = default;
    virtual HttpResult invoke(const ComposedRequest& request) = 0;
};

// One stub: url_pattern is either the exact composed URL or a prefix ending
// in '*'.
struct StubRule {
    HttpVerb verb = HttpVerb::Get;
    std::string url_pattern;
    int status = 200;
    std::string body_json;
};

class StubEnv : public ServiceEnv {
public:
    StubEnv() = default;
    explicit StubEnv(std::vector<StubRule> rules) : rules_(std::move(rules)) {}

    // JSON array of {verb, url_pattern, status, body}. Throws
    // std::runtime_error on malformed input.
    static StubEnv from_json(const std::string& json_text);
    static StubEnv from_file(const std::string& path);

    void add(StubRule rule) { rules_.push_back(std::move(rule)); }

    HttpResult invoke(const ComposedRequest& request) override;

private:
    std::vector<StubRule> rules_;
};

// Plain HTTP client (cpp-httplib) with a per-call timeout.
class HttpEnv : public ServiceEnv {
public:
    explicit HttpEnv(int timeout_seconds = 10) : timeout_seconds_(timeout_seconds) {}
    HttpResult invoke(const ComposedRequest& request) override;

private:
    int timeout_seconds_;
};

} // namespace dflow
