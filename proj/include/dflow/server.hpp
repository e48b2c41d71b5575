#pragma once

#include <functional>
#include <memory>
#include <string>

#include "dflow/store.hpp"

namespace dflow {

// REST service over the model store:
//   POST   /model                        store a model
//   GET    /model/{model_id}             retrieve
//   PUT    /model/{model_id}             update (version bump)
//   DELETE /model/{model_id}             remove
//   POST   /model/validation             validation report for a source
//   POST   /model/codegen                zip of the generated project
//   GET    /model/merge                  merged latest-per-user model
//   GET    /user/{username}/model/latest
struct ServerConfig {
    std::string db_path = "dflow.db";
    ModelStore::Clock clock;                       // tests inject a fake clock
    std::function<void(const std::string&)> log;   // one line per request
};

class DflowServer {
public:
    explicit DflowServer(ServerConfig config);
    ~DflowServer();
    DflowServer(const DflowServer&) = delete;

    // Bind to host:port (port 0 picks a free one). Returns false when the
    // address cannot be bound.
    bool bind(const std::string& host, int port);
    int port() const;

    // Serve on the bound socket until stop(); blocking.
    void serve();

    // Background variants for in-process tests.
    void start();
    void stop();

    ModelStore& store();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace dflow
