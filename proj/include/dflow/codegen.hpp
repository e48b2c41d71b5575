#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dflow/model.hpp"

namespace dflow {

// The generated assistant project. The file set is fixed: config.yml,
// domain.yml, endpoints.yml, credentials.yml, data/nlu.yml, data/rules.yml,
// data/stories.yml, actions/actions.py — in that order. Content is
// byte-deterministic for a given model.
struct GeneratedProject {
    std::vector<std::pair<std::string, std::string>> files;

    const std::string* find(const std::string& path) const {
        for (const auto& [p, content] : files)
            if (p == path) return &content;
        return nullptr;
    }
};

struct InvalidModelError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct OverwriteRefused : std::runtime_error {
    explicit OverwriteRefused(const std::string& path)
        : std::runtime_error("refusing to overwrite " + path + " (pass --force to allow)"),
          path(path) {}
    std::string path;
};

struct WriteFailure : std::runtime_error {
    WriteFailure(const std::string& path, const std::string& why)
        : std::runtime_error("cannot write " + path + ": " + why), path(path) {}
    std::string path;
};

// Emits the full 8-file project. The model must validate with zero errors;
// otherwise InvalidModelError is thrown and nothing is emitted.
GeneratedProject generate(const Model& model);

// Writes the project under `dir`, creating directories as needed. Existing
// files are refused unless `force` is set; the check runs before anything is
// written. Returns the written paths in emission order.
std::vector<std::string> write_project(const GeneratedProject& project, const std::string& dir,
                                       bool force);

} // namespace dflow
