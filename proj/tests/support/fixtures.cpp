#include "fixtures.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "dflow/parser.hpp"

namespace fs = std::filesystem;

namespace dflow::testing {

std::string models_dir() {
#ifdef DFLOW_MODELS_DIR
    return DFLOW_MODELS_DIR;
#else
    return "models";
#endif
}

std::string fixture_path(const std::string& name) { return models_dir() + "/" + name; }

std::string read_file(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot read " + path);
    std::ostringstream text;
    text << file.rdbuf();
    return text.str();
}

void write_file(const std::string& path, const std::string& content) {
    fs::create_directories(fs::path(path).parent_path());
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw std::runtime_error("cannot write " + path);
    file << content;
}

std::string read_fixture(const std::string& name) { return read_file(fixture_path(name)); }

Model parse_source(const std::string& source, const std::string& label) {
    ParseResult result = parse(source, label);
    if (!result.ok()) {
        std::string msg = "fixture does not parse: " + label;
        for (const auto& d : result.diagnostics) msg += "\n  " + format_diagnostic(d);
        throw std::runtime_error(msg);
    }
    return std::move(*result.model);
}

Model parse_fixture(const std::string& name) {
    return parse_source(read_fixture(name), name);
}

std::string scratch_dir(const std::string& tag) {
    fs::path dir = fs::temp_directory_path() / ("dflow_test_" + tag);
    std::error_code ec;
    fs::remove_all(dir, ec);
    fs::create_directories(dir);
    return dir.string();
}

} // namespace dflow::testing
