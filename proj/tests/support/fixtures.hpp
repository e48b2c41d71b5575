#pragma once

#include <string>

#include "dflow/model.hpp"

// Shared access to the sample models under models/.

namespace dflow::testing {

std::string models_dir();
std::string fixture_path(const std::string& name);
std::string read_fixture(const std::string& name);  // throws if missing

// Parses a fixture and asserts success; aborts the test on failure.
Model parse_fixture(const std::string& name);
Model parse_source(const std::string& source, const std::string& label = "<test>");

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

// Unique scratch directory under the build tree, wiped on construction.
std::string scratch_dir(const std::string& tag);

} // namespace dflow::testing
