#pragma once

#include <string>
#include <utility>
#include <vector>

namespace dflow {

// Minimal zip writer for /model/codegen responses: store method only,
// zeroed timestamps, entries kept in the given order — identical input
// yields a byte-identical archive.
std::string make_zip(const std::vector<std::pair<std::string, std::string>>& entries);

// Entry names in archive order (for tests and clients that only need the
// listing).
std::vector<std::string> zip_entry_names(const std::string& archive);

} // namespace dflow
