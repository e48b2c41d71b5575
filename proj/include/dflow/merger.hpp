#pragma once

#include <optional>
#include <vector>

#include "dflow/diagnostics.hpp"
#include "dflow/model.hpp"

namespace dflow {

// Result of merging several individually valid models. On success the model
// holds the concatenation of every concept list in input order with exact
// structural duplicates collapsed, and validates with zero errors. On
// failure `diagnostics` holds every conflict (code M001: same name, different
// definition) plus any validation errors of the combined model (e.g. V003
// when two inputs attach different dialogues to one trigger).
struct MergeResult {
    std::optional<Model> model;
    std::vector<Diagnostic> diagnostics;

    bool ok() const { return model.has_value(); }
};

MergeResult merge(const std::vector<Model>& models);

} // namespace dflow
