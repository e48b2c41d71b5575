#include "dflow/merger.hpp"

#include <cstdio>
#include <map>

#include "dflow/validator.hpp"

namespace dflow {

namespace {

std::string span_text(const SourceSpan& s) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%s:%d:%d", s.file.c_str(), s.start_line, s.start_col);
    return buf;
}

struct Merger {
    std::vector<Diagnostic> conflicts;

    template <class T, class SpanOf>
    void fold(std::vector<T>& into, const std::vector<T>& from, const char* kind, SpanOf span_of) {
        for (const auto& item : from) {
            const T* existing = nullptr;
            for (const auto& prev : into)
                if (prev.name == item.name) {
                    existing = &prev;
                    break;
                }
            if (!existing) {
                into.push_back(item);
            } else if (!equals(*existing, item)) {
                conflicts.push_back({"M001", Severity::Error,
                                     std::string("merge conflict: ") + kind + " '" + item.name +
                                         "' differs from the definition at " +
                                         span_text(span_of(*existing)),
                                     span_of(item)});
            }
        }
    }
};

} // namespace

MergeResult merge(const std::vector<Model>& models) {
    Model merged;
    Merger merger;

    for (const auto& m : models) {
        merger.fold(merged.entities, m.entities, "entity", [](const auto& e) { return e.span; });
        merger.fold(merged.synonyms, m.synonyms, "synonym", [](const auto& s) { return s.span; });
        merger.fold(merged.eservices, m.eservices, "eservice", [](const auto& s) { return s.span; });
        merger.fold(merged.gslots, m.gslots, "gslot", [](const auto& g) { return g.span; });
        merger.fold(merged.dialogues, m.dialogues, "dialogue", [](const auto& d) { return d.span; });
        // triggers carry their name inside the variant
        for (const auto& t : m.triggers) {
            const Trigger* existing = nullptr;
            for (const auto& prev : merged.triggers)
                if (prev.name() == t.name()) {
                    existing = &prev;
                    break;
                }
            if (!existing) {
                merged.triggers.push_back(t);
            } else if (!equals(*existing, t)) {
                merger.conflicts.push_back(
                    {"M001", Severity::Error,
                     "merge conflict: trigger '" + t.name() + "' differs from the definition at " +
                         span_text(existing->span()),
                     t.span()});
            }
        }
    }

    MergeResult result;
    if (!merger.conflicts.empty()) {
        sort_diagnostics(merger.conflicts);
        result.diagnostics = std::move(merger.conflicts);
        return result;
    }

    // The combined model must still satisfy every validator rule; V003 in
    // particular can only appear once inputs are seen together.
    ValidationReport report = validate(merged);
    if (!report.valid) {
        for (auto& d : report.diagnostics)
            if (d.severity == Severity::Error) result.diagnostics.push_back(std::move(d));
        return result;
    }
    result.model = std::move(merged);
    return result;
}

} // namespace dflow
