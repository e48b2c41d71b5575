#include "dflow/validator.hpp"

#include <map>
#include <set>

#include <json.hpp>

#include "dflow/parser.hpp"

namespace dflow {

namespace {

bool assignable(SlotType target, SlotType source) {
    return target == source || (target == SlotType::Float && source == SlotType::Int);
}

struct FormPos {
    int dialogue = -1;
    int response = -1;
    const Form* form = nullptr;
};

// Where an expression lives, for forward-read (V007) checks.
struct Site {
    int dialogue = -1;
    int response = -1;
    int slot = -1;  // -1 when the site is an action, not a form slot
};

struct Checker {
    const Model& m;
    std::vector<Diagnostic> out;

    std::map<std::string, const Trigger*> triggers;
    std::set<std::string> intents;
    std::set<std::string> eservices;
    std::map<std::string, const GSlot*> gslots;
    std::map<std::string, std::vector<FormPos>> forms;

    void diag(const char* code, Severity sev, std::string msg, const SourceSpan& span) {
        out.push_back({code, sev, std::move(msg), span});
    }

    void error(const char* code, std::string msg, const SourceSpan& span) {
        diag(code, Severity::Error, std::move(msg), span);
    }

    void warning(const char* code, std::string msg, const SourceSpan& span) {
        diag(code, Severity::Warning, std::move(msg), span);
    }

    // -- tables and V001 ----------------------------------------------------

    template <class T, class SpanOf>
    void check_dups(const std::vector<T>& list, const char* kind, SpanOf span_of) {
        std::set<std::string> seen;
        for (const auto& item : list) {
            const std::string& name = item.name;
            if (!seen.insert(name).second)
                error("V001", std::string("duplicate ") + kind + " name '" + name + "'", span_of(item));
        }
    }

    void build_tables() {
        for (const auto& t : m.triggers) {
            if (!triggers.emplace(t.name(), &t).second)
                error("V001", "duplicate trigger name '" + t.name() + "'", t.span());
            if (t.is_intent()) intents.insert(t.name());
        }
        check_dups(m.entities, "entity", [](const auto& e) { return e.span; });
        check_dups(m.synonyms, "synonym", [](const auto& s) { return s.span; });
        check_dups(m.eservices, "eservice", [](const auto& s) { return s.span; });
        check_dups(m.gslots, "gslot", [](const auto& g) { return g.span; });
        check_dups(m.dialogues, "dialogue", [](const auto& d) { return d.span; });
        for (const auto& svc : m.eservices) eservices.insert(svc.name);
        for (const auto& g : m.gslots) gslots.emplace(g.name, &g);

        for (size_t di = 0; di < m.dialogues.size(); ++di) {
            const auto& d = m.dialogues[di];
            std::set<std::string> response_names;
            for (size_t ri = 0; ri < d.responses.size(); ++ri) {
                const auto& r = d.responses[ri];
                if (!response_names.insert(r.name()).second)
                    error("V001", "duplicate response name '" + r.name() + "' in dialogue '" +
                                      d.name + "'", r.span());
                if (!r.is_form()) continue;
                const auto& form = std::get<Form>(r.node);
                forms[form.name].push_back({(int)di, (int)ri, &form});
                std::set<std::string> slot_names;
                for (const auto& slot : form.slots)
                    if (!slot_names.insert(slot.name).second)
                        error("V001", "duplicate slot name '" + slot.name + "' in form '" +
                                          form.name + "'", slot.span);
            }
        }
    }

    // -- resolution -----------------------------------------------------------

    // Same-dialogue forms shadow forms declared in other dialogues.
    const FormPos* resolve_form(const std::string& name, int dialogue) {
        auto it = forms.find(name);
        if (it == forms.end()) return nullptr;
        for (const auto& pos : it->second)
            if (pos.dialogue == dialogue) return &pos;
        return &it->second.front();
    }

    const FormSlot* find_slot(const Form& form, const std::string& name, int* index = nullptr) {
        for (size_t i = 0; i < form.slots.size(); ++i)
            if (form.slots[i].name == name) {
                if (index) *index = (int)i;
                return &form.slots[i];
            }
        return nullptr;
    }

    std::optional<SlotType> expr_type(const ValueExpr& e, const Site& site) {
        if (const auto* lit = std::get_if<Literal>(&e.node)) return literal_type(*lit);
        if (const auto* f = std::get_if<FormSlotRef>(&e.node)) {
            const FormPos* pos = resolve_form(f->form, site.dialogue);
            if (!pos) return std::nullopt;
            const FormSlot* slot = find_slot(*pos->form, f->slot);
            return slot ? std::optional(slot->type) : std::nullopt;
        }
        if (const auto* g = std::get_if<GSlotRef>(&e.node)) {
            auto it = gslots.find(g->name);
            return it != gslots.end() ? std::optional(it->second->type) : std::nullopt;
        }
        if (const auto* u = std::get_if<UserProp>(&e.node))
            return *u == UserProp::Age ? SlotType::Int : SlotType::Str;
        switch (std::get<SystemProp>(e.node)) {
            case SystemProp::RandomInt: return SlotType::Int;
            case SystemProp::RandomFloat: return SlotType::Float;
            default: return SlotType::Str;
        }
    }

    // V005/V006/V007 for one expression.
    void check_expr(const ValueExpr& e, const Site& site) {
        if (const auto* f = std::get_if<FormSlotRef>(&e.node)) {
            const FormPos* pos = resolve_form(f->form, site.dialogue);
            int slot_index = -1;
            if (!pos || !find_slot(*pos->form, f->slot, &slot_index)) {
                error("V005", "reference to undeclared form slot '" + f->form + "." + f->slot + "'",
                      e.span);
                return;
            }
            if (pos->dialogue != site.dialogue) {
                warning("V007", "'" + f->form + "." + f->slot +
                                    "' is filled by a different dialogue and may be empty", e.span);
            } else if (pos->response > site.response) {
                error("V007", "'" + f->form + "." + f->slot +
                                  "' is read before the form that fills it runs", e.span);
            } else if (pos->response == site.response && site.slot >= 0 && slot_index >= site.slot) {
                error("V007", "'" + f->form + "." + f->slot +
                                  "' is read before it is filled (fill order is sequential)", e.span);
            }
        } else if (const auto* g = std::get_if<GSlotRef>(&e.node)) {
            if (!gslots.count(g->name))
                error("V006", "reference to undeclared gslot '" + g->name + "'", e.span);
        }
    }

    void check_template(const TemplateString& t, const Site& site) {
        for (const auto& part : t.parts)
            if (const auto* e = std::get_if<ValueExpr>(&part.node)) check_expr(*e, site);
    }

    void check_call(const ServiceCall& call, const Site& site) {
        if (!eservices.count(call.service))
            error("V004", "call to undeclared eservice '" + call.service + "'", call.span);
        for (const auto* group :
             {&call.query_params, &call.path_params, &call.header_params, &call.body_params})
            for (const auto& p : *group) check_expr(p.value, site);
    }

    // -- rule walk ------------------------------------------------------------

    void check_triggers() {
        // V010 / V012 / V013
        for (const auto& t : m.triggers) {
            const auto* intent = std::get_if<IntentTrigger>(&t.node);
            if (!intent) continue;
            if (intent->examples.empty())
                error("V010", "intent '" + intent->name + "' has no phrase examples", intent->span);
            for (size_t i = 0; i < intent->examples.size(); ++i)
                for (size_t j = 0; j < i; ++j)
                    if (equals(intent->examples[i], intent->examples[j])) {
                        warning("V012", "duplicate phrase example in intent '" + intent->name + "'",
                                intent->examples[i].span);
                        break;
                    }
        }
        for (size_t a = 0; a < m.triggers.size(); ++a) {
            const auto* ia = std::get_if<IntentTrigger>(&m.triggers[a].node);
            if (!ia) continue;
            for (size_t b = 0; b < a; ++b) {
                const auto* ib = std::get_if<IntentTrigger>(&m.triggers[b].node);
                if (!ib || ia->name == ib->name) continue;
                for (const auto& ea : ia->examples)
                    for (const auto& eb : ib->examples)
                        if (equals(ea, eb))
                            error("V013", "intents '" + ib->name + "' and '" + ia->name +
                                              "' share an identical phrase example (ambiguous trigger)",
                                  ea.span);
            }
        }
    }

    void check_dialogues() {
        std::map<std::string, std::vector<std::pair<const Dialogue*, SourceSpan>>> uses;
        for (const auto& d : m.dialogues) {
            std::set<std::string> seen_in_dialogue;
            for (size_t i = 0; i < d.on.size(); ++i) {
                const SourceSpan& span = i < d.on_spans.size() ? d.on_spans[i] : d.span;
                if (!triggers.count(d.on[i])) {
                    error("V002", "dialogue '" + d.name + "' is triggered by undeclared trigger '" +
                                      d.on[i] + "'", span);
                    continue;
                }
                if (seen_in_dialogue.insert(d.on[i]).second)
                    uses[d.on[i]].push_back({&d, span});
            }
        }
        for (auto& [name, sites] : uses)
            for (size_t i = 1; i < sites.size(); ++i)
                error("V003", "trigger '" + name + "' initiates more than one dialogue ('" +
                                  sites[0].first->name + "' and '" + sites[i].first->name + "')",
                      sites[i].second);
        // V011: declared but never used
        for (const auto& t : m.triggers)
            if (!uses.count(t.name()))
                warning("V011", "trigger '" + t.name() + "' is not used by any dialogue", t.span());
    }

    void check_value_assignment(SlotType target, const ValueExpr& value, const Site& site,
                                const std::string& what) {
        auto source = expr_type(value, site);
        if (source && !assignable(target, *source))
            error("V009", what + " expects " + slot_type_name(target) + " but got " +
                              slot_type_name(*source), value.span);
    }

    void check_bodies() {
        for (const auto& g : m.gslots)
            if (g.default_value && !assignable(g.type, literal_type(*g.default_value)))
                error("V009", "gslot '" + g.name + "' of type " + slot_type_name(g.type) +
                                  " has a default of type " +
                                  slot_type_name(literal_type(*g.default_value)), g.span);

        for (size_t di = 0; di < m.dialogues.size(); ++di) {
            const auto& d = m.dialogues[di];
            for (size_t ri = 0; ri < d.responses.size(); ++ri) {
                const auto& r = d.responses[ri];
                if (r.is_form()) {
                    const auto& form = std::get<Form>(r.node);
                    for (size_t si = 0; si < form.slots.size(); ++si) {
                        const auto& slot = form.slots[si];
                        Site site{(int)di, (int)ri, (int)si};
                        if (const auto* hri = std::get_if<HRISource>(&slot.source)) {
                            check_template(hri->ask, site);
                            if (const auto* fi = std::get_if<FromIntent>(&hri->extraction)) {
                                for (const auto& mapping : fi->mappings) {
                                    if (!intents.count(mapping.intent))
                                        error("V008", "slot '" + form.name + "." + slot.name +
                                                          "' maps undeclared intent '" +
                                                          mapping.intent + "'", mapping.span);
                                    if (!assignable(slot.type, literal_type(mapping.value)))
                                        error("V009", "slot '" + form.name + "." + slot.name +
                                                          "' expects " + slot_type_name(slot.type) +
                                                          " but intent '" + mapping.intent +
                                                          "' maps a " +
                                                          slot_type_name(literal_type(mapping.value)),
                                              mapping.span);
                                }
                            }
                        } else {
                            check_call(std::get<EServiceSource>(slot.source).call, site);
                        }
                    }
                } else {
                    const auto& group = std::get<ActionGroup>(r.node);
                    Site site{(int)di, (int)ri, -1};
                    for (const auto& a : group.actions) {
                        if (const auto* s = std::get_if<SpeakAction>(&a.node)) {
                            check_template(s->text, site);
                        } else if (const auto* f = std::get_if<FireEventAction>(&a.node)) {
                            check_expr(f->uri, site);
                            check_expr(f->message, site);
                        } else if (const auto* c = std::get_if<RESTCallAction>(&a.node)) {
                            check_call(c->call, site);
                        } else if (const auto* sg = std::get_if<SetGSlotAction>(&a.node)) {
                            auto it = gslots.find(sg->gslot);
                            if (it == gslots.end())
                                error("V006", "SetGSlot targets undeclared gslot '" + sg->gslot + "'",
                                      a.span);
                            check_expr(sg->value, site);
                            if (it != gslots.end())
                                check_value_assignment(it->second->type, sg->value, site,
                                                       "gslot '" + sg->gslot + "'");
                        } else if (const auto* sf = std::get_if<SetFSlotAction>(&a.node)) {
                            const FormPos* pos = resolve_form(sf->form, (int)di);
                            const FormSlot* slot = pos ? find_slot(*pos->form, sf->slot) : nullptr;
                            if (!slot)
                                error("V005", "SetFSlot targets undeclared form slot '" + sf->form +
                                                  "." + sf->slot + "'", a.span);
                            check_expr(sf->value, site);
                            if (slot)
                                check_value_assignment(slot->type, sf->value, site,
                                                       "slot '" + sf->form + "." + sf->slot + "'");
                        }
                    }
                }
            }
        }
    }

    ValidationReport run() {
        build_tables();
        check_triggers();
        check_dialogues();
        check_bodies();
        sort_diagnostics(out);
        ValidationReport report;
        report.valid = !has_errors(out);
        report.diagnostics = std::move(out);
        return report;
    }
};

} // namespace

ValidationReport validate(const Model& model) {
    Checker checker{model};
    return checker.run();
}

ValidationReport check_source(const std::string& source, const std::string& file_label) {
    ParseResult parsed = parse(source, file_label);
    if (!parsed.ok()) {
        ValidationReport report;
        report.diagnostics = std::move(parsed.diagnostics);
        report.valid = false;
        return report;
    }
    return validate(*parsed.model);
}

std::string report_to_json(const ValidationReport& report, int pretty_indent) {
    nlohmann::json diags = nlohmann::json::array();
    for (const auto& d : report.diagnostics) {
        diags.push_back({
            {"code", d.code},
            {"severity", severity_name(d.severity)},
            {"message", d.message},
            {"span",
             {{"file", d.span.file},
              {"start_line", d.span.start_line},
              {"start_col", d.span.start_col},
              {"end_line", d.span.end_line},
              {"end_col", d.span.end_col}}},
        });
    }
    nlohmann::json j{{"valid", report.valid}, {"diagnostics", diags}};
    return j.dump(pretty_indent);
}

} // namespace dflow
