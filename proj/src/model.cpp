#include "dflow/model.hpp"

#include <algorithm>
#include <cstdio>

namespace dflow {

std::string severity_name_str(Severity s);

std::string severity_name(Severity s) {
    return s == Severity::Error ? "error" : "warning";
}

std::string format_diagnostic(const Diagnostic& d) {
    char head[160];
    std::snprintf(head, sizeof head, "%s:%d:%d: %s %s: ",
                  d.span.file.c_str(), d.span.start_line, d.span.start_col,
                  severity_name(d.severity).c_str(), d.code.c_str());
    return std::string(head) + d.message;
}

void sort_diagnostics(std::vector<Diagnostic>& diags) {
    std::stable_sort(diags.begin(), diags.end(), [](const Diagnostic& a, const Diagnostic& b) {
        if (a.span.start_line != b.span.start_line) return a.span.start_line < b.span.start_line;
        if (a.span.start_col != b.span.start_col) return a.span.start_col < b.span.start_col;
        return a.code < b.code;
    });
}

namespace {

template <class T, size_t N>
std::optional<T> lookup(const char* const (&names)[N], const std::string& s) {
    for (size_t i = 0; i < N; ++i)
        if (s == names[i]) return static_cast<T>(i);
    return std::nullopt;
}

const char* const kSlotTypeNames[] = {"str", "int", "float", "bool"};
const char* const kVerbNames[] = {"GET", "POST", "PUT", "DELETE"};
const char* const kCategoryNames[] = {"PERSON", "GPE",     "DATE",    "TIME",
                                      "ORG",    "LOC",     "PRODUCT", "MONEY",
                                      "CARDINAL", "ORDINAL", "PERCENT", "EMAIL"};
const char* const kUserPropNames[] = {"NAME", "SURNAME", "AGE",  "EMAIL",
                                      "PHONE", "CITY",   "ADDRESS"};
const char* const kSystemPropNames[] = {"TIME", "LOCATION", "RANDOM_INT", "RANDOM_FLOAT"};
const char* const kConceptKindNames[] = {"trigger", "intent", "eservice", "form",
                                         "form slot", "gslot", "entity", "synonym"};

} // namespace

const char* slot_type_name(SlotType t) { return kSlotTypeNames[static_cast<int>(t)]; }
const char* verb_name(HttpVerb v) { return kVerbNames[static_cast<int>(v)]; }
const char* category_name(EntityCategory c) { return kCategoryNames[static_cast<int>(c)]; }
const char* user_prop_name(UserProp p) { return kUserPropNames[static_cast<int>(p)]; }
const char* system_prop_name(SystemProp p) { return kSystemPropNames[static_cast<int>(p)]; }
const char* concept_kind_name(ConceptKind k) { return kConceptKindNames[static_cast<int>(k)]; }

std::optional<SlotType> slot_type_from(const std::string& s) { return lookup<SlotType>(kSlotTypeNames, s); }
std::optional<HttpVerb> verb_from(const std::string& s) { return lookup<HttpVerb>(kVerbNames, s); }
std::optional<EntityCategory> category_from(const std::string& s) { return lookup<EntityCategory>(kCategoryNames, s); }
std::optional<UserProp> user_prop_from(const std::string& s) { return lookup<UserProp>(kUserPropNames, s); }
std::optional<SystemProp> system_prop_from(const std::string& s) { return lookup<SystemProp>(kSystemPropNames, s); }

SlotType literal_type(const Literal& v) {
    return static_cast<SlotType>(v.index());
}

const std::string& Trigger::name() const {
    return is_intent() ? std::get<IntentTrigger>(node).name : std::get<EventTrigger>(node).name;
}

const SourceSpan& Trigger::span() const {
    return is_intent() ? std::get<IntentTrigger>(node).span : std::get<EventTrigger>(node).span;
}

const std::string& DialogueResponse::name() const {
    return is_form() ? std::get<Form>(node).name : std::get<ActionGroup>(node).name;
}

const SourceSpan& DialogueResponse::span() const {
    return is_form() ? std::get<Form>(node).span : std::get<ActionGroup>(node).span;
}

// ---------------------------------------------------------------------------
// Structural equality (spans excluded)

namespace {

bool eq(const Literal& a, const Literal& b) { return a == b; }

bool eq(const ValueExpr& a, const ValueExpr& b) {
    if (a.node.index() != b.node.index()) return false;
    if (const auto* lit = std::get_if<Literal>(&a.node)) return eq(*lit, std::get<Literal>(b.node));
    if (const auto* f = std::get_if<FormSlotRef>(&a.node)) {
        const auto& fb = std::get<FormSlotRef>(b.node);
        return f->form == fb.form && f->slot == fb.slot;
    }
    if (const auto* g = std::get_if<GSlotRef>(&a.node))
        return g->name == std::get<GSlotRef>(b.node).name;
    if (const auto* u = std::get_if<UserProp>(&a.node)) return *u == std::get<UserProp>(b.node);
    return std::get<SystemProp>(a.node) == std::get<SystemProp>(b.node);
}

bool eq(const TemplateString& a, const TemplateString& b) {
    if (a.parts.size() != b.parts.size()) return false;
    for (size_t i = 0; i < a.parts.size(); ++i) {
        const auto& pa = a.parts[i].node;
        const auto& pb = b.parts[i].node;
        if (pa.index() != pb.index()) return false;
        if (std::holds_alternative<std::string>(pa)) {
            if (std::get<std::string>(pa) != std::get<std::string>(pb)) return false;
        } else if (!eq(std::get<ValueExpr>(pa), std::get<ValueExpr>(pb))) {
            return false;
        }
    }
    return true;
}

bool eq(const PretrainedEntityRef& a, const PretrainedEntityRef& b) {
    return a.category == b.category && a.sample_values == b.sample_values;
}

bool eq(const PhraseChunk& a, const PhraseChunk& b) {
    if (a.node.index() != b.node.index()) return false;
    if (const auto* t = std::get_if<TextChunk>(&a.node))
        return t->text == std::get<TextChunk>(b.node).text;
    if (const auto* p = std::get_if<PretrainedEntityChunk>(&a.node))
        return eq(p->ref, std::get<PretrainedEntityChunk>(b.node).ref);
    if (const auto* e = std::get_if<TrainableEntityChunk>(&a.node))
        return e->entity == std::get<TrainableEntityChunk>(b.node).entity;
    return std::get<SynonymChunk>(a.node).synonym == std::get<SynonymChunk>(b.node).synonym;
}

bool eq(const ServiceCall& a, const ServiceCall& b) {
    auto params_eq = [](const std::vector<ServiceParam>& x, const std::vector<ServiceParam>& y) {
        if (x.size() != y.size()) return false;
        for (size_t i = 0; i < x.size(); ++i)
            if (x[i].key != y[i].key || !eq(x[i].value, y[i].value)) return false;
        return true;
    };
    return a.service == b.service && params_eq(a.query_params, b.query_params) &&
           params_eq(a.path_params, b.path_params) && params_eq(a.header_params, b.header_params) &&
           params_eq(a.body_params, b.body_params) && a.response_path == b.response_path;
}

bool eq(const FormSlot& a, const FormSlot& b) {
    if (a.name != b.name || a.type != b.type) return false;
    if (a.source.index() != b.source.index()) return false;
    if (const auto* h = std::get_if<HRISource>(&a.source)) {
        const auto& hb = std::get<HRISource>(b.source);
        if (!eq(h->ask, hb.ask)) return false;
        if (h->extraction.index() != hb.extraction.index()) return false;
        if (const auto* fe = std::get_if<FromEntity>(&h->extraction)) {
            const auto& feb = std::get<FromEntity>(hb.extraction);
            if (fe->entity.index() != feb.entity.index()) return false;
            if (const auto* pe = std::get_if<PretrainedEntityRef>(&fe->entity))
                return eq(*pe, std::get<PretrainedEntityRef>(feb.entity));
            return std::get<std::string>(fe->entity) == std::get<std::string>(feb.entity);
        }
        if (const auto* fi = std::get_if<FromIntent>(&h->extraction)) {
            const auto& fib = std::get<FromIntent>(hb.extraction);
            if (fi->mappings.size() != fib.mappings.size()) return false;
            for (size_t i = 0; i < fi->mappings.size(); ++i)
                if (fi->mappings[i].intent != fib.mappings[i].intent ||
                    !eq(fi->mappings[i].value, fib.mappings[i].value))
                    return false;
        }
        return true;
    }
    return eq(std::get<EServiceSource>(a.source).call, std::get<EServiceSource>(b.source).call);
}

bool eq(const Action& a, const Action& b) {
    if (a.node.index() != b.node.index()) return false;
    if (const auto* s = std::get_if<SpeakAction>(&a.node))
        return eq(s->text, std::get<SpeakAction>(b.node).text);
    if (const auto* f = std::get_if<FireEventAction>(&a.node)) {
        const auto& fb = std::get<FireEventAction>(b.node);
        return eq(f->uri, fb.uri) && eq(f->message, fb.message);
    }
    if (const auto* r = std::get_if<RESTCallAction>(&a.node))
        return eq(r->call, std::get<RESTCallAction>(b.node).call);
    if (const auto* g = std::get_if<SetGSlotAction>(&a.node)) {
        const auto& gb = std::get<SetGSlotAction>(b.node);
        return g->gslot == gb.gslot && eq(g->value, gb.value);
    }
    const auto& fa = std::get<SetFSlotAction>(a.node);
    const auto& fb = std::get<SetFSlotAction>(b.node);
    return fa.form == fb.form && fa.slot == fb.slot && eq(fa.value, fb.value);
}

template <class T>
bool list_equals(const std::vector<T>& a, const std::vector<T>& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i)
        if (!equals(a[i], b[i])) return false;
    return true;
}

} // namespace

bool equals(const PhraseExample& a, const PhraseExample& b) {
    if (a.chunks.size() != b.chunks.size()) return false;
    for (size_t i = 0; i < a.chunks.size(); ++i)
        if (!eq(a.chunks[i], b.chunks[i])) return false;
    return true;
}

bool equals(const TrainableEntity& a, const TrainableEntity& b) {
    return a.name == b.name && a.examples == b.examples;
}

bool equals(const Synonym& a, const Synonym& b) {
    return a.name == b.name && a.words == b.words;
}

bool equals(const Trigger& a, const Trigger& b) {
    if (a.node.index() != b.node.index()) return false;
    if (a.is_intent()) {
        const auto& ia = std::get<IntentTrigger>(a.node);
        const auto& ib = std::get<IntentTrigger>(b.node);
        if (ia.name != ib.name || ia.examples.size() != ib.examples.size()) return false;
        for (size_t i = 0; i < ia.examples.size(); ++i)
            if (!equals(ia.examples[i], ib.examples[i])) return false;
        return true;
    }
    const auto& ea = std::get<EventTrigger>(a.node);
    const auto& eb = std::get<EventTrigger>(b.node);
    return ea.name == eb.name && ea.uri == eb.uri;
}

bool equals(const EServiceHTTP& a, const EServiceHTTP& b) {
    return a.name == b.name && a.verb == b.verb && a.host == b.host && a.path == b.path &&
           a.port == b.port;
}

bool equals(const GSlot& a, const GSlot& b) {
    return a.name == b.name && a.type == b.type && a.default_value == b.default_value;
}

bool equals(const Dialogue& a, const Dialogue& b) {
    if (a.name != b.name || a.on != b.on) return false;
    if (a.responses.size() != b.responses.size()) return false;
    for (size_t i = 0; i < a.responses.size(); ++i) {
        const auto& ra = a.responses[i];
        const auto& rb = b.responses[i];
        if (ra.node.index() != rb.node.index()) return false;
        if (ra.is_form()) {
            const auto& fa = std::get<Form>(ra.node);
            const auto& fb = std::get<Form>(rb.node);
            if (fa.name != fb.name || fa.slots.size() != fb.slots.size()) return false;
            for (size_t j = 0; j < fa.slots.size(); ++j)
                if (!eq(fa.slots[j], fb.slots[j])) return false;
        } else {
            const auto& ga = std::get<ActionGroup>(ra.node);
            const auto& gb = std::get<ActionGroup>(rb.node);
            if (ga.name != gb.name || ga.actions.size() != gb.actions.size()) return false;
            for (size_t j = 0; j < ga.actions.size(); ++j)
                if (!eq(ga.actions[j], gb.actions[j])) return false;
        }
    }
    return true;
}

bool model_equals(const Model& a, const Model& b) {
    return list_equals(a.entities, b.entities) && list_equals(a.synonyms, b.synonyms) &&
           list_equals(a.triggers, b.triggers) && list_equals(a.eservices, b.eservices) &&
           list_equals(a.gslots, b.gslots) && list_equals(a.dialogues, b.dialogues);
}

// ---------------------------------------------------------------------------
// Reference collection

namespace {

struct RefCollector {
    std::vector<Reference>& out;

    void expr(const std::string& site, const ValueExpr& e) {
        if (const auto* f = std::get_if<FormSlotRef>(&e.node)) {
            out.push_back({site, f->form + "." + f->slot, ConceptKind::FormSlot, e.span});
        } else if (const auto* g = std::get_if<GSlotRef>(&e.node)) {
            out.push_back({site, g->name, ConceptKind::GSlot, e.span});
        }
    }

    void tmpl(const std::string& site, const TemplateString& t) {
        for (const auto& part : t.parts)
            if (const auto* e = std::get_if<ValueExpr>(&part.node)) expr(site, *e);
    }

    void call(const std::string& site, const ServiceCall& c) {
        out.push_back({site, c.service, ConceptKind::EService, c.span});
        for (const auto* group : {&c.query_params, &c.path_params, &c.header_params, &c.body_params})
            for (const auto& p : *group) expr(site, p.value);
    }
};

} // namespace

std::vector<Reference> collect_references(const Model& model) {
    std::vector<Reference> out;
    RefCollector rc{out};

    for (const auto& t : model.triggers) {
        const auto* intent = std::get_if<IntentTrigger>(&t.node);
        if (!intent) continue;
        for (size_t i = 0; i < intent->examples.size(); ++i) {
            std::string site = intent->name + ".examples[" + std::to_string(i) + "]";
            for (const auto& chunk : intent->examples[i].chunks) {
                if (const auto* te = std::get_if<TrainableEntityChunk>(&chunk.node))
                    out.push_back({site, te->entity, ConceptKind::Entity, chunk.span});
                else if (const auto* sy = std::get_if<SynonymChunk>(&chunk.node))
                    out.push_back({site, sy->synonym, ConceptKind::Synonym, chunk.span});
            }
        }
    }

    for (const auto& d : model.dialogues) {
        for (size_t i = 0; i < d.on.size(); ++i) {
            SourceSpan span = i < d.on_spans.size() ? d.on_spans[i] : d.span;
            out.push_back({d.name + ".on", d.on[i], ConceptKind::Trigger, span});
        }
        for (const auto& r : d.responses) {
            if (r.is_form()) {
                const auto& form = std::get<Form>(r.node);
                for (const auto& slot : form.slots) {
                    std::string site = form.name + "." + slot.name;
                    if (const auto* hri = std::get_if<HRISource>(&slot.source)) {
                        rc.tmpl(site, hri->ask);
                        if (const auto* fe = std::get_if<FromEntity>(&hri->extraction)) {
                            if (const auto* name = std::get_if<std::string>(&fe->entity))
                                out.push_back({site, *name, ConceptKind::Entity, slot.span});
                        } else if (const auto* fi = std::get_if<FromIntent>(&hri->extraction)) {
                            for (const auto& m : fi->mappings)
                                out.push_back({site, m.intent, ConceptKind::Intent, m.span});
                        }
                    } else {
                        rc.call(site, std::get<EServiceSource>(slot.source).call);
                    }
                }
            } else {
                const auto& group = std::get<ActionGroup>(r.node);
                for (size_t i = 0; i < group.actions.size(); ++i) {
                    std::string site = group.name + "[" + std::to_string(i) + "]";
                    const auto& a = group.actions[i];
                    if (const auto* s = std::get_if<SpeakAction>(&a.node)) {
                        rc.tmpl(site, s->text);
                    } else if (const auto* f = std::get_if<FireEventAction>(&a.node)) {
                        rc.expr(site, f->uri);
                        rc.expr(site, f->message);
                    } else if (const auto* c = std::get_if<RESTCallAction>(&a.node)) {
                        rc.call(site, c->call);
                    } else if (const auto* g = std::get_if<SetGSlotAction>(&a.node)) {
                        out.push_back({site, g->gslot, ConceptKind::GSlot, a.span});
                        rc.expr(site, g->value);
                    } else if (const auto* fs = std::get_if<SetFSlotAction>(&a.node)) {
                        out.push_back({site, fs->form + "." + fs->slot, ConceptKind::FormSlot, a.span});
                        rc.expr(site, fs->value);
                    }
                }
            }
        }
    }
    return out;
}

} // namespace dflow
