#include "dflow/codegen.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "dflow/validator.hpp"

namespace fs = std::filesystem;

namespace dflow {

namespace {

// Deterministic stand-in sample per pre-trained category, used to annotate
// NLU examples when a PE chunk declares no sample values.
const char* default_sample(EntityCategory c) {
    switch (c) {
        case EntityCategory::PERSON: return "John";
        case EntityCategory::GPE: return "Athens";
        case EntityCategory::DATE: return "tomorrow";
        case EntityCategory::TIME: return "5 pm";
        case EntityCategory::ORG: return "Acme";
        case EntityCategory::LOC: return "Europe";
        case EntityCategory::PRODUCT: return "laptop";
        case EntityCategory::MONEY: return "10 dollars";
        case EntityCategory::CARDINAL: return "three";
        case EntityCategory::ORDINAL: return "first";
        case EntityCategory::PERCENT: return "10 percent";
        case EntityCategory::EMAIL: return "user@example.com";
    }
    return "value";
}

const char* rasa_slot_type(SlotType t) {
    switch (t) {
        case SlotType::Str: return "text";
        case SlotType::Int: return "float";
        case SlotType::Float: return "float";
        case SlotType::Bool: return "bool";
    }
    return "text";
}

std::string snake(const std::string& s) {
    std::string out;
    for (char c : s)
        out.push_back(std::isalnum(static_cast<unsigned char>(c)) ? std::tolower(c) : '_');
    return out;
}

std::string camel(const std::string& s) {
    std::string out;
    bool up = true;
    for (char c : s) {
        if (!std::isalnum(static_cast<unsigned char>(c))) {
            up = true;
            continue;
        }
        out.push_back(up ? std::toupper(c) : c);
        up = false;
    }
    return out;
}

std::string yaml_quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string py_quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string number_text(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string yaml_literal(const Literal& v) {
    switch (literal_type(v)) {
        case SlotType::Str: return yaml_quote(std::get<std::string>(v));
        case SlotType::Int: return std::to_string(std::get<long long>(v));
        case SlotType::Float: return number_text(std::get<double>(v));
        case SlotType::Bool: return std::get<bool>(v) ? "true" : "false";
    }
    return "null";
}

// Everything the templates need to know about the model, gathered up front.
struct ModelFacts {
    const Model& m;
    std::set<EntityCategory> categories;   // PE categories used anywhere
    bool uses_user_props = false;
    bool uses_system_props = false;
    bool uses_time = false;
    bool uses_random = false;
    bool uses_services = false;
    bool uses_fire_event = false;
    bool has_speak = false;
    bool has_slot_sets = false;

    explicit ModelFacts(const Model& model) : m(model) { scan(); }

    void expr(const ValueExpr& e) {
        if (std::holds_alternative<UserProp>(e.node)) uses_user_props = true;
        if (const auto* sp = std::get_if<SystemProp>(&e.node)) {
            uses_system_props = true;
            if (*sp == SystemProp::Time) uses_time = true;
            if (*sp == SystemProp::RandomInt || *sp == SystemProp::RandomFloat) uses_random = true;
        }
    }

    void tmpl(const TemplateString& t) {
        for (const auto& p : t.parts)
            if (const auto* e = std::get_if<ValueExpr>(&p.node)) expr(*e);
    }

    void call(const ServiceCall& c) {
        uses_services = true;
        for (const auto* g : {&c.query_params, &c.path_params, &c.header_params, &c.body_params})
            for (const auto& p : *g) expr(p.value);
    }

    void scan() {
        for (const auto& t : m.triggers) {
            const auto* intent = std::get_if<IntentTrigger>(&t.node);
            if (!intent) continue;
            for (const auto& ex : intent->examples)
                for (const auto& chunk : ex.chunks)
                    if (const auto* pe = std::get_if<PretrainedEntityChunk>(&chunk.node))
                        categories.insert(pe->ref.category);
        }
        for (const auto& d : m.dialogues) {
            for (const auto& r : d.responses) {
                if (r.is_form()) {
                    for (const auto& slot : std::get<Form>(r.node).slots) {
                        if (const auto* hri = std::get_if<HRISource>(&slot.source)) {
                            tmpl(hri->ask);
                            if (const auto* fe = std::get_if<FromEntity>(&hri->extraction))
                                if (const auto* pe = std::get_if<PretrainedEntityRef>(&fe->entity))
                                    categories.insert(pe->category);
                        } else {
                            call(std::get<EServiceSource>(slot.source).call);
                            has_slot_sets = true;
                        }
                    }
                } else {
                    for (const auto& a : std::get<ActionGroup>(r.node).actions) {
                        if (const auto* s = std::get_if<SpeakAction>(&a.node)) {
                            has_speak = true;
                            tmpl(s->text);
                        } else if (const auto* f = std::get_if<FireEventAction>(&a.node)) {
                            uses_fire_event = true;
                            expr(f->uri);
                            expr(f->message);
                        } else if (const auto* c = std::get_if<RESTCallAction>(&a.node)) {
                            call(c->call);
                        } else if (const auto* sg = std::get_if<SetGSlotAction>(&a.node)) {
                            has_slot_sets = true;
                            expr(sg->value);
                        } else if (const auto* sf = std::get_if<SetFSlotAction>(&a.node)) {
                            has_slot_sets = true;
                            expr(sf->value);
                        }
                    }
                }
            }
        }
    }
};

std::string group_action_name(const Dialogue& d, const ActionGroup& g) {
    return "action_" + snake(d.name) + "_" + snake(g.name);
}

bool form_has_hri(const Form& f) {
    for (const auto& s : f.slots)
        if (std::holds_alternative<HRISource>(s.source)) return true;
    return false;
}

// Slots whose sources issue the same request (same service and parameters,
// only the response path differs) are filled together by one action class
// making one call.
struct FillGroup {
    std::string action;
    const ServiceCall* call = nullptr;
    std::vector<const FormSlot*> slots;
};

struct Emitter {
    const Model& m;
    const ModelFacts& facts;
    std::ostringstream out;

    std::string take() {
        std::string s = out.str();
        out.str("");
        return s;
    }

    std::string call_signature(const ServiceCall& call) {
        std::string sig = call.service;
        auto add = [&](const char* tag, const std::vector<ServiceParam>& params) {
            sig += "|";
            sig += tag;
            for (const auto& p : params) sig += ";" + p.key + "=" + py_expr(p.value);
        };
        add("q", call.query_params);
        add("p", call.path_params);
        add("h", call.header_params);
        add("b", call.body_params);
        return sig;
    }

    std::vector<FillGroup> fill_groups(const Dialogue& d, const Form& f) {
        std::vector<FillGroup> groups;
        std::vector<std::string> signatures;
        for (const auto& slot : f.slots) {
            const auto* src = std::get_if<EServiceSource>(&slot.source);
            if (!src) continue;
            std::string sig = call_signature(src->call);
            bool merged = false;
            for (size_t i = 0; i < groups.size(); ++i)
                if (signatures[i] == sig) {
                    groups[i].slots.push_back(&slot);
                    merged = true;
                    break;
                }
            if (merged) continue;
            FillGroup group;
            group.action = "action_fill_" + snake(d.name) + "_" + snake(f.name) + "_" +
                           snake(slot.name);
            group.call = &src->call;
            group.slots.push_back(&slot);
            groups.push_back(std::move(group));
            signatures.push_back(std::move(sig));
        }
        return groups;
    }

    std::string fill_action_for_slot(const Dialogue& d, const Form& f, const FormSlot& slot) {
        for (const auto& group : fill_groups(d, f))
            for (const auto* s : group.slots)
                if (s == &slot) return group.action;
        return {};
    }

    // ---- config.yml --------------------------------------------------------

    std::string config_yml() {
        out << "recipe: default.v1\n";
        out << "language: en\n";
        out << "pipeline:\n";
        out << "- name: WhitespaceTokenizer\n";
        if (!facts.categories.empty()) {
            out << "- name: SpacyNLP\n";
            out << "  model: en_core_web_md\n";
            out << "- name: SpacyEntityExtractor\n";
            out << "  dimensions: [";
            bool first = true;
            for (auto c : facts.categories) {
                if (!first) out << ", ";
                first = false;
                out << category_name(c);
            }
            out << "]\n";
        }
        out << "- name: RegexFeaturizer\n";
        out << "- name: CountVectorsFeaturizer\n";
        out << "- name: DIETClassifier\n";
        out << "  epochs: 100\n";
        out << "- name: EntitySynonymMapper\n";
        out << "policies:\n";
        out << "- name: RulePolicy\n";
        return take();
    }

    // ---- domain.yml --------------------------------------------------------

    void emit_slot_mapping(const Dialogue& d, const Form& f, const FormSlot& slot) {
        if (const auto* hri = std::get_if<HRISource>(&slot.source)) {
            if (std::holds_alternative<FromText>(hri->extraction)) {
                out << "    - type: from_text\n";
            } else if (const auto* fe = std::get_if<FromEntity>(&hri->extraction)) {
                out << "    - type: from_entity\n";
                if (const auto* pe = std::get_if<PretrainedEntityRef>(&fe->entity))
                    out << "      entity: " << category_name(pe->category) << "\n";
                else
                    out << "      entity: " << std::get<std::string>(fe->entity) << "\n";
            } else {
                for (const auto& mapping : std::get<FromIntent>(hri->extraction).mappings) {
                    out << "    - type: from_intent\n";
                    out << "      intent: " << mapping.intent << "\n";
                    out << "      value: " << yaml_literal(mapping.value) << "\n";
                }
            }
        } else {
            out << "    - type: custom\n";
            out << "      action: " << fill_action_for_slot(d, f, slot) << "\n";
        }
    }

    std::string domain_yml() {
        out << "version: \"3.1\"\n";

        out << "intents:\n";
        for (const auto& t : m.triggers) out << "- " << t.name() << "\n";

        std::vector<std::string> entity_names;
        for (const auto& e : m.entities) entity_names.push_back(e.name);
        for (auto c : facts.categories) entity_names.push_back(category_name(c));
        if (!entity_names.empty()) {
            out << "entities:\n";
            for (const auto& name : entity_names) out << "- " << name << "\n";
        }

        // Slots: gslots first, then form slots in model order, deduplicated
        // by plain slot name (first declaration wins).
        std::set<std::string> seen_slots;
        std::ostringstream slots;
        for (const auto& g : m.gslots) {
            if (!seen_slots.insert(g.name).second) continue;
            slots << "  " << g.name << ":\n";
            slots << "    type: " << rasa_slot_type(g.type) << "\n";
            if (g.default_value) slots << "    initial_value: " << yaml_literal(*g.default_value) << "\n";
            slots << "    influence_conversation: false\n";
            slots << "    mappings:\n";
            slots << "    - type: custom\n";
        }
        for (const auto& d : m.dialogues)
            for (const auto& r : d.responses) {
                if (!r.is_form()) continue;
                const auto& form = std::get<Form>(r.node);
                for (const auto& slot : form.slots) {
                    if (!seen_slots.insert(slot.name).second) continue;
                    slots << "  " << slot.name << ":\n";
                    slots << "    type: " << rasa_slot_type(slot.type) << "\n";
                    slots << "    influence_conversation: false\n";
                    slots << "    mappings:\n";
                    std::swap(out, slots);
                    emit_slot_mapping(d, form, slot);
                    std::swap(out, slots);
                }
            }
        std::string slot_body = slots.str();
        if (!slot_body.empty()) out << "slots:\n" << slot_body;

        // Forms list their HRI slots as required; service-filled slots run
        // through custom actions instead.
        std::set<std::string> seen_forms;
        std::ostringstream forms;
        for (const auto& d : m.dialogues)
            for (const auto& r : d.responses) {
                if (!r.is_form()) continue;
                const auto& form = std::get<Form>(r.node);
                if (!seen_forms.insert(form.name).second) continue;
                forms << "  " << form.name << ":\n";
                std::vector<const FormSlot*> hri_slots;
                for (const auto& slot : form.slots)
                    if (std::holds_alternative<HRISource>(slot.source)) hri_slots.push_back(&slot);
                if (hri_slots.empty()) {
                    forms << "    required_slots: []\n";
                } else {
                    forms << "    required_slots:\n";
                    for (const auto* slot : hri_slots) forms << "    - " << slot->name << "\n";
                }
            }
        std::string form_body = forms.str();
        if (!form_body.empty()) out << "forms:\n" << form_body;

        // utter_ask_<form>_<slot> responses carry the HRI ask texts.
        std::set<std::string> seen_asks;
        std::ostringstream asks;
        for (const auto& d : m.dialogues)
            for (const auto& r : d.responses) {
                if (!r.is_form()) continue;
                const auto& form = std::get<Form>(r.node);
                for (const auto& slot : form.slots) {
                    const auto* hri = std::get_if<HRISource>(&slot.source);
                    if (!hri) continue;
                    std::string key = "utter_ask_" + form.name + "_" + slot.name;
                    if (!seen_asks.insert(key).second) continue;
                    asks << "  " << key << ":\n";
                    asks << "  - text: " << yaml_quote(ask_text(hri->ask)) << "\n";
                }
            }
        std::string ask_body = asks.str();
        if (!ask_body.empty()) out << "responses:\n" << ask_body;

        out << "actions:\n";
        for (const auto& name : action_names()) out << "- " << name << "\n";
        return take();
    }

    // Ask texts are static in the domain file: expressions interpolate at
    // action-server level, so here they render as slot placeholders.
    std::string ask_text(const TemplateString& t) {
        std::string text;
        for (size_t i = 0; i < t.parts.size(); ++i) {
            if (i) text += ' ';
            if (const auto* s = std::get_if<std::string>(&t.parts[i].node)) {
                text += *s;
            } else {
                const auto& e = std::get<ValueExpr>(t.parts[i].node);
                if (const auto* f = std::get_if<FormSlotRef>(&e.node))
                    text += "{" + f->slot + "}";
                else if (const auto* g = std::get_if<GSlotRef>(&e.node))
                    text += "{" + g->name + "}";
                else if (const auto* lit = std::get_if<Literal>(&e.node))
                    text += std::holds_alternative<std::string>(*lit) ? std::get<std::string>(*lit)
                                                                      : yaml_literal(*lit);
                else
                    text += "{}";
            }
        }
        return text;
    }

    std::vector<std::string> action_names() {
        std::vector<std::string> names;
        for (const auto& d : m.dialogues)
            for (const auto& r : d.responses) {
                if (r.is_form()) {
                    for (const auto& group : fill_groups(d, std::get<Form>(r.node)))
                        names.push_back(group.action);
                } else {
                    names.push_back(group_action_name(d, std::get<ActionGroup>(r.node)));
                }
            }
        return names;
    }

    // ---- endpoints / credentials / stories ----------------------------------

    std::string endpoints_yml() {
        out << "action_endpoint:\n";
        out << "  url: http://localhost:5055/webhook\n";
        return take();
    }

    std::string credentials_yml() {
        out << "rest:\n";
        out << "rasa:\n";
        out << "  url: http://localhost:5002/api\n";
        return take();
    }

    std::string stories_yml() {
        out << "version: \"3.1\"\n";
        out << "stories: []\n";
        return take();
    }

    // ---- data/nlu.yml --------------------------------------------------------

    std::string nlu_example_line(const PhraseExample& ex) {
        std::string line;
        for (size_t i = 0; i < ex.chunks.size(); ++i) {
            if (i) line += ' ';
            const auto& node = ex.chunks[i].node;
            if (const auto* t = std::get_if<TextChunk>(&node)) {
                line += t->text;
            } else if (const auto* pe = std::get_if<PretrainedEntityChunk>(&node)) {
                std::string sample = pe->ref.sample_values.empty()
                                         ? default_sample(pe->ref.category)
                                         : pe->ref.sample_values.front();
                line += "[" + sample + "](" + category_name(pe->ref.category) + ")";
            } else if (const auto* te = std::get_if<TrainableEntityChunk>(&node)) {
                std::string sample = te->entity;
                for (const auto& e : m.entities)
                    if (e.name == te->entity && !e.examples.empty()) sample = e.examples.front();
                line += "[" + sample + "](" + te->entity + ")";
            } else {
                const auto& sy = std::get<SynonymChunk>(node);
                std::string word = sy.synonym;
                for (const auto& s : m.synonyms)
                    if (s.name == sy.synonym && !s.words.empty()) word = s.words.front();
                line += word;
            }
        }
        return line;
    }

    std::string nlu_yml() {
        out << "version: \"3.1\"\n";
        out << "nlu:\n";
        for (const auto& t : m.triggers) {
            const auto* intent = std::get_if<IntentTrigger>(&t.node);
            if (!intent) continue;
            out << "- intent: " << intent->name << "\n";
            out << "  examples: |\n";
            for (const auto& ex : intent->examples) out << "    - " << nlu_example_line(ex) << "\n";
        }
        for (const auto& e : m.entities) {
            out << "- lookup: " << e.name << "\n";
            out << "  examples: |\n";
            for (const auto& sample : e.examples) out << "    - " << sample << "\n";
        }
        for (const auto& s : m.synonyms) {
            out << "- synonym: " << s.name << "\n";
            out << "  examples: |\n";
            for (const auto& w : s.words) out << "    - " << w << "\n";
        }
        return take();
    }

    // ---- data/rules.yml --------------------------------------------------------

    std::string rules_yml() {
        out << "version: \"3.1\"\n";
        out << "rules:\n";
        for (const auto& d : m.dialogues) {
            // The response chain splits at every HRI form: the form suspends
            // the rule until its slots are filled, then a follow-up rule
            // conditioned on the active loop picks the chain back up. The
            // first segment repeats once per trigger.
            struct Segment {
                std::string condition_loop;  // empty for the opening segment
                std::vector<std::string> steps;
            };
            std::vector<Segment> segments{{std::string{}, {}}};
            for (const auto& r : d.responses) {
                if (r.is_form()) {
                    const auto& form = std::get<Form>(r.node);
                    if (form_has_hri(form)) {
                        segments.back().steps.push_back("- action: " + form.name);
                        segments.back().steps.push_back("- active_loop: " + form.name);
                        segments.push_back({form.name, {}});
                    }
                    for (const auto& group : fill_groups(d, form))
                        segments.back().steps.push_back("- action: " + group.action);
                } else {
                    segments.back().steps.push_back(
                        "- action: " + group_action_name(d, std::get<ActionGroup>(r.node)));
                }
            }
            for (size_t t = 0; t < d.on.size(); ++t) {
                out << "- rule: " << d.name;
                if (t > 0) out << " via " << d.on[t];
                out << "\n";
                out << "  steps:\n";
                out << "  - intent: " << d.on[t] << "\n";
                for (const auto& step : segments.front().steps) out << "  " << step << "\n";
            }
            for (size_t s = 1; s < segments.size(); ++s) {
                out << "- rule: " << d.name << " continued " << s << "\n";
                out << "  condition:\n";
                out << "  - active_loop: " << segments[s].condition_loop << "\n";
                out << "  steps:\n";
                out << "  - action: " << segments[s].condition_loop << "\n";
                out << "  - active_loop: null\n";
                for (const auto& step : segments[s].steps) out << "  " << step << "\n";
            }
        }
        return take();
    }

    // ---- actions/actions.py ------------------------------------------------

    std::string py_expr(const ValueExpr& e) {
        if (const auto* lit = std::get_if<Literal>(&e.node)) {
            switch (literal_type(*lit)) {
                case SlotType::Str: return py_quote(std::get<std::string>(*lit));
                case SlotType::Int: return std::to_string(std::get<long long>(*lit));
                case SlotType::Float: return number_text(std::get<double>(*lit));
                case SlotType::Bool: return std::get<bool>(*lit) ? "True" : "False";
            }
        }
        if (const auto* f = std::get_if<FormSlotRef>(&e.node))
            return "tracker.get_slot(" + py_quote(f->slot) + ")";
        if (const auto* g = std::get_if<GSlotRef>(&e.node))
            return "tracker.get_slot(" + py_quote(g->name) + ")";
        if (const auto* u = std::get_if<UserProp>(&e.node))
            return std::string("user_property(\"") + user_prop_name(*u) + "\")";
        return std::string("system_property(\"") + system_prop_name(std::get<SystemProp>(e.node)) +
               "\")";
    }

    void py_params(const char* var, const std::vector<ServiceParam>& params) {
        if (params.empty()) return;
        out << "        " << var << " = {\n";
        for (const auto& p : params)
            out << "            " << py_quote(p.key) << ": " << py_expr(p.value) << ",\n";
        out << "        }\n";
    }

    void py_call(const ServiceCall& call) {
        py_params("query", call.query_params);
        py_params("path_params", call.path_params);
        py_params("headers", call.header_params);
        py_params("body", call.body_params);
        out << "        try:\n";
        out << "            document = call_eservice(\n";
        out << "                " << py_quote(call.service) << ",\n";
        if (!call.query_params.empty()) out << "                query=query,\n";
        if (!call.path_params.empty()) out << "                path_params=path_params,\n";
        if (!call.header_params.empty()) out << "                headers=headers,\n";
        if (!call.body_params.empty()) out << "                body=body,\n";
        out << "            )\n";
        out << "        except Exception:\n";
        out << "            dispatcher.utter_message(text=\"Sorry, I could not reach the service "
               "right now.\")\n";
        out << "            return []\n";
    }

    void py_run_signature() {
        out << "    def run(\n";
        out << "        self,\n";
        out << "        dispatcher: CollectingDispatcher,\n";
        out << "        tracker: Tracker,\n";
        out << "        domain: Dict[Text, Any],\n";
        out << "    ) -> List[Dict[Text, Any]]:\n";
    }

    void py_speak(const TemplateString& t) {
        out << "        parts = [\n";
        for (const auto& part : t.parts) {
            if (const auto* s = std::get_if<std::string>(&part.node))
                out << "            " << py_quote(*s) << ",\n";
            else
                out << "            " << py_expr(std::get<ValueExpr>(part.node)) << ",\n";
        }
        out << "        ]\n";
        out << "        dispatcher.utter_message(text=speak_text(parts))\n";
    }

    std::string actions_py() {
        out << "\"\"\"Custom actions for the generated assistant.\"\"\"\n";
        out << "from typing import Any, Dict, List, Text\n";
        out << "\n";
        if (facts.uses_time) out << "import datetime\n";
        bool uses_profile = facts.uses_user_props || facts.uses_system_props;
        if (uses_profile) out << "import json\n";
        if (uses_profile) out << "import os\n";
        if (facts.uses_random) out << "import random\n";
        if (facts.uses_services) out << "import requests\n";
        if (uses_profile || facts.uses_time || facts.uses_random || facts.uses_services)
            out << "\n";
        out << "from rasa_sdk import Action, Tracker\n";
        if (facts.has_slot_sets) out << "from rasa_sdk.events import SlotSet\n";
        out << "from rasa_sdk.executor import CollectingDispatcher\n";

        if (facts.uses_services && !m.eservices.empty()) {
            out << "\n";
            out << "ESERVICES = {\n";
            for (const auto& svc : m.eservices) {
                std::string url = svc.host;
                if (svc.port) url += ":" + std::to_string(*svc.port);
                url += svc.path;
                out << "    " << py_quote(svc.name) << ": {\n";
                out << "        \"verb\": " << py_quote(verb_name(svc.verb)) << ",\n";
                out << "        \"url\": " << py_quote(url) << ",\n";
                out << "        \"timeout\": 10,\n";
                out << "    },\n";
            }
            out << "}\n";
        }

        if (uses_profile) {
            out << "\n";
            out << "USER_PROFILE = {\n";
            out << "    \"NAME\": \"unknown\",\n";
            out << "    \"SURNAME\": \"unknown\",\n";
            out << "    \"AGE\": 0,\n";
            out << "    \"EMAIL\": \"unknown\",\n";
            out << "    \"PHONE\": \"unknown\",\n";
            out << "    \"CITY\": \"unknown\",\n";
            out << "    \"ADDRESS\": \"unknown\",\n";
            out << "}\n";
            out << "\n";
            out << "def load_profile() -> None:\n";
            out << "    path = os.environ.get(\"ASSISTANT_PROFILE\", \"\")\n";
            out << "    if not path or not os.path.exists(path):\n";
            out << "        return\n";
            out << "    with open(path, \"r\", encoding=\"utf-8\") as handle:\n";
            out << "        USER_PROFILE.update(json.load(handle))\n";
            out << "\n";
            out << "load_profile()\n";
            out << "\n";
            out << "def user_property(key: Text) -> Any:\n";
            out << "    return USER_PROFILE.get(key, \"unknown\")\n";
        }

        if (facts.uses_system_props) {
            out << "\n";
            out << "def system_property(key: Text) -> Any:\n";
            out << "    if key == \"TIME\":\n";
            out << "        return datetime.datetime.utcnow().isoformat() + \"Z\"\n";
            out << "    if key == \"LOCATION\":\n";
            out << "        return USER_PROFILE.get(\"CITY\", \"unknown\")\n";
            out << "    if key == \"RANDOM_INT\":\n";
            out << "        return random.randint(0, 100)\n";
            out << "    return random.random()\n";
        }

        if (facts.uses_services) {
            out << "\n";
            out << "def call_eservice(name, query=None, path_params=None, headers=None, "
                   "body=None):\n";
            out << "    svc = ESERVICES[name]\n";
            out << "    url = svc[\"url\"]\n";
            out << "    if path_params:\n";
            out << "        for value in path_params.values():\n";
            out << "            url = url.rstrip(\"/\") + \"/\" + str(value)\n";
            out << "    response = requests.request(\n";
            out << "        svc[\"verb\"],\n";
            out << "        url,\n";
            out << "        params=query,\n";
            out << "        headers=headers,\n";
            out << "        json=body,\n";
            out << "        timeout=svc.get(\"timeout\", 10),\n";
            out << "    )\n";
            out << "    response.raise_for_status()\n";
            out << "    return response.json()\n";
            out << "\n";
            out << "def extract_path(document, path):\n";
            out << "    value = document\n";
            out << "    for key in path.split(\".\"):\n";
            out << "        value = value[key]\n";
            out << "    return value\n";
            out << "\n";
            out << "def coerce(slot_type, value):\n";
            out << "    if value is None:\n";
            out << "        return None\n";
            out << "    if slot_type == \"int\":\n";
            out << "        return int(value)\n";
            out << "    if slot_type == \"float\":\n";
            out << "        return float(value)\n";
            out << "    if slot_type == \"bool\":\n";
            out << "        return str(value).lower() in (\"true\", \"yes\", \"1\")\n";
            out << "    return str(value)\n";
        }

        if (facts.has_speak) {
            out << "\n";
            out << "def speak_text(parts: List[Any]) -> Text:\n";
            out << "    return \" \".join(\" \".join(str(part) for part in parts).split())\n";
        }

        if (facts.uses_fire_event) {
            out << "\n";
            out << "def fire_event(uri: Any, message: Any) -> None:\n";
            out << "    print(\"[event]\", uri, message)\n";
        }

        for (const auto& d : m.dialogues) {
            for (const auto& r : d.responses) {
                if (r.is_form()) {
                    const auto& form = std::get<Form>(r.node);
                    for (const auto& group : fill_groups(d, form)) {
                        out << "\n";
                        out << "class " << camel(group.action) << "(Action):\n";
                        out << "    \"\"\"Fill form '" << form.name << "' from eservice '"
                            << group.call->service << "'.\"\"\"\n";
                        out << "\n";
                        out << "    def name(self) -> Text:\n";
                        out << "        return " << py_quote(group.action) << "\n";
                        out << "\n";
                        py_run_signature();
                        py_call(*group.call);
                        out << "        return [\n";
                        for (const auto* slot : group.slots) {
                            const auto& call = std::get<EServiceSource>(slot->source).call;
                            std::string path;
                            for (size_t i = 0; i < call.response_path.size(); ++i) {
                                if (i) path += '.';
                                path += call.response_path[i];
                            }
                            out << "            SlotSet(" << py_quote(slot->name) << ", coerce("
                                << py_quote(slot_type_name(slot->type)) << ", extract_path(document, "
                                << py_quote(path) << "))),\n";
                        }
                        out << "        ]\n";
                    }
                } else {
                    const auto& group = std::get<ActionGroup>(r.node);
                    std::string action = group_action_name(d, group);
                    out << "\n";
                    out << "class " << camel(action) << "(Action):\n";
                    out << "    \"\"\"Run action group '" << group.name << "'.\"\"\"\n";
                    out << "\n";
                    out << "    def name(self) -> Text:\n";
                    out << "        return " << py_quote(action) << "\n";
                    out << "\n";
                    py_run_signature();
                    bool makes_events = false;
                    for (const auto& a : group.actions)
                        if (std::holds_alternative<SetGSlotAction>(a.node) ||
                            std::holds_alternative<SetFSlotAction>(a.node))
                            makes_events = true;
                    if (makes_events) out << "        events: List[Dict[Text, Any]] = []\n";
                    for (const auto& a : group.actions) {
                        if (const auto* s = std::get_if<SpeakAction>(&a.node)) {
                            py_speak(s->text);
                        } else if (const auto* f = std::get_if<FireEventAction>(&a.node)) {
                            out << "        fire_event(" << py_expr(f->uri) << ", "
                                << py_expr(f->message) << ")\n";
                        } else if (const auto* c = std::get_if<RESTCallAction>(&a.node)) {
                            py_call(c->call);
                        } else if (const auto* sg = std::get_if<SetGSlotAction>(&a.node)) {
                            out << "        events.append(SlotSet(" << py_quote(sg->gslot) << ", "
                                << py_expr(sg->value) << "))\n";
                        } else if (const auto* sf = std::get_if<SetFSlotAction>(&a.node)) {
                            out << "        events.append(SlotSet(" << py_quote(sf->slot) << ", "
                                << py_expr(sf->value) << "))\n";
                        }
                    }
                    out << "        return " << (makes_events ? "events" : "[]") << "\n";
                }
            }
        }
        return take();
    }
};

} // namespace

GeneratedProject generate(const Model& model) {
    ValidationReport report = validate(model);
    if (!report.valid) {
        std::string first;
        for (const auto& d : report.diagnostics)
            if (d.severity == Severity::Error) {
                first = format_diagnostic(d);
                break;
            }
        throw InvalidModelError("model has validation errors; first: " + first);
    }

    ModelFacts facts(model);
    Emitter e{model, facts};
    GeneratedProject project;
    project.files.emplace_back("config.yml", e.config_yml());
    project.files.emplace_back("domain.yml", e.domain_yml());
    project.files.emplace_back("endpoints.yml", e.endpoints_yml());
    project.files.emplace_back("credentials.yml", e.credentials_yml());
    project.files.emplace_back("data/nlu.yml", e.nlu_yml());
    project.files.emplace_back("data/rules.yml", e.rules_yml());
    project.files.emplace_back("data/stories.yml", e.stories_yml());
    project.files.emplace_back("actions/actions.py", e.actions_py());
    return project;
}

std::vector<std::string> write_project(const GeneratedProject& project, const std::string& dir,
                                       bool force) {
    fs::path root(dir);
    std::error_code ec;
    fs::create_directories(root, ec);
    if (ec) throw WriteFailure(dir, ec.message());

    if (!force) {
        for (const auto& [rel, content] : project.files) {
            (void)content;
            fs::path target = root / rel;
            if (fs::exists(target)) throw OverwriteRefused(target.string());
        }
    }

    std::vector<std::string> written;
    for (const auto& [rel, content] : project.files) {
        fs::path target = root / rel;
        fs::create_directories(target.parent_path(), ec);
        if (ec) throw WriteFailure(target.parent_path().string(), ec.message());
        std::ofstream file(target, std::ios::binary | std::ios::trunc);
        if (!file) throw WriteFailure(target.string(), "cannot open for writing");
        file << content;
        if (!file.good()) throw WriteFailure(target.string(), "write failed");
        written.push_back(target.string());
    }
    return written;
}

} // namespace dflow
