#include "dflow/printer.hpp"

#include <charconv>
#include <sstream>

namespace dflow {

namespace {

std::string quoted(const std::string& s, char quote) {
    std::string out;
    out.push_back(quote);
    for (char c : s) {
        if (c == quote || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    out.push_back(quote);
    return out;
}

std::string dquoted(const std::string& s) { return quoted(s, '"'); }
std::string squoted(const std::string& s) { return quoted(s, '\''); }

std::string float_text(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    std::string s(buf, ptr);
    // keep the token re-lexable as a float
    if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
        s.find("inf") == std::string::npos && s.find("nan") == std::string::npos)
        s += ".0";
    return s;
}

std::string literal_text(const Literal& v) {
    switch (literal_type(v)) {
        case SlotType::Str: return squoted(std::get<std::string>(v));
        case SlotType::Int: return std::to_string(std::get<long long>(v));
        case SlotType::Float: return float_text(std::get<double>(v));
        case SlotType::Bool: return std::get<bool>(v) ? "true" : "false";
    }
    return {};
}

std::string expr_text(const ValueExpr& e) {
    if (const auto* lit = std::get_if<Literal>(&e.node)) return literal_text(*lit);
    if (const auto* f = std::get_if<FormSlotRef>(&e.node)) return f->form + "." + f->slot;
    if (const auto* g = std::get_if<GSlotRef>(&e.node)) return g->name;
    if (const auto* u = std::get_if<UserProp>(&e.node))
        return std::string("USER:") + user_prop_name(*u);
    return std::string("SYSTEM:") + system_prop_name(std::get<SystemProp>(e.node));
}

std::string template_text(const TemplateString& t) {
    std::string out;
    for (size_t i = 0; i < t.parts.size(); ++i) {
        if (i) out += ' ';
        if (const auto* text = std::get_if<std::string>(&t.parts[i].node))
            out += squoted(*text);
        else
            out += expr_text(std::get<ValueExpr>(t.parts[i].node));
    }
    return out;
}

std::string pe_ref_text(const PretrainedEntityRef& ref) {
    std::string out = std::string("PE:") + category_name(ref.category);
    if (!ref.sample_values.empty()) {
        out += '[';
        for (size_t i = 0; i < ref.sample_values.size(); ++i) {
            if (i) out += ", ";
            out += squoted(ref.sample_values[i]);
        }
        out += ']';
    }
    return out;
}

std::string example_text(const PhraseExample& ex) {
    std::string out;
    for (size_t i = 0; i < ex.chunks.size(); ++i) {
        if (i) out += ' ';
        const auto& node = ex.chunks[i].node;
        if (const auto* t = std::get_if<TextChunk>(&node)) out += dquoted(t->text);
        else if (const auto* p = std::get_if<PretrainedEntityChunk>(&node)) out += pe_ref_text(p->ref);
        else if (const auto* e = std::get_if<TrainableEntityChunk>(&node)) out += "TE:" + e->entity;
        else out += "S:" + std::get<SynonymChunk>(node).synonym;
    }
    return out;
}

std::string call_text(const ServiceCall& call) {
    std::string out = call.service + "(";
    bool first = true;
    auto group = [&](const char* name, const std::vector<ServiceParam>& params) {
        if (params.empty()) return;
        if (!first) out += ", ";
        first = false;
        out += name;
        out += "=[";
        for (size_t i = 0; i < params.size(); ++i) {
            if (i) out += ", ";
            out += params[i].key + "=" + expr_text(params[i].value);
        }
        out += ']';
    };
    group("query", call.query_params);
    group("path", call.path_params);
    group("header", call.header_params);
    group("body", call.body_params);
    out += ')';
    if (!call.response_path.empty()) {
        out += '[';
        for (size_t i = 0; i < call.response_path.size(); ++i) {
            if (i) out += '.';
            out += call.response_path[i];
        }
        out += ']';
    }
    return out;
}

std::string slot_source_text(const FormSlot& slot) {
    if (const auto* hri = std::get_if<HRISource>(&slot.source)) {
        std::string out = "HRI(" + template_text(hri->ask);
        if (const auto* fe = std::get_if<FromEntity>(&hri->extraction)) {
            out += ", [";
            if (const auto* pe = std::get_if<PretrainedEntityRef>(&fe->entity))
                out += pe_ref_text(*pe);
            else
                out += "TE:" + std::get<std::string>(fe->entity);
            out += ']';
        } else if (const auto* fi = std::get_if<FromIntent>(&hri->extraction)) {
            out += ", [";
            for (size_t i = 0; i < fi->mappings.size(); ++i) {
                if (i) out += ", ";
                out += fi->mappings[i].intent + "=" + literal_text(fi->mappings[i].value);
            }
            out += ']';
        }
        out += ')';
        return out;
    }
    return call_text(std::get<EServiceSource>(slot.source).call);
}

std::string action_text(const Action& a) {
    if (const auto* s = std::get_if<SpeakAction>(&a.node))
        return "Speak(" + template_text(s->text) + ")";
    if (const auto* f = std::get_if<FireEventAction>(&a.node))
        return "FireEvent(" + expr_text(f->uri) + ", " + expr_text(f->message) + ")";
    if (const auto* r = std::get_if<RESTCallAction>(&a.node))
        return "RESTCall(" + call_text(r->call) + ")";
    if (const auto* g = std::get_if<SetGSlotAction>(&a.node))
        return "SetGSlot(" + g->gslot + ", " + expr_text(g->value) + ")";
    const auto& fs = std::get<SetFSlotAction>(a.node);
    return "SetFSlot(" + fs.form + "." + fs.slot + ", " + expr_text(fs.value) + ")";
}

struct Printer {
    std::ostringstream out;
    int indent = 0;

    void line(const std::string& text) {
        for (int i = 0; i < indent; ++i) out << "    ";
        out << text << '\n';
    }

    template <class F>
    void block(const std::string& header, F&& body) {
        line(header);
        ++indent;
        body();
        --indent;
        line("end");
    }
};

} // namespace

std::string print(const Model& model) {
    Printer p;
    bool first_block = true;
    auto separate = [&] {
        if (!first_block) p.out << '\n';
        first_block = false;
    };

    if (!model.entities.empty()) {
        separate();
        p.block("entities", [&] {
            for (const auto& e : model.entities)
                p.block("Entity " + e.name, [&] {
                    for (size_t i = 0; i < e.examples.size(); ++i)
                        p.line(dquoted(e.examples[i]) + (i + 1 < e.examples.size() ? "," : ""));
                });
        });
    }
    if (!model.synonyms.empty()) {
        separate();
        p.block("synonyms", [&] {
            for (const auto& s : model.synonyms)
                p.block("Synonym " + s.name, [&] {
                    for (size_t i = 0; i < s.words.size(); ++i)
                        p.line(dquoted(s.words[i]) + (i + 1 < s.words.size() ? "," : ""));
                });
        });
    }
    if (!model.triggers.empty()) {
        separate();
        p.block("triggers", [&] {
            for (const auto& t : model.triggers) {
                if (const auto* intent = std::get_if<IntentTrigger>(&t.node)) {
                    p.block("Intent " + intent->name, [&] {
                        for (size_t i = 0; i < intent->examples.size(); ++i)
                            p.line(example_text(intent->examples[i]) +
                                   (i + 1 < intent->examples.size() ? "," : ""));
                    });
                } else {
                    const auto& ev = std::get<EventTrigger>(t.node);
                    p.block("Event " + ev.name, [&] { p.line("uri: " + squoted(ev.uri)); });
                }
            }
        });
    }
    if (!model.eservices.empty()) {
        separate();
        p.block("eservices", [&] {
            for (const auto& svc : model.eservices)
                p.block("EServiceHTTP " + svc.name, [&] {
                    p.line(std::string("verb: ") + verb_name(svc.verb));
                    p.line("host: " + squoted(svc.host));
                    if (svc.port) p.line("port: " + std::to_string(*svc.port));
                    p.line("path: " + squoted(svc.path));
                });
        });
    }
    if (!model.gslots.empty()) {
        separate();
        p.block("gslots", [&] {
            for (const auto& g : model.gslots) {
                std::string decl = g.name + ": " + slot_type_name(g.type);
                if (g.default_value) decl += " = " + literal_text(*g.default_value);
                p.line(decl);
            }
        });
    }
    if (!model.dialogues.empty()) {
        separate();
        p.block("dialogues", [&] {
            for (const auto& d : model.dialogues) {
                p.block("Dialogue " + d.name, [&] {
                    std::string on = "on: ";
                    for (size_t i = 0; i < d.on.size(); ++i) {
                        if (i) on += ", ";
                        on += d.on[i];
                    }
                    p.line(on);
                    p.line("responses:");
                    ++p.indent;
                    for (size_t i = 0; i < d.responses.size(); ++i) {
                        const auto& r = d.responses[i];
                        bool last = i + 1 == d.responses.size();
                        if (const auto* form = std::get_if<Form>(&r.node)) {
                            p.line("Form " + form->name);
                            ++p.indent;
                            for (const auto& slot : form->slots)
                                p.line(slot.name + ": " + slot_type_name(slot.type) + " = " +
                                       slot_source_text(slot));
                            --p.indent;
                            p.line(last ? "end" : "end,");
                        } else {
                            const auto& group = std::get<ActionGroup>(r.node);
                            p.line("ActionGroup " + group.name);
                            ++p.indent;
                            for (const auto& a : group.actions) p.line(action_text(a));
                            --p.indent;
                            p.line(last ? "end" : "end,");
                        }
                    }
                    --p.indent;
                });
            }
        });
    }
    return p.out.str();
}

int line_count(const std::string& source) {
    int count = 0;
    size_t i = 0;
    const size_t n = source.size();
    while (i <= n) {
        bool blank = true;
        char quote = 0;
        for (; i < n && source[i] != '\n'; ++i) {
            char c = source[i];
            if (quote) {
                if (c == '\\') ++i;
                else if (c == quote) quote = 0;
                if (!blank) continue;
                blank = false;
                continue;
            }
            if (c == '\'' || c == '"') {
                quote = c;
                blank = false;
            } else if (c == '/' && i + 1 < n && source[i + 1] == '/') {
                while (i < n && source[i] != '\n') ++i;
                break;
            } else if (c != ' ' && c != '\t' && c != '\r') {
                blank = false;
            }
        }
        if (!blank) ++count;
        if (i >= n) break;
        ++i;  // consume '\n'
    }
    return count;
}

} // namespace dflow
