#include "dflow/parser.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

#include "lexer.hpp"

namespace dflow {

namespace {

// Thrown after a diagnostic was recorded; caught at declaration loops.
struct ParseFail {};

const std::unordered_set<std::string> kBlockNames = {
    "entities", "synonyms", "triggers", "eservices", "gslots", "dialogues"};

const std::unordered_set<std::string> kOpeners = {
    "entities", "synonyms", "triggers", "eservices", "gslots", "dialogues",
    "Entity",   "Synonym",  "Intent",   "Event",     "EServiceHTTP",
    "Dialogue", "Form",     "ActionGroup"};

struct Parser {
    std::vector<Token> tokens;
    std::vector<Diagnostic> diags;
    size_t pos = 0;
    std::string file;

    const Token& cur() const { return tokens[pos]; }
    const Token& next() const { return tokens[pos + 1 < tokens.size() ? pos + 1 : tokens.size() - 1]; }
    bool at_eof() const { return cur().kind == Tok::Eof; }

    const Token& take() {
        const Token& t = tokens[pos];
        if (pos + 1 < tokens.size()) ++pos;
        return t;
    }

    [[noreturn]] void fail(const char* code, std::string msg, const SourceSpan& span) {
        diags.push_back({code, Severity::Error, std::move(msg), span});
        throw ParseFail{};
    }

    void report(const char* code, std::string msg, const SourceSpan& span) {
        diags.push_back({code, Severity::Error, std::move(msg), span});
    }

    std::string describe(const Token& t) const {
        switch (t.kind) {
            case Tok::Eof: return "end of input";
            case Tok::String: return "string";
            case Tok::Int:
            case Tok::Float: return "number";
            case Tok::Prefixed: return t.prefix + ":" + t.text;
            default: return "'" + t.text + "'";
        }
    }

    const Token& expect_ident(const char* what) {
        if (cur().kind != Tok::Ident)
            fail("P001", std::string("expected ") + what + ", found " + describe(cur()), cur().span);
        return take();
    }

    void expect(Tok kind, const char* what) {
        if (cur().kind != kind)
            fail("P001", std::string("expected ") + what + ", found " + describe(cur()), cur().span);
        take();
    }

    void expect_keyword(const char* kw) {
        if (!cur().is_ident(kw))
            fail("P001", std::string("expected '") + kw + "', found " + describe(cur()), cur().span);
        take();
    }

    bool accept(Tok kind) {
        if (cur().kind != kind) return false;
        take();
        return true;
    }

    void skip_commas() {
        while (accept(Tok::Comma)) {}
    }

    bool at_end_kw() const { return cur().is_ident("end"); }

    void expect_end(const char* block, const SourceSpan& open_span) {
        if (at_end_kw()) {
            take();
            return;
        }
        if (at_eof()) {
            report("P006", std::string("missing 'end' for ") + block, cur().span);
            return;
        }
        fail("P001", std::string("expected 'end' for ") + block + ", found " + describe(cur()),
             cur().span);
        (void)open_span;
    }

    // Error recovery: skip forward until `end` (left for the caller) or one
    // of the given declaration starters, at the current nesting level.
    void sync(const std::unordered_set<std::string>& starters) {
        int depth = 0;
        while (!at_eof()) {
            const Token& t = cur();
            if (t.kind == Tok::Ident) {
                if (depth == 0 && (t.text == "end" || starters.count(t.text))) return;
                if (kOpeners.count(t.text)) ++depth;
                else if (t.text == "end") --depth;
            }
            take();
        }
    }

    // ---- document ---------------------------------------------------------

    Model parse_document() {
        Model model;
        while (!at_eof()) {
            const Token& t = cur();
            if (t.kind != Tok::Ident || !kBlockNames.count(t.text)) {
                report("P003",
                       "expected a top-level block (entities, synonyms, triggers, eservices, "
                       "gslots, dialogues), found " + describe(t), t.span);
                // skip to the next recognizable top-level block
                int depth = 0;
                take();
                while (!at_eof()) {
                    const Token& u = cur();
                    if (u.kind == Tok::Ident) {
                        if (depth <= 0 && kBlockNames.count(u.text)) break;
                        if (kOpeners.count(u.text)) ++depth;
                        else if (u.text == "end") --depth;
                    }
                    take();
                }
                continue;
            }
            std::string block = t.text;
            try {
                if (block == "entities") parse_entities(model);
                else if (block == "synonyms") parse_synonyms(model);
                else if (block == "triggers") parse_triggers(model);
                else if (block == "eservices") parse_eservices(model);
                else if (block == "gslots") parse_gslots(model);
                else parse_dialogues(model);
            } catch (ParseFail&) {
                sync(kBlockNames);
                if (at_end_kw()) take();
            }
        }
        return model;
    }

    // ---- NLU blocks --------------------------------------------------------

    std::vector<std::string> parse_string_list(const char* owner, const std::string& name,
                                               const SourceSpan& span, bool unique) {
        std::vector<std::string> items;
        while (!at_end_kw() && !at_eof()) {
            if (cur().kind != Tok::String)
                fail("P001", std::string("expected string in ") + owner + " '" + name + "', found " +
                                 describe(cur()), cur().span);
            const Token& t = take();
            if (t.text.find_first_not_of(" \t") == std::string::npos)
                report("P008", std::string("empty string in ") + owner + " '" + name + "'", t.span);
            else if (unique &&
                     std::find(items.begin(), items.end(), t.text) != items.end())
                report("P010", std::string("duplicate word '") + t.text + "' in " + owner + " '" +
                                   name + "'", t.span);
            items.push_back(t.text);
            skip_commas();
        }
        if (items.empty())
            report("P008", std::string(owner) + " '" + name + "' has no examples", span);
        return items;
    }

    void parse_entities(Model& model) {
        SourceSpan open = take().span;  // 'entities'
        while (!at_end_kw() && !at_eof()) {
            try {
                expect_keyword("Entity");
                const Token& name = expect_ident("entity name");
                TrainableEntity e;
                e.name = name.text;
                e.span = name.span;
                e.examples = parse_string_list("entity", e.name, name.span, /*unique=*/false);
                expect_end("Entity", name.span);
                model.entities.push_back(std::move(e));
            } catch (ParseFail&) {
                sync({"Entity"});
            }
        }
        expect_end("entities block", open);
    }

    void parse_synonyms(Model& model) {
        SourceSpan open = take().span;
        while (!at_end_kw() && !at_eof()) {
            try {
                expect_keyword("Synonym");
                const Token& name = expect_ident("synonym name");
                Synonym s;
                s.name = name.text;
                s.span = name.span;
                s.words = parse_string_list("synonym", s.name, name.span, /*unique=*/true);
                expect_end("Synonym", name.span);
                model.synonyms.push_back(std::move(s));
            } catch (ParseFail&) {
                sync({"Synonym"});
            }
        }
        expect_end("synonyms block", open);
    }

    void parse_triggers(Model& model) {
        SourceSpan open = take().span;
        while (!at_end_kw() && !at_eof()) {
            try {
                if (cur().is_ident("Intent")) {
                    model.triggers.push_back(Trigger{parse_intent()});
                } else if (cur().is_ident("Event")) {
                    model.triggers.push_back(Trigger{parse_event()});
                } else {
                    fail("P004", "expected 'Intent' or 'Event' in triggers block, found " +
                                     describe(cur()), cur().span);
                }
            } catch (ParseFail&) {
                sync({"Intent", "Event"});
            }
        }
        expect_end("triggers block", open);
    }

    IntentTrigger parse_intent() {
        take();  // 'Intent'
        const Token& name = expect_ident("intent name");
        IntentTrigger intent;
        intent.name = name.text;
        intent.span = name.span;
        while (!at_end_kw() && !at_eof()) {
            intent.examples.push_back(parse_phrase_example());
            skip_commas();
        }
        if (intent.examples.empty())
            report("P008", "intent '" + intent.name + "' has no phrase examples", name.span);
        expect_end("Intent", name.span);
        return intent;
    }

    PhraseExample parse_phrase_example() {
        PhraseExample ex;
        ex.span = cur().span;
        while (true) {
            const Token& t = cur();
            if (t.kind == Tok::String) {
                if (t.text.empty())
                    report("P008", "empty text chunk in phrase example", t.span);
                PhraseChunk c;
                c.span = t.span;
                c.node = TextChunk{t.text};
                ex.chunks.push_back(std::move(c));
                take();
            } else if (t.kind == Tok::Prefixed) {
                ex.chunks.push_back(parse_example_chunk());
            } else {
                break;
            }
            ex.span.end_line = tokens[pos - 1].span.end_line;
            ex.span.end_col = tokens[pos - 1].span.end_col;
        }
        if (ex.chunks.empty())
            fail("P001", "expected a phrase example, found " + describe(cur()), cur().span);
        return ex;
    }

    PhraseChunk parse_example_chunk() {
        const Token& t = take();
        PhraseChunk c;
        c.span = t.span;
        if (t.prefix == "PE") {
            PretrainedEntityChunk pe;
            pe.ref = parse_pe_ref(t);
            c.node = std::move(pe);
        } else if (t.prefix == "TE") {
            c.node = TrainableEntityChunk{t.text};
        } else if (t.prefix == "S") {
            c.node = SynonymChunk{t.text};
        } else {
            fail("P001", t.prefix + ":" + t.text + " is not allowed in a phrase example", t.span);
        }
        return c;
    }

    PretrainedEntityRef parse_pe_ref(const Token& t) {
        PretrainedEntityRef ref;
        ref.span = t.span;
        auto cat = category_from(t.text);
        if (!cat)
            fail("P005", "unknown pre-trained entity category 'PE:" + t.text + "'", t.span);
        ref.category = *cat;
        if (accept(Tok::LBracket)) {
            while (cur().kind != Tok::RBracket && !at_eof()) {
                if (cur().kind != Tok::String)
                    fail("P001", "expected string sample value, found " + describe(cur()), cur().span);
                ref.sample_values.push_back(take().text);
                skip_commas();
            }
            expect(Tok::RBracket, "']'");
        }
        return ref;
    }

    EventTrigger parse_event() {
        take();  // 'Event'
        const Token& name = expect_ident("event name");
        EventTrigger ev;
        ev.name = name.text;
        ev.span = name.span;
        expect_keyword("uri");
        expect(Tok::Colon, "':'");
        if (cur().kind != Tok::String)
            fail("P001", "expected event uri string, found " + describe(cur()), cur().span);
        ev.uri = take().text;
        expect_end("Event", name.span);
        return ev;
    }

    // ---- eservices ---------------------------------------------------------

    void parse_eservices(Model& model) {
        SourceSpan open = take().span;
        while (!at_end_kw() && !at_eof()) {
            try {
                expect_keyword("EServiceHTTP");
                model.eservices.push_back(parse_eservice());
            } catch (ParseFail&) {
                sync({"EServiceHTTP"});
            }
        }
        expect_end("eservices block", open);
    }

    EServiceHTTP parse_eservice() {
        const Token& name = expect_ident("eservice name");
        EServiceHTTP svc;
        svc.name = name.text;
        svc.span = name.span;
        bool have_verb = false, have_host = false, have_path = false, have_port = false;
        while (!at_end_kw() && !at_eof()) {
            const Token& prop = expect_ident("eservice property (verb, host, path, port)");
            expect(Tok::Colon, "':'");
            if (prop.text == "verb") {
                if (have_verb) report("P010", "duplicate 'verb' property", prop.span);
                const Token& v = expect_ident("HTTP verb");
                auto verb = verb_from(v.text);
                if (!verb) fail("P009", "unknown HTTP verb '" + v.text + "'", v.span);
                svc.verb = *verb;
                have_verb = true;
            } else if (prop.text == "host") {
                if (have_host) report("P010", "duplicate 'host' property", prop.span);
                if (cur().kind != Tok::String)
                    fail("P001", "expected host string, found " + describe(cur()), cur().span);
                svc.host = take().text;
                have_host = true;
            } else if (prop.text == "path") {
                if (have_path) report("P010", "duplicate 'path' property", prop.span);
                if (cur().kind != Tok::String)
                    fail("P001", "expected path string, found " + describe(cur()), cur().span);
                svc.path = take().text;
                have_path = true;
            } else if (prop.text == "port") {
                if (have_port) report("P010", "duplicate 'port' property", prop.span);
                if (cur().kind != Tok::Int)
                    fail("P001", "expected port number, found " + describe(cur()), cur().span);
                const Token& p = take();
                if (p.int_value < 1 || p.int_value > 65535)
                    report("P009", "port out of range 1-65535: " + p.text, p.span);
                else
                    svc.port = static_cast<int>(p.int_value);
                have_port = true;
            } else {
                fail("P004", "unknown eservice property '" + prop.text + "'", prop.span);
            }
        }
        if (!have_verb) report("P008", "eservice '" + svc.name + "' is missing 'verb'", name.span);
        if (!have_host || svc.host.empty())
            report("P008", "eservice '" + svc.name + "' is missing 'host'", name.span);
        expect_end("EServiceHTTP", name.span);
        return svc;
    }

    // ---- gslots ------------------------------------------------------------

    void parse_gslots(Model& model) {
        SourceSpan open = take().span;
        while (!at_end_kw() && !at_eof()) {
            try {
                const Token& name = expect_ident("gslot name");
                GSlot g;
                g.name = name.text;
                g.span = name.span;
                expect(Tok::Colon, "':'");
                g.type = parse_slot_type();
                if (accept(Tok::Equals)) g.default_value = parse_literal();
                skip_commas();
                model.gslots.push_back(std::move(g));
            } catch (ParseFail&) {
                sync({});
            }
        }
        expect_end("gslots block", open);
    }

    SlotType parse_slot_type() {
        const Token& t = expect_ident("slot type (str, int, float, bool)");
        auto ty = slot_type_from(t.text);
        if (!ty) fail("P009", "unknown slot type '" + t.text + "'", t.span);
        return *ty;
    }

    Literal parse_literal() {
        const Token& t = cur();
        switch (t.kind) {
            case Tok::String: take(); return Literal{t.text};
            case Tok::Int: take(); return Literal{t.int_value};
            case Tok::Float: take(); return Literal{t.float_value};
            case Tok::Ident:
                if (t.text == "true") { take(); return Literal{true}; }
                if (t.text == "false") { take(); return Literal{false}; }
                [[fallthrough]];
            default:
                fail("P009", "expected literal value, found " + describe(t), t.span);
        }
    }

    // ---- dialogues ---------------------------------------------------------

    void parse_dialogues(Model& model) {
        SourceSpan open = take().span;
        while (!at_end_kw() && !at_eof()) {
            try {
                expect_keyword("Dialogue");
                model.dialogues.push_back(parse_dialogue());
            } catch (ParseFail&) {
                sync({"Dialogue"});
            }
        }
        expect_end("dialogues block", open);
    }

    Dialogue parse_dialogue() {
        const Token& name = expect_ident("dialogue name");
        Dialogue d;
        d.name = name.text;
        d.span = name.span;
        expect_keyword("on");
        expect(Tok::Colon, "':'");
        while (true) {
            const Token& t = expect_ident("trigger name");
            d.on.push_back(t.text);
            d.on_spans.push_back(t.span);
            if (!accept(Tok::Comma)) break;
            if (cur().is_ident("responses")) break;  // trailing comma
        }
        expect_keyword("responses");
        expect(Tok::Colon, "':'");
        while (!at_end_kw() && !at_eof()) {
            if (cur().is_ident("Form")) {
                take();
                d.responses.push_back(DialogueResponse{parse_form()});
            } else if (cur().is_ident("ActionGroup")) {
                take();
                d.responses.push_back(DialogueResponse{parse_action_group()});
            } else {
                fail("P004", "expected 'Form' or 'ActionGroup' in responses, found " + describe(cur()),
                     cur().span);
            }
            skip_commas();
        }
        if (d.responses.empty())
            report("P008", "dialogue '" + d.name + "' has no responses", name.span);
        expect_end("Dialogue", name.span);
        return d;
    }

    Form parse_form() {
        const Token& name = expect_ident("form name");
        Form f;
        f.name = name.text;
        f.span = name.span;
        while (!at_end_kw() && !at_eof()) {
            f.slots.push_back(parse_form_slot());
        }
        if (f.slots.empty()) report("P008", "form '" + f.name + "' has no slots", name.span);
        expect_end("Form", name.span);
        return f;
    }

    FormSlot parse_form_slot() {
        const Token& name = expect_ident("form slot name");
        FormSlot slot;
        slot.name = name.text;
        slot.span = name.span;
        expect(Tok::Colon, "':'");
        slot.type = parse_slot_type();
        expect(Tok::Equals, "'='");
        if (cur().is_ident("HRI")) {
            take();
            slot.source = parse_hri_source();
        } else if (cur().kind == Tok::Ident && next().kind == Tok::LParen) {
            slot.source = EServiceSource{parse_service_call()};
        } else {
            fail("P001", "expected HRI(...) or an eservice call, found " + describe(cur()),
                 cur().span);
        }
        skip_commas();
        return slot;
    }

    HRISource parse_hri_source() {
        expect(Tok::LParen, "'('");
        HRISource hri;
        hri.ask = parse_template(/*in_call=*/true);
        hri.extraction = FromText{};
        if (accept(Tok::Comma)) {
            expect(Tok::LBracket, "'['");
            if (cur().kind == Tok::Prefixed) {
                const Token& t = take();
                if (t.prefix == "PE") {
                    hri.extraction = FromEntity{parse_pe_ref(t)};
                } else if (t.prefix == "TE") {
                    hri.extraction = FromEntity{t.text};
                } else {
                    fail("P001", "expected PE:<category>, TE:<entity> or intent mappings", t.span);
                }
            } else if (cur().kind == Tok::Ident) {
                FromIntent fi;
                while (cur().kind == Tok::Ident && !at_eof()) {
                    FromIntent::Mapping m;
                    const Token& t = take();
                    m.intent = t.text;
                    m.span = t.span;
                    expect(Tok::Equals, "'='");
                    m.value = parse_literal();
                    fi.mappings.push_back(std::move(m));
                    skip_commas();
                }
                hri.extraction = std::move(fi);
            } else {
                fail("P001", "expected extraction specifier, found " + describe(cur()), cur().span);
            }
            expect(Tok::RBracket, "']'");
            skip_commas();
        }
        expect(Tok::RParen, "')'");
        return hri;
    }

    ServiceCall parse_service_call() {
        const Token& name = expect_ident("eservice name");
        ServiceCall call;
        call.service = name.text;
        call.span = name.span;
        expect(Tok::LParen, "'('");
        while (cur().kind != Tok::RParen && !at_eof()) {
            const Token& group = expect_ident("parameter group (query, path, header, body)");
            expect(Tok::Equals, "'='");
            expect(Tok::LBracket, "'['");
            std::vector<ServiceParam>* params = nullptr;
            if (group.text == "query") params = &call.query_params;
            else if (group.text == "path") params = &call.path_params;
            else if (group.text == "header") params = &call.header_params;
            else if (group.text == "body") params = &call.body_params;
            else fail("P004", "unknown parameter group '" + group.text + "'", group.span);
            while (cur().kind != Tok::RBracket && !at_eof()) {
                ServiceParam p;
                const Token& key = expect_ident("parameter name");
                p.key = key.text;
                expect(Tok::Equals, "'='");
                p.value = parse_value_expr();
                params->push_back(std::move(p));
                skip_commas();
            }
            expect(Tok::RBracket, "']'");
            skip_commas();
        }
        expect(Tok::RParen, "')'");
        if (accept(Tok::LBracket)) {
            while (true) {
                const Token& seg = expect_ident("response path segment");
                call.response_path.push_back(seg.text);
                if (!accept(Tok::Dot)) break;
            }
            expect(Tok::RBracket, "']'");
        }
        return call;
    }

    ActionGroup parse_action_group() {
        const Token& name = expect_ident("action group name");
        ActionGroup g;
        g.name = name.text;
        g.span = name.span;
        while (!at_end_kw() && !at_eof()) {
            g.actions.push_back(parse_action());
            skip_commas();
        }
        if (g.actions.empty())
            report("P008", "action group '" + g.name + "' has no actions", name.span);
        expect_end("ActionGroup", name.span);
        return g;
    }

    Action parse_action() {
        const Token& kw = expect_ident("action (Speak, FireEvent, RESTCall, SetGSlot, SetFSlot)");
        Action a;
        a.span = kw.span;
        if (kw.text == "Speak") {
            expect(Tok::LParen, "'('");
            SpeakAction s;
            s.text = parse_template(/*in_call=*/false);
            expect(Tok::RParen, "')'");
            a.node = std::move(s);
        } else if (kw.text == "FireEvent") {
            expect(Tok::LParen, "'('");
            FireEventAction f;
            f.uri = parse_value_expr();
            expect(Tok::Comma, "','");
            f.message = parse_value_expr();
            skip_commas();
            expect(Tok::RParen, "')'");
            a.node = std::move(f);
        } else if (kw.text == "RESTCall") {
            expect(Tok::LParen, "'('");
            RESTCallAction r;
            r.call = parse_service_call();
            skip_commas();
            expect(Tok::RParen, "')'");
            a.node = std::move(r);
        } else if (kw.text == "SetGSlot") {
            expect(Tok::LParen, "'('");
            SetGSlotAction s;
            s.gslot = expect_ident("gslot name").text;
            expect(Tok::Comma, "','");
            s.value = parse_value_expr();
            skip_commas();
            expect(Tok::RParen, "')'");
            a.node = std::move(s);
        } else if (kw.text == "SetFSlot") {
            expect(Tok::LParen, "'('");
            SetFSlotAction s;
            s.form = expect_ident("form name").text;
            expect(Tok::Dot, "'.'");
            s.slot = expect_ident("form slot name").text;
            expect(Tok::Comma, "','");
            s.value = parse_value_expr();
            skip_commas();
            expect(Tok::RParen, "')'");
            a.node = std::move(s);
        } else {
            fail("P004", "unknown action '" + kw.text + "'", kw.span);
        }
        return a;
    }

    // A template: juxtaposed quoted strings and value expressions, up to the
    // closing ')' (or the ',' separating an HRI ask from its extraction).
    TemplateString parse_template(bool in_call) {
        TemplateString t;
        t.span = cur().span;
        while (cur().kind != Tok::RParen && !(in_call && cur().kind == Tok::Comma) && !at_eof()) {
            TemplateString::Part part;
            if (cur().kind == Tok::String) {
                part.node = take().text;
            } else {
                part.node = parse_value_expr();
            }
            t.parts.push_back(std::move(part));
        }
        if (t.parts.empty())
            report("P008", "empty template", t.span);
        return t;
    }

    ValueExpr parse_value_expr() {
        ValueExpr e;
        const Token& t = cur();
        e.span = t.span;
        switch (t.kind) {
            case Tok::String:
            case Tok::Int:
            case Tok::Float:
                e.node = parse_literal();
                return e;
            case Tok::Prefixed: {
                take();
                if (t.prefix == "USER") {
                    auto p = user_prop_from(t.text);
                    if (!p) fail("P005", "unknown user property 'USER:" + t.text + "'", t.span);
                    e.node = *p;
                } else if (t.prefix == "SYSTEM") {
                    auto p = system_prop_from(t.text);
                    if (!p) fail("P005", "unknown system property 'SYSTEM:" + t.text + "'", t.span);
                    e.node = *p;
                } else {
                    fail("P001", t.prefix + ":" + t.text + " is not a value", t.span);
                }
                return e;
            }
            case Tok::Ident: {
                if (t.text == "true" || t.text == "false") {
                    e.node = parse_literal();
                    return e;
                }
                take();
                if (accept(Tok::Dot)) {
                    const Token& slot = expect_ident("form slot name");
                    e.span.end_line = slot.span.end_line;
                    e.span.end_col = slot.span.end_col;
                    e.node = FormSlotRef{t.text, slot.text};
                } else {
                    // Bare identifier: a gslot reference if such a gslot is
                    // declared, otherwise a plain string literal (resolved in
                    // a post-pass once all declarations are known).
                    e.node = GSlotRef{t.text};
                }
                return e;
            }
            default:
                fail("P001", "expected a value, found " + describe(t), t.span);
        }
    }
};

// ---- post-parse resolution --------------------------------------------------

struct PostPass {
    const Model& model;
    std::vector<Diagnostic>& diags;
    std::set<std::string> gslot_names;
    std::set<std::string> entity_names;
    std::set<std::string> synonym_names;

    PostPass(Model& m, std::vector<Diagnostic>& d) : model(m), diags(d) {
        for (const auto& g : m.gslots) gslot_names.insert(g.name);
        for (const auto& e : m.entities) entity_names.insert(e.name);
        for (const auto& s : m.synonyms) synonym_names.insert(s.name);
        run(m);
    }

    void expr(ValueExpr& e) {
        if (auto* g = std::get_if<GSlotRef>(&e.node)) {
            if (!gslot_names.count(g->name)) e.node = Literal{g->name};
        }
    }

    void tmpl(TemplateString& t) {
        for (auto& p : t.parts)
            if (auto* e = std::get_if<ValueExpr>(&p.node)) expr(*e);
    }

    void call(ServiceCall& c) {
        for (auto* group : {&c.query_params, &c.path_params, &c.header_params, &c.body_params})
            for (auto& p : *group) expr(p.value);
    }

    void run(Model& m) {
        for (auto& t : m.triggers) {
            auto* intent = std::get_if<IntentTrigger>(&t.node);
            if (!intent) continue;
            for (auto& ex : intent->examples) {
                for (auto& chunk : ex.chunks) {
                    if (auto* te = std::get_if<TrainableEntityChunk>(&chunk.node)) {
                        if (!entity_names.count(te->entity))
                            diags.push_back({"P007", Severity::Error,
                                             "unknown trainable entity 'TE:" + te->entity + "'",
                                             chunk.span});
                    } else if (auto* sy = std::get_if<SynonymChunk>(&chunk.node)) {
                        if (!synonym_names.count(sy->synonym))
                            diags.push_back({"P007", Severity::Error,
                                             "unknown synonym 'S:" + sy->synonym + "'", chunk.span});
                    }
                }
            }
        }
        for (auto& d : m.dialogues) {
            for (auto& r : d.responses) {
                if (auto* form = std::get_if<Form>(&r.node)) {
                    for (auto& slot : form->slots) {
                        if (auto* hri = std::get_if<HRISource>(&slot.source)) {
                            tmpl(hri->ask);
                            if (auto* fe = std::get_if<FromEntity>(&hri->extraction))
                                if (auto* name = std::get_if<std::string>(&fe->entity))
                                    if (!entity_names.count(*name))
                                        diags.push_back({"P007", Severity::Error,
                                                         "unknown trainable entity 'TE:" + *name + "'",
                                                         slot.span});
                        } else {
                            call(std::get<EServiceSource>(slot.source).call);
                        }
                    }
                } else {
                    for (auto& a : std::get<ActionGroup>(r.node).actions) {
                        if (auto* s = std::get_if<SpeakAction>(&a.node)) tmpl(s->text);
                        else if (auto* f = std::get_if<FireEventAction>(&a.node)) {
                            expr(f->uri);
                            expr(f->message);
                        } else if (auto* c = std::get_if<RESTCallAction>(&a.node)) call(c->call);
                        else if (auto* g = std::get_if<SetGSlotAction>(&a.node)) expr(g->value);
                        else if (auto* fs = std::get_if<SetFSlotAction>(&a.node)) expr(fs->value);
                    }
                }
            }
        }
    }
};

} // namespace

ParseResult parse(const std::string& source, const std::string& file_label) {
    std::string text = normalize_newlines(source);
    LexResult lexed = lex(text, file_label);

    Parser parser{std::move(lexed.tokens), std::move(lexed.diagnostics)};
    parser.file = file_label;
    Model model = parser.parse_document();

    ParseResult result;
    result.diagnostics = std::move(parser.diags);
    if (!has_errors(result.diagnostics)) {
        PostPass post(model, result.diagnostics);
    }
    sort_diagnostics(result.diagnostics);
    if (!has_errors(result.diagnostics)) result.model = std::move(model);
    return result;
}

} // namespace dflow
