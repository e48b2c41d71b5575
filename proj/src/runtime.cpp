#include "dflow/runtime.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace dflow {

namespace {

std::string float_render(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

bool terminal_punct(char c) { return std::strchr(".!?,;:", c) != nullptr; }

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

struct Tokens {
    std::vector<std::string> original;
    std::vector<std::string> folded;

    size_t size() const { return original.size(); }

    std::string join_original(size_t from, size_t count) const {
        std::string out;
        for (size_t i = from; i < from + count; ++i) {
            if (i > from) out += ' ';
            out += original[i];
        }
        return out;
    }
};

// Trim, collapse whitespace, strip terminal punctuation; tokenize on spaces.
Tokens tokenize(const std::string& text) {
    std::string s = text;
    while (!s.empty() &&
           (std::isspace(static_cast<unsigned char>(s.back())) || terminal_punct(s.back())))
        s.pop_back();
    Tokens toks;
    std::istringstream stream(s);
    std::string word;
    while (stream >> word) {
        toks.folded.push_back(lower(word));
        toks.original.push_back(std::move(word));
    }
    return toks;
}

std::string normalize_keep_case(const std::string& text) {
    Tokens t = tokenize(text);
    return t.join_original(0, t.size());
}

// ---- phrase-example matching -------------------------------------------------

struct PatElem {
    enum class Kind { Lit, Ent, Alt };
    Kind kind = Kind::Lit;
    std::vector<std::string> lit_tokens;                 // Lit (folded)
    std::string ent_kind;                                // Ent
    std::vector<std::vector<std::string>> alternatives;  // Alt (folded), longest first
    std::string alt_value;                               // canonical synonym value
};

std::vector<std::string> fold_tokens(const std::string& text) {
    Tokens t = tokenize(text);
    return std::move(t.folded);
}

std::vector<PatElem> build_pattern(const Model& model, const PhraseExample& ex) {
    std::vector<PatElem> pat;
    for (const auto& chunk : ex.chunks) {
        PatElem e;
        if (const auto* t = std::get_if<TextChunk>(&chunk.node)) {
            e.kind = PatElem::Kind::Lit;
            e.lit_tokens = fold_tokens(t->text);
            if (e.lit_tokens.empty()) continue;
        } else if (const auto* pe = std::get_if<PretrainedEntityChunk>(&chunk.node)) {
            e.kind = PatElem::Kind::Ent;
            e.ent_kind = category_name(pe->ref.category);
        } else if (const auto* te = std::get_if<TrainableEntityChunk>(&chunk.node)) {
            e.kind = PatElem::Kind::Ent;
            e.ent_kind = te->entity;
        } else {
            const auto& sy = std::get<SynonymChunk>(chunk.node);
            e.kind = PatElem::Kind::Alt;
            e.alt_value = sy.synonym;
            for (const auto& s : model.synonyms)
                if (s.name == sy.synonym)
                    for (const auto& w : s.words) e.alternatives.push_back(fold_tokens(w));
            if (e.alternatives.empty()) e.alternatives.push_back(fold_tokens(sy.synonym));
            std::stable_sort(e.alternatives.begin(), e.alternatives.end(),
                             [](const auto& a, const auto& b) { return a.size() > b.size(); });
        }
        pat.push_back(std::move(e));
    }
    return pat;
}

struct PatternMatcher {
    const std::vector<PatElem>& pat;
    const Tokens& toks;
    std::vector<CapturedEntity> captured;
    int literal_len = 0;

    bool lit_at(const std::vector<std::string>& lit, size_t ti) const {
        if (ti + lit.size() > toks.size()) return false;
        for (size_t i = 0; i < lit.size(); ++i)
            if (toks.folded[ti + i] != lit[i]) return false;
        return true;
    }

    static int token_chars(const std::vector<std::string>& tokens) {
        int n = 0;
        for (const auto& t : tokens) n += static_cast<int>(t.size());
        return n;
    }

    bool match(size_t ei, size_t ti) {
        if (ei == pat.size()) return ti == toks.size();
        const PatElem& e = pat[ei];
        switch (e.kind) {
            case PatElem::Kind::Lit:
                if (!lit_at(e.lit_tokens, ti)) return false;
                if (!match(ei + 1, ti + e.lit_tokens.size())) return false;
                literal_len += token_chars(e.lit_tokens);
                return true;
            case PatElem::Kind::Ent: {
                // maximal span first
                for (size_t len = toks.size() - ti; len >= 1; --len) {
                    if (!match(ei + 1, ti + len)) continue;
                    captured.insert(captured.begin(),
                                    {e.ent_kind, toks.join_original(ti, len)});
                    return true;
                }
                return false;
            }
            case PatElem::Kind::Alt:
                for (const auto& alt : e.alternatives) {
                    if (alt.empty() || !lit_at(alt, ti)) continue;
                    if (!match(ei + 1, ti + alt.size())) continue;
                    literal_len += token_chars(alt);
                    return true;
                }
                return false;
        }
        return false;
    }
};

struct ExampleMatch {
    bool matched = false;
    int literal_len = -1;
    std::vector<CapturedEntity> captured;
};

ExampleMatch match_example(const Model& model, const PhraseExample& ex, const Tokens& toks) {
    ExampleMatch result;
    std::vector<PatElem> pat = build_pattern(model, ex);
    if (pat.empty()) return result;
    PatternMatcher m{pat, toks};
    if (!m.match(0, 0)) return result;
    result.matched = true;
    result.literal_len = m.literal_len;
    result.captured = std::move(m.captured);
    return result;
}

// ---- gazetteer (deterministic NER surrogate) ---------------------------------

struct Gazetteer {
    // entity kind -> known phrases, folded, longest first
    std::map<std::string, std::vector<std::vector<std::string>>> phrases;

    void add(const std::string& kind, const std::string& phrase) {
        auto folded = fold_tokens(phrase);
        if (!folded.empty()) phrases[kind].push_back(std::move(folded));
    }

    void finish() {
        for (auto& [kind, list] : phrases)
            std::stable_sort(list.begin(), list.end(),
                             [](const auto& a, const auto& b) { return a.size() > b.size(); });
    }
};

Gazetteer build_gazetteer(const Model& model) {
    Gazetteer g;
    auto add_ref = [&](const PretrainedEntityRef& ref) {
        for (const auto& v : ref.sample_values) g.add(category_name(ref.category), v);
    };
    for (const auto& t : model.triggers) {
        const auto* intent = std::get_if<IntentTrigger>(&t.node);
        if (!intent) continue;
        for (const auto& ex : intent->examples)
            for (const auto& chunk : ex.chunks)
                if (const auto* pe = std::get_if<PretrainedEntityChunk>(&chunk.node))
                    add_ref(pe->ref);
    }
    for (const auto& d : model.dialogues)
        for (const auto& r : d.responses) {
            if (!r.is_form()) continue;
            for (const auto& slot : std::get<Form>(r.node).slots)
                if (const auto* hri = std::get_if<HRISource>(&slot.source))
                    if (const auto* fe = std::get_if<FromEntity>(&hri->extraction))
                        if (const auto* pe = std::get_if<PretrainedEntityRef>(&fe->entity))
                            add_ref(*pe);
        }
    for (const auto& e : model.entities)
        for (const auto& sample : e.examples) g.add(e.name, sample);
    g.finish();
    return g;
}

// Leftmost-longest occurrence of any known phrase of the kind.
std::optional<std::string> gazetteer_find(const Gazetteer& g, const std::string& kind,
                                          const Tokens& toks) {
    auto it = g.phrases.find(kind);
    if (it == g.phrases.end()) return std::nullopt;
    for (size_t start = 0; start < toks.size(); ++start) {
        for (const auto& phrase : it->second) {
            if (start + phrase.size() > toks.size()) continue;
            bool hit = true;
            for (size_t i = 0; i < phrase.size(); ++i)
                if (toks.folded[start + i] != phrase[i]) {
                    hit = false;
                    break;
                }
            if (hit) return toks.join_original(start, phrase.size());
        }
    }
    return std::nullopt;
}

const char* kApology = "Sorry, I could not reach the service right now.";

std::string url_encode(const std::string& s) {
    static const char* hex = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : s) {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
            out.push_back(static_cast<char>(c));
        } else {
            out.push_back('%');
            out.push_back(hex[c >> 4]);
            out.push_back(hex[c & 0xF]);
        }
    }
    return out;
}

nlohmann::json value_to_json(const Value& v) {
    switch (literal_type(v)) {
        case SlotType::Str: return std::get<std::string>(v);
        case SlotType::Int: return std::get<long long>(v);
        case SlotType::Float: return std::get<double>(v);
        case SlotType::Bool: return std::get<bool>(v);
    }
    return nullptr;
}

std::optional<Value> coerce_json_value(const nlohmann::json& j, SlotType target);

std::optional<Value> coerce_string(const std::string& text, SlotType target) {
    switch (target) {
        case SlotType::Str:
            return Value{text};
        case SlotType::Int: {
            std::string t = text;
            if (!t.empty() && t.front() == '+') t.erase(t.begin());
            long long v = 0;
            auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
            if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) return std::nullopt;
            return Value{v};
        }
        case SlotType::Float: {
            std::string t = text;
            if (!t.empty() && t.front() == '+') t.erase(t.begin());
            double v = 0;
            auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
            if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) return std::nullopt;
            return Value{v};
        }
        case SlotType::Bool: {
            std::string t = lower(text);
            if (t == "true" || t == "yes" || t == "1") return Value{true};
            if (t == "false" || t == "no" || t == "0") return Value{false};
            return std::nullopt;
        }
    }
    return std::nullopt;
}

std::optional<Value> coerce_json_value(const nlohmann::json& j, SlotType target) {
    switch (target) {
        case SlotType::Str:
            if (j.is_string()) return Value{j.get<std::string>()};
            if (j.is_number_integer()) return Value{std::to_string(j.get<long long>())};
            if (j.is_number_float()) return Value{float_render(j.get<double>())};
            if (j.is_boolean()) return Value{std::string(j.get<bool>() ? "true" : "false")};
            return std::nullopt;
        case SlotType::Int:
            if (j.is_number_integer()) return Value{j.get<long long>()};
            if (j.is_number_float()) {
                double d = j.get<double>();
                if (d == static_cast<long long>(d)) return Value{static_cast<long long>(d)};
                return std::nullopt;
            }
            if (j.is_string()) return coerce_string(j.get<std::string>(), target);
            return std::nullopt;
        case SlotType::Float:
            if (j.is_number()) return Value{j.get<double>()};
            if (j.is_string()) return coerce_string(j.get<std::string>(), target);
            return std::nullopt;
        case SlotType::Bool:
            if (j.is_boolean()) return Value{j.get<bool>()};
            if (j.is_string()) return coerce_string(j.get<std::string>(), target);
            if (j.is_number_integer()) {
                long long v = j.get<long long>();
                if (v == 0 || v == 1) return Value{v == 1};
            }
            return std::nullopt;
    }
    return std::nullopt;
}

} // namespace

std::string value_text(const Value& v) {
    switch (literal_type(v)) {
        case SlotType::Str: return std::get<std::string>(v);
        case SlotType::Int: return std::to_string(std::get<long long>(v));
        case SlotType::Float: return float_render(std::get<double>(v));
        case SlotType::Bool: return std::get<bool>(v) ? "true" : "false";
    }
    return {};
}

UserProfile UserProfile::from_json(const std::string& json_text) {
    nlohmann::json doc = nlohmann::json::parse(json_text, nullptr, /*allow_exceptions=*/false);
    if (doc.is_discarded() || !doc.is_object())
        throw std::runtime_error("profile must be a JSON object");
    UserProfile p;
    auto text = [&](const char* key) -> std::optional<std::string> {
        if (doc.contains(key) && doc[key].is_string()) return doc[key].get<std::string>();
        return std::nullopt;
    };
    p.name = text("name");
    p.surname = text("surname");
    p.email = text("email");
    p.phone = text("phone");
    p.city = text("city");
    p.address = text("address");
    if (doc.contains("age") && doc["age"].is_number_integer()) {
        long long age = doc["age"].get<long long>();
        if (age < 0) throw std::runtime_error("profile age must be non-negative");
        p.age = age;
    }
    return p;
}

UserProfile UserProfile::from_file(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw std::runtime_error("cannot open profile: " + path);
    std::ostringstream text;
    text << file.rdbuf();
    return from_json(text.str());
}

MatchResult match_trigger(const Model& model, const std::string& utterance) {
    Tokens toks = tokenize(utterance);
    MatchResult result;
    if (toks.size() == 0) return result;

    int best_score = -1;
    int best_count = 0;
    for (const auto& t : model.triggers) {
        const auto* intent = std::get_if<IntentTrigger>(&t.node);
        if (!intent) continue;
        ExampleMatch best_example;
        for (const auto& ex : intent->examples) {
            ExampleMatch m = match_example(model, ex, toks);
            if (m.matched && m.literal_len > best_example.literal_len) best_example = std::move(m);
        }
        if (best_example.literal_len < 0) continue;
        if (best_example.literal_len > best_score) {
            best_score = best_example.literal_len;
            best_count = 1;
            result.intent = intent->name;
            result.entities = std::move(best_example.captured);
        } else if (best_example.literal_len == best_score) {
            ++best_count;
        }
    }
    if (best_score < 0) return result;
    if (best_count > 1) {
        result.ambiguous = true;
        result.intent.clear();
        result.entities.clear();
        return result;
    }
    result.matched = true;
    return result;
}

std::vector<std::string> BotReply::say_texts() const {
    std::vector<std::string> out;
    for (const auto& item : items)
        if (const auto* s = std::get_if<Say>(&item)) out.push_back(s->text);
    return out;
}

bool BotReply::has_error() const {
    for (const auto& item : items)
        if (std::holds_alternative<ErrorNote>(item)) return true;
    return false;
}

// ---------------------------------------------------------------------------

DialogueSession::DialogueSession(const Model& model, ServiceEnv& env, SessionConfig config)
    : model_(model), env_(env), config_(std::move(config)) {
    if (!config_.clock)
        config_.clock = [] { return std::chrono::system_clock::now(); };
    reset();
}

void DialogueSession::reset() {
    pending_.reset();
    filled_.clear();
    gslots_.clear();
    transcript_.clear();
    rng_state_ = config_.seed ? config_.seed : 0x9E3779B97F4A7C15ull;
    for (const auto& g : model_.gslots) {
        Value v;
        switch (g.type) {
            case SlotType::Str: v = std::string{}; break;
            case SlotType::Int: v = 0LL; break;
            case SlotType::Float: v = 0.0; break;
            case SlotType::Bool: v = false; break;
        }
        if (g.default_value) {
            if (g.type == SlotType::Float && literal_type(*g.default_value) == SlotType::Int)
                v = static_cast<double>(std::get<long long>(*g.default_value));
            else if (literal_type(*g.default_value) == g.type)
                v = *g.default_value;
        }
        gslots_[g.name] = v;
    }
}

uint64_t DialogueSession::next_random() {
    uint64_t x = rng_state_;
    x ^= x >> 12;
    x ^= x << 25;
    x ^= x >> 27;
    rng_state_ = x;
    return x * 0x2545F4914F6CDD1Dull;
}

std::string DialogueSession::format_time(std::chrono::system_clock::time_point tp) {
    std::time_t t = std::chrono::system_clock::to_time_t(tp);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

Value DialogueSession::system_property(SystemProp prop) {
    switch (prop) {
        case SystemProp::Time: return Value{format_time(config_.clock())};
        case SystemProp::Location:
            return Value{config_.profile.city ? *config_.profile.city : std::string("unknown")};
        case SystemProp::RandomInt: return Value{static_cast<long long>(next_random() % 101)};
        case SystemProp::RandomFloat:
            return Value{static_cast<double>(next_random() >> 11) / 9007199254740992.0};
    }
    return Value{std::string{}};
}

Value DialogueSession::user_property(UserProp prop) const {
    const UserProfile& p = config_.profile;
    auto text = [](const std::optional<std::string>& v) {
        return Value{v ? *v : std::string("unknown")};
    };
    switch (prop) {
        case UserProp::Name: return text(p.name);
        case UserProp::Surname: return text(p.surname);
        case UserProp::Age: return p.age ? Value{*p.age} : Value{std::string("unknown")};
        case UserProp::Email: return text(p.email);
        case UserProp::Phone: return text(p.phone);
        case UserProp::City: return text(p.city);
        case UserProp::Address: return text(p.address);
    }
    return Value{std::string("unknown")};
}

Value DialogueSession::resolve(const ValueExpr& expr, int) {
    if (const auto* lit = std::get_if<Literal>(&expr.node)) return *lit;
    if (const auto* f = std::get_if<FormSlotRef>(&expr.node)) {
        auto it = filled_.find({f->form, f->slot});
        return it != filled_.end() ? it->second : Value{std::string{}};
    }
    if (const auto* g = std::get_if<GSlotRef>(&expr.node)) {
        auto it = gslots_.find(g->name);
        return it != gslots_.end() ? it->second : Value{std::string{}};
    }
    if (const auto* u = std::get_if<UserProp>(&expr.node)) return user_property(*u);
    return system_property(std::get<SystemProp>(expr.node));
}

// Parts render individually and join with single spaces; whitespace runs
// collapse so adjacent literal spacing stays readable.
std::string DialogueSession::render_template(const TemplateString& t, int dialogue_index) {
    std::string joined;
    for (const auto& part : t.parts) {
        if (!joined.empty()) joined += ' ';
        if (const auto* text = std::get_if<std::string>(&part.node))
            joined += *text;
        else
            joined += value_text(resolve(std::get<ValueExpr>(part.node), dialogue_index));
    }
    std::string out;
    bool in_space = false;
    for (char c : joined) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            in_space = true;
            continue;
        }
        if (in_space && !out.empty()) out += ' ';
        in_space = false;
        out.push_back(c);
    }
    return out;
}

void DialogueSession::say(BotReply& reply, std::string text) {
    transcript_.push_back({"bot", text});
    reply.items.push_back(Say{std::move(text)});
}

std::optional<Value> DialogueSession::slot_value(const std::string& form,
                                                 const std::string& slot) const {
    auto it = filled_.find({form, slot});
    if (it == filled_.end()) return std::nullopt;
    return it->second;
}

std::optional<Value> DialogueSession::gslot_value(const std::string& name) const {
    auto it = gslots_.find(name);
    if (it == gslots_.end()) return std::nullopt;
    return it->second;
}

std::optional<Value> DialogueSession::coerce_text(const std::string& text, SlotType target) const {
    return coerce_string(text, target);
}

namespace {

std::string compose_service_url(const EServiceHTTP& svc, const ServiceCall& call,
                                const std::function<Value(const ValueExpr&)>& resolve) {
    std::string url = svc.host;
    if (svc.port) url += ":" + std::to_string(*svc.port);
    url += svc.path;
    for (const auto& p : call.path_params) {
        while (!url.empty() && url.back() == '/') url.pop_back();
        url += "/" + url_encode(value_text(resolve(p.value)));
    }
    if (!call.query_params.empty()) {
        url += '?';
        for (size_t i = 0; i < call.query_params.size(); ++i) {
            if (i) url += '&';
            url += url_encode(call.query_params[i].key) + "=" +
                   url_encode(value_text(resolve(call.query_params[i].value)));
        }
    }
    return url;
}

} // namespace

std::variant<Value, ServiceError> DialogueSession::call_service(const ServiceCall& call,
                                                                SlotType target_type) {
    return perform_call(call, target_type, nullptr);
}

std::variant<Value, ServiceError> DialogueSession::perform_call(const ServiceCall& call,
                                                                SlotType target_type,
                                                                std::string* url_out) {
    const EServiceHTTP* svc = nullptr;
    for (const auto& s : model_.eservices)
        if (s.name == call.service) {
            svc = &s;
            break;
        }
    if (!svc)
        return ServiceError{ServiceError::Kind::Network, call.service,
                            "eservice '" + call.service + "' is not declared"};

    auto resolver = [this](const ValueExpr& e) { return resolve(e, -1); };
    ComposedRequest req;
    req.verb = svc->verb;
    req.url = compose_service_url(*svc, call, resolver);
    if (url_out) *url_out = req.url;
    for (const auto& h : call.header_params)
        req.headers.emplace_back(h.key, value_text(resolve(h.value, -1)));
    if (!call.body_params.empty()) {
        nlohmann::json body = nlohmann::json::object();
        for (const auto& b : call.body_params) body[b.key] = value_to_json(resolve(b.value, -1));
        req.body_json = body.dump();
    }

    HttpResult res = env_.invoke(req);
    if (!res.transport_ok)
        return ServiceError{ServiceError::Kind::Network, req.url, res.error};
    if (res.status < 200 || res.status >= 300)
        return ServiceError{ServiceError::Kind::Status, req.url,
                            "HTTP status " + std::to_string(res.status)};

    if (call.response_path.empty() && target_type == SlotType::Str)
        return Value{res.body};

    nlohmann::json doc = nlohmann::json::parse(res.body, nullptr, /*allow_exceptions=*/false);
    if (doc.is_discarded())
        return ServiceError{ServiceError::Kind::MissingKey, req.url, "response is not valid JSON"};
    for (const auto& key : call.response_path) {
        if (!doc.is_object() || !doc.contains(key))
            return ServiceError{ServiceError::Kind::MissingKey, req.url,
                                "response has no key '" + key + "'"};
        doc = doc[key];
    }
    auto value = coerce_json_value(doc, target_type);
    if (!value)
        return ServiceError{ServiceError::Kind::Coercion, req.url,
                            std::string("cannot coerce response value to ") +
                                slot_type_name(target_type)};
    return *value;
}

bool DialogueSession::fill_service_slot(BotReply& reply, int dialogue_index, const Form& form,
                                        const FormSlot& slot) {
    const auto& call = std::get<EServiceSource>(slot.source).call;
    std::string url;
    auto result = perform_call(call, slot.type, &url);
    reply.items.push_back(ServiceInvoked{call.service, url});
    if (const auto* err = std::get_if<ServiceError>(&result)) {
        say(reply, kApology);
        reply.items.push_back(ErrorNote{"service call failed (" + err->url + "): " + err->detail});
        (void)dialogue_index;
        return false;
    }
    filled_[{form.name, slot.name}] = std::get<Value>(result);
    return true;
}

void DialogueSession::execute_group(BotReply& reply, int dialogue_index, const ActionGroup& group) {
    for (const auto& a : group.actions) {
        if (const auto* s = std::get_if<SpeakAction>(&a.node)) {
            say(reply, render_template(s->text, dialogue_index));
        } else if (const auto* f = std::get_if<FireEventAction>(&a.node)) {
            reply.items.push_back(EventFired{value_text(resolve(f->uri, dialogue_index)),
                                             value_text(resolve(f->message, dialogue_index))});
        } else if (const auto* c = std::get_if<RESTCallAction>(&a.node)) {
            std::string url;
            auto result = perform_call(c->call, SlotType::Str, &url);
            reply.items.push_back(ServiceInvoked{c->call.service, url});
            if (const auto* err = std::get_if<ServiceError>(&result)) {
                say(reply, kApology);
                reply.items.push_back(
                    ErrorNote{"service call failed (" + err->url + "): " + err->detail});
            }
        } else if (const auto* sg = std::get_if<SetGSlotAction>(&a.node)) {
            auto target = gslots_.find(sg->gslot);
            if (target == gslots_.end()) continue;
            SlotType type = SlotType::Str;
            for (const auto& g : model_.gslots)
                if (g.name == sg->gslot) type = g.type;
            Value v = resolve(sg->value, dialogue_index);
            if (literal_type(v) == type) {
                target->second = v;
            } else if (type == SlotType::Float && literal_type(v) == SlotType::Int) {
                target->second = static_cast<double>(std::get<long long>(v));
            } else if (auto coerced = coerce_text(value_text(v), type)) {
                target->second = *coerced;
            } else {
                reply.items.push_back(ErrorNote{"cannot store value in gslot '" + sg->gslot + "'"});
            }
        } else if (const auto* sf = std::get_if<SetFSlotAction>(&a.node)) {
            // same rule as the validator: forms of the running dialogue
            // shadow same-named forms elsewhere
            SlotType type = SlotType::Str;
            bool declared = false;
            auto scan = [&](const Dialogue& d) {
                for (const auto& r : d.responses) {
                    if (declared || !r.is_form()) continue;
                    const auto& form = std::get<Form>(r.node);
                    if (form.name != sf->form) continue;
                    for (const auto& slot : form.slots)
                        if (slot.name == sf->slot) {
                            type = slot.type;
                            declared = true;
                            break;
                        }
                }
            };
            if (dialogue_index >= 0 && dialogue_index < (int)model_.dialogues.size())
                scan(model_.dialogues[dialogue_index]);
            for (const auto& d : model_.dialogues) {
                if (declared) break;
                scan(d);
            }
            if (!declared) continue;
            Value v = resolve(sf->value, dialogue_index);
            if (literal_type(v) == type) {
                filled_[{sf->form, sf->slot}] = v;
            } else if (type == SlotType::Float && literal_type(v) == SlotType::Int) {
                filled_[{sf->form, sf->slot}] = static_cast<double>(std::get<long long>(v));
            } else if (auto coerced = coerce_text(value_text(v), type)) {
                filled_[{sf->form, sf->slot}] = *coerced;
            } else {
                reply.items.push_back(
                    ErrorNote{"cannot store value in slot '" + sf->form + "." + sf->slot + "'"});
            }
        }
    }
}

void DialogueSession::run_responses(BotReply& reply, int dialogue_index, int response_index,
                                    int slot_index) {
    const Dialogue& d = model_.dialogues[dialogue_index];
    for (size_t ri = response_index; ri < d.responses.size(); ++ri) {
        const auto& r = d.responses[ri];
        if (r.is_form()) {
            const auto& form = std::get<Form>(r.node);
            size_t start = (static_cast<int>(ri) == response_index) ? slot_index : 0;
            for (size_t si = start; si < form.slots.size(); ++si) {
                const auto& slot = form.slots[si];
                if (filled_.count({form.name, slot.name})) continue;
                if (std::holds_alternative<EServiceSource>(slot.source)) {
                    if (!fill_service_slot(reply, dialogue_index, form, slot)) {
                        pending_.reset();
                        return;  // abort the dialogue after the apology
                    }
                } else {
                    const auto& hri = std::get<HRISource>(slot.source);
                    say(reply, render_template(hri.ask, dialogue_index));
                    pending_ = Pending{dialogue_index, static_cast<int>(ri), static_cast<int>(si), 0};
                    return;
                }
            }
        } else {
            execute_group(reply, dialogue_index, std::get<ActionGroup>(r.node));
        }
    }
    pending_.reset();
}

void DialogueSession::start_dialogue(BotReply& reply, int dialogue_index,
                                     const std::vector<CapturedEntity>& captured) {
    // Entities captured from the trigger utterance pre-fill matching
    // FromEntity slots, so already-answered questions are not asked again.
    std::vector<bool> used(captured.size(), false);
    const Dialogue& d = model_.dialogues[dialogue_index];
    for (const auto& r : d.responses) {
        if (!r.is_form()) continue;
        const auto& form = std::get<Form>(r.node);
        for (const auto& slot : form.slots) {
            const auto* hri = std::get_if<HRISource>(&slot.source);
            if (!hri) continue;
            const auto* fe = std::get_if<FromEntity>(&hri->extraction);
            if (!fe) continue;
            std::string kind = std::holds_alternative<PretrainedEntityRef>(fe->entity)
                                   ? category_name(std::get<PretrainedEntityRef>(fe->entity).category)
                                   : std::get<std::string>(fe->entity);
            for (size_t i = 0; i < captured.size(); ++i) {
                if (used[i] || captured[i].kind != kind) continue;
                if (auto v = coerce_text(captured[i].text, slot.type)) {
                    filled_[{form.name, slot.name}] = *v;
                    used[i] = true;
                }
                break;
            }
        }
    }
    run_responses(reply, dialogue_index, 0, 0);
}

BotReply DialogueSession::handle_message(const std::string& utterance) {
    BotReply reply;
    transcript_.push_back({"user", utterance});

    if (pending_) {
        Pending p = *pending_;
        const Dialogue& d = model_.dialogues[p.dialogue];
        const auto& form = std::get<Form>(d.responses[p.response].node);
        const auto& slot = form.slots[p.slot];
        const auto& hri = std::get<HRISource>(slot.source);
        Tokens toks = tokenize(utterance);

        auto reask_type = [&] {
            say(reply, std::string("Sorry, I need a ") + slot_type_name(slot.type) + " value.");
            say(reply, render_template(hri.ask, p.dialogue));
        };

        std::optional<Value> value;
        if (std::holds_alternative<FromText>(hri.extraction)) {
            value = coerce_text(normalize_keep_case(utterance), slot.type);
            if (!value) {
                reask_type();
                return reply;
            }
        } else if (const auto* fe = std::get_if<FromEntity>(&hri.extraction)) {
            Gazetteer gaz = build_gazetteer(model_);
            std::string kind = std::holds_alternative<PretrainedEntityRef>(fe->entity)
                                   ? category_name(std::get<PretrainedEntityRef>(fe->entity).category)
                                   : std::get<std::string>(fe->entity);
            auto found = gazetteer_find(gaz, kind, toks);
            if (found) {
                value = coerce_text(*found, slot.type);
                if (!value) {
                    reask_type();
                    return reply;
                }
            } else if (p.reasks == 0) {
                pending_->reasks = 1;
                say(reply, "Sorry, I didn't catch that.");
                say(reply, render_template(hri.ask, p.dialogue));
                return reply;
            } else {
                value = coerce_text(normalize_keep_case(utterance), slot.type);
                if (!value) {
                    reask_type();
                    return reply;
                }
            }
        } else {
            const auto& fi = std::get<FromIntent>(hri.extraction);
            int best = -1;
            const Literal* mapped = nullptr;
            for (const auto& mapping : fi.mappings) {
                for (const auto& t : model_.triggers) {
                    const auto* intent = std::get_if<IntentTrigger>(&t.node);
                    if (!intent || intent->name != mapping.intent) continue;
                    for (const auto& ex : intent->examples) {
                        ExampleMatch m = match_example(model_, ex, toks);
                        if (m.matched && m.literal_len > best) {
                            best = m.literal_len;
                            mapped = &mapping.value;
                        }
                    }
                }
            }
            if (!mapped) {
                say(reply, "Sorry, I didn't catch that.");
                say(reply, render_template(hri.ask, p.dialogue));
                return reply;
            }
            value = *mapped;
            if (literal_type(*mapped) != slot.type) {
                if (slot.type == SlotType::Float && literal_type(*mapped) == SlotType::Int)
                    value = Value{static_cast<double>(std::get<long long>(*mapped))};
                else if (auto coerced = coerce_text(value_text(*mapped), slot.type))
                    value = *coerced;
            }
        }

        filled_[{form.name, slot.name}] = *value;
        pending_.reset();
        run_responses(reply, p.dialogue, p.response, p.slot + 1);
        return reply;
    }

    MatchResult m = match_trigger(model_, utterance);
    if (!m.matched) {
        say(reply, config_.fallback);
        return reply;
    }
    for (size_t di = 0; di < model_.dialogues.size(); ++di) {
        const auto& d = model_.dialogues[di];
        if (std::find(d.on.begin(), d.on.end(), m.intent) != d.on.end()) {
            start_dialogue(reply, static_cast<int>(di), m.entities);
            return reply;
        }
    }
    say(reply, config_.fallback);
    return reply;
}

BotReply DialogueSession::inject_event(const std::string& event_name) {
    BotReply reply;
    transcript_.push_back({"event", event_name});
    for (const auto& t : model_.triggers) {
        if (t.is_intent() || t.name() != event_name) continue;
        for (size_t di = 0; di < model_.dialogues.size(); ++di) {
            const auto& d = model_.dialogues[di];
            if (std::find(d.on.begin(), d.on.end(), event_name) != d.on.end()) {
                start_dialogue(reply, static_cast<int>(di), {});
                return reply;
            }
        }
    }
    say(reply, config_.fallback);
    return reply;
}

} // namespace dflow
