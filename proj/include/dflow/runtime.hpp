#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dflow/model.hpp"
#include "dflow/service_env.hpp"

// Deterministic in-process interpreter: a valid model runs as a dialogue
// state machine, with intent matching, form filling, service calls and
// template resolution all reproducible from (model, seed, clock, profile,
// stub table, utterance sequence).

namespace dflow {

using Value = Literal;

std::string value_text(const Value& v);

struct UserProfile {
    std::optional<std::string> name, surname, email, phone, city, address;
    std::optional<long long> age;

    static UserProfile from_json(const std::string& json_text);
    static UserProfile from_file(const std::string& path);
};

struct CapturedEntity {
    std::string kind;  // pre-trained category name or trainable entity name
    std::string text;  // original casing from the utterance
};

struct MatchResult {
    bool matched = false;
    bool ambiguous = false;  // several intents tied: reported as no-match
    std::string intent;
    std::vector<CapturedEntity> entities;
};

// Deterministic surrogate for statistical NLU. The utterance is normalized
// (lowercase, trimmed, whitespace collapsed, terminal punctuation stripped);
// an example matches when its text chunks appear literally in order and
// every entity chunk consumes a maximal non-empty token span in between.
// Of all matching intents the one with the greatest total literal length
// wins; a tie is a no-match with `ambiguous` set.
MatchResult match_trigger(const Model& model, const std::string& utterance);

struct Say {
    std::string text;
};
struct EventFired {
    std::string uri;
    std::string message;
};
struct ServiceInvoked {
    std::string service;
    std::string url;
};
struct ErrorNote {
    std::string text;
};

using ReplyItem = std::variant<Say, EventFired, ServiceInvoked, ErrorNote>;

struct BotReply {
    std::vector<ReplyItem> items;

    std::vector<std::string> say_texts() const;
    bool has_error() const;
};

struct ServiceError {
    enum class Kind { Network, Status, MissingKey, Coercion };
    Kind kind;
    std::string url;
    std::string detail;
};

struct SessionConfig {
    uint64_t seed = 0;
    std::function<std::chrono::system_clock::time_point()> clock;  // null = system clock
    UserProfile profile;
    std::string fallback = "Sorry, I didn't understand that.";
};

class DialogueSession {
public:
    DialogueSession(const Model& model, ServiceEnv& env, SessionConfig config = {});

    // One user turn. Appends to the transcript and returns everything the
    // bot did, in execution order.
    BotReply handle_message(const std::string& utterance);

    // Programmatic entry for Event triggers: starts the event's dialogue
    // exactly as a matched intent would.
    BotReply inject_event(const std::string& event_name);

    void reset();

    bool in_form() const { return pending_.has_value(); }
    const std::vector<std::pair<std::string, std::string>>& transcript() const {
        return transcript_;
    }
    std::optional<Value> slot_value(const std::string& form, const std::string& slot) const;
    std::optional<Value> gslot_value(const std::string& name) const;

    // Composes the URL, resolves parameters against session state, invokes
    // the environment and extracts + coerces the response path.
    std::variant<Value, ServiceError> call_service(const ServiceCall& call, SlotType target_type);

    Value system_property(SystemProp prop);
    Value user_property(UserProp prop) const;

    static std::string format_time(std::chrono::system_clock::time_point tp);

private:
    struct Pending {
        int dialogue = -1;
        int response = -1;
        int slot = -1;
        int reasks = 0;
    };

    const Model& model_;
    ServiceEnv& env_;
    SessionConfig config_;
    uint64_t rng_state_ = 0;
    std::optional<Pending> pending_;
    std::map<std::pair<std::string, std::string>, Value> filled_;
    std::map<std::string, Value> gslots_;
    std::vector<std::pair<std::string, std::string>> transcript_;

    uint64_t next_random();
    Value resolve(const ValueExpr& expr, int dialogue_index);
    std::string render_template(const TemplateString& t, int dialogue_index);
    std::variant<Value, ServiceError> perform_call(const ServiceCall& call, SlotType target_type,
                                                   std::string* url_out);
    void say(BotReply& reply, std::string text);
    void start_dialogue(BotReply& reply, int dialogue_index,
                        const std::vector<CapturedEntity>& captured);
    void run_responses(BotReply& reply, int dialogue_index, int response_index, int slot_index);
    bool fill_service_slot(BotReply& reply, int dialogue_index, const Form& form,
                           const FormSlot& slot);
    void execute_group(BotReply& reply, int dialogue_index, const ActionGroup& group);
    std::optional<Value> coerce_text(const std::string& text, SlotType target) const;

    friend struct SessionProbe;  // test access
};

} // namespace dflow
