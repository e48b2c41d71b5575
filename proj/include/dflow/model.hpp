#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dflow/diagnostics.hpp"

// The dFlow object model: six root concepts (entities, synonyms, triggers,
// eservices, gslots, dialogues) plus everything reachable from them.
// All types are plain immutable-by-convention values; source spans ride
// along for diagnostics but never take part in equality.

namespace dflow {

enum class SlotType { Str, Int, Float, Bool };

enum class HttpVerb { Get, Post, Put, Delete };

// Closed set of pre-trained NER categories accepted after "PE:".
enum class EntityCategory {
    PERSON, GPE, DATE, TIME, ORG, LOC,
    PRODUCT, MONEY, CARDINAL, ORDINAL, PERCENT, EMAIL,
};

enum class UserProp { Name, Surname, Age, Email, Phone, City, Address };
enum class SystemProp { Time, Location, RandomInt, RandomFloat };

const char* slot_type_name(SlotType t);
const char* verb_name(HttpVerb v);
const char* category_name(EntityCategory c);
const char* user_prop_name(UserProp p);
const char* system_prop_name(SystemProp p);

std::optional<SlotType> slot_type_from(const std::string& s);
std::optional<HttpVerb> verb_from(const std::string& s);
std::optional<EntityCategory> category_from(const std::string& s);
std::optional<UserProp> user_prop_from(const std::string& s);
std::optional<SystemProp> system_prop_from(const std::string& s);

// A typed literal. The alternative index doubles as the value's type:
// string / int / float / bool, in that order.
using Literal = std::variant<std::string, long long, double, bool>;

SlotType literal_type(const Literal& v);

struct FormSlotRef {
    std::string form;
    std::string slot;
};

struct GSlotRef {
    std::string name;
};

struct ValueExpr {
    std::variant<Literal, FormSlotRef, GSlotRef, UserProp, SystemProp> node;
    SourceSpan span;
};

struct TemplateString {
    // Each part is literal text or an interpolated expression.
    struct Part {
        std::variant<std::string, ValueExpr> node;
    };
    std::vector<Part> parts;
    SourceSpan span;
};

struct PretrainedEntityRef {
    EntityCategory category = EntityCategory::PERSON;
    std::vector<std::string> sample_values;
    SourceSpan span;
};

struct TextChunk {
    std::string text;
};
struct PretrainedEntityChunk {
    PretrainedEntityRef ref;
};
struct TrainableEntityChunk {
    std::string entity;
};
struct SynonymChunk {
    std::string synonym;
};

struct PhraseChunk {
    std::variant<TextChunk, PretrainedEntityChunk, TrainableEntityChunk, SynonymChunk> node;
    SourceSpan span;
};

struct PhraseExample {
    std::vector<PhraseChunk> chunks;
    SourceSpan span;
};

struct TrainableEntity {
    std::string name;
    std::vector<std::string> examples;
    SourceSpan span;
};

struct Synonym {
    std::string name;
    std::vector<std::string> words;
    SourceSpan span;
};

struct IntentTrigger {
    std::string name;
    std::vector<PhraseExample> examples;
    SourceSpan span;
};

struct EventTrigger {
    std::string name;
    std::string uri;
    SourceSpan span;
};

struct Trigger {
    std::variant<IntentTrigger, EventTrigger> node;

    const std::string& name() const;
    const SourceSpan& span() const;
    bool is_intent() const { return std::holds_alternative<IntentTrigger>(node); }
};

struct EServiceHTTP {
    std::string name;
    HttpVerb verb = HttpVerb::Get;
    std::string host;
    std::string path;
    std::optional<int> port;
    SourceSpan span;
};

struct GSlot {
    std::string name;
    SlotType type = SlotType::Str;
    std::optional<Literal> default_value;
    SourceSpan span;
};

struct ServiceParam {
    std::string key;
    ValueExpr value;
};

struct ServiceCall {
    std::string service;
    std::vector<ServiceParam> query_params;
    std::vector<ServiceParam> path_params;
    std::vector<ServiceParam> header_params;
    std::vector<ServiceParam> body_params;
    std::vector<std::string> response_path; // dotted path, one segment per element
    SourceSpan span;
};

struct FromText {};
struct FromEntity {
    // Either a pre-trained category reference or a trainable entity name.
    std::variant<PretrainedEntityRef, std::string> entity;
};
struct FromIntent {
    struct Mapping {
        std::string intent;
        Literal value;
        SourceSpan span;
    };
    std::vector<Mapping> mappings;
};

struct HRISource {
    TemplateString ask;
    std::variant<FromText, FromEntity, FromIntent> extraction;
};

struct EServiceSource {
    ServiceCall call;
};

struct FormSlot {
    std::string name;
    SlotType type = SlotType::Str;
    std::variant<HRISource, EServiceSource> source;
    SourceSpan span;
};

struct Form {
    std::string name;
    std::vector<FormSlot> slots;
    SourceSpan span;
};

struct SpeakAction {
    TemplateString text;
};
struct FireEventAction {
    ValueExpr uri;
    ValueExpr message;
};
struct RESTCallAction {
    ServiceCall call;
};
struct SetGSlotAction {
    std::string gslot;
    ValueExpr value;
};
struct SetFSlotAction {
    std::string form;
    std::string slot;
    ValueExpr value;
};

struct Action {
    std::variant<SpeakAction, FireEventAction, RESTCallAction, SetGSlotAction, SetFSlotAction> node;
    SourceSpan span;
};

struct ActionGroup {
    std::string name;
    std::vector<Action> actions;
    SourceSpan span;
};

struct DialogueResponse {
    std::variant<Form, ActionGroup> node;

    const std::string& name() const;
    const SourceSpan& span() const;
    bool is_form() const { return std::holds_alternative<Form>(node); }
};

struct Dialogue {
    std::string name;
    std::vector<std::string> on;       // trigger names
    std::vector<SourceSpan> on_spans;  // one per entry of `on`
    std::vector<DialogueResponse> responses;
    SourceSpan span;
};

struct Model {
    std::vector<TrainableEntity> entities;
    std::vector<Synonym> synonyms;
    std::vector<Trigger> triggers;
    std::vector<EServiceHTTP> eservices;
    std::vector<GSlot> gslots;
    std::vector<Dialogue> dialogues;

    bool empty() const {
        return entities.empty() && synonyms.empty() && triggers.empty() &&
               eservices.empty() && gslots.empty() && dialogues.empty();
    }
};

// Structural equality ignoring source spans. Order inside each concept
// list is significant.
bool model_equals(const Model& a, const Model& b);

bool equals(const TrainableEntity& a, const TrainableEntity& b);
bool equals(const Synonym& a, const Synonym& b);
bool equals(const Trigger& a, const Trigger& b);
bool equals(const EServiceHTTP& a, const EServiceHTTP& b);
bool equals(const GSlot& a, const GSlot& b);
bool equals(const Dialogue& a, const Dialogue& b);
bool equals(const PhraseExample& a, const PhraseExample& b);

// Every (referencing site, referenced name, concept kind) triple in the
// model, resolved or not. Feeds the validator and the merger.
enum class ConceptKind { Trigger, Intent, EService, Form, FormSlot, GSlot, Entity, Synonym };

const char* concept_kind_name(ConceptKind k);

struct Reference {
    std::string site;  // e.g. "dialogue_1.on", "form1.answer", "greet_back[0]"
    std::string name;  // referenced name; form slots as "form.slot"
    ConceptKind kind;
    SourceSpan span;
};

std::vector<Reference> collect_references(const Model& model);

} // namespace dflow
