// Acceptance suite: one pass/fail line per criterion, non-zero exit when
// anything fails. Run it directly or through ctest (dflow_acceptance).

#include <chrono>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "dflow/codegen.hpp"
#include "dflow/merger.hpp"
#include "dflow/parser.hpp"
#include "dflow/printer.hpp"
#include "dflow/runtime.hpp"
#include "dflow/server.hpp"
#include "dflow/validator.hpp"
#include "dflow/zip.hpp"
#include "support/fixtures.hpp"
#include "support/model_gen.hpp"
#include "support/mutants.hpp"
#include "support/yaml_check.hpp"

using namespace dflow;
using namespace dflow::testing;

namespace {

struct Criterion {
    int failures = 0;
    std::vector<std::string> notes;

    void expect(bool ok, const std::string& what) {
        if (ok) return;
        ++failures;
        notes.push_back(what);
    }

    void expect_under(double seconds, double budget) {
        std::ostringstream msg;
        msg << "runtime " << seconds << " s exceeds " << budget << " s";
        expect(seconds <= budget, msg.str());
    }
};

int g_failed_criteria = 0;

void run(int number, const std::string& title, const std::function<void(Criterion&)>& body) {
    Criterion c;
    auto started = std::chrono::steady_clock::now();
    try {
        body(c);
    } catch (const std::exception& e) {
        c.expect(false, std::string("unexpected exception: ") + e.what());
    }
    double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    std::printf("%s  criterion %2d: %s (%.2f s)\n", c.failures ? "FAIL" : "PASS", number,
                title.c_str(), seconds);
    for (const auto& note : c.notes) std::printf("      - %s\n", note.c_str());
    if (c.failures) ++g_failed_criteria;
}

double elapsed(const std::chrono::steady_clock::time_point& from) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - from).count();
}

bool in_band(int value, double center, double tolerance) {
    return value >= center * (1 - tolerance) && value <= center * (1 + tolerance);
}

// ---------------------------------------------------------------------------

void corpus_fidelity(Criterion& c) {
    auto started = std::chrono::steady_clock::now();
    for (const char* name :
         {"hello_world.dflow", "demo_assistant.dflow", "weather_assistant.dflow"}) {
        ParseResult r = parse(read_fixture(name), name);
        c.expect(r.ok(), std::string(name) + " must parse");
        if (!r.ok()) continue;
        ValidationReport report = validate(*r.model);
        c.expect(report.valid, std::string(name) + " must validate with zero errors");
    }
    c.expect_under(elapsed(started), 1.0);
}

void loc_reproduction(Criterion& c) {
    c.expect(line_count(read_fixture("hello_world.dflow")) == 16,
             "greeting model must count 16 lines");
    int demo = line_count(read_fixture("demo_assistant.dflow"));
    c.expect(demo >= 67 && demo <= 77, "demo model must count 72 +- 5 lines");

    struct Scenario {
        const char* file;
        double reference;
    } scenarios[] = {{"workshop/hello_world.dflow", 29},
                     {"workshop/user_profile.dflow", 46},
                     {"workshop/weather.dflow", 63}};
    for (const auto& s : scenarios) {
        std::string source = read_fixture(s.file);
        ParseResult r = parse(source, s.file);
        c.expect(r.ok(), std::string(s.file) + " must parse");
        if (r.ok())
            c.expect(validate(*r.model).valid, std::string(s.file) + " must validate");
        c.expect(in_band(line_count(source), s.reference, 0.20),
                 std::string(s.file) + " must sit within 20% of " +
                     std::to_string((int)s.reference) + " lines (got " +
                     std::to_string(line_count(source)) + ")");
    }
}

void codegen_structure(Criterion& c) {
    auto started = std::chrono::steady_clock::now();
    auto check_project = [&](const char* file, int lo, int hi) {
        GeneratedProject p = generate(parse_fixture(file));
        c.expect(p.files.size() == 8, std::string(file) + " must emit exactly 8 files");
        int total = 0;
        for (const auto& [path, content] : p.files) {
            total += line_count(content);
            if (path.size() > 4 && path.substr(path.size() - 4) == ".yml") {
                std::string error;
                c.expect(yaml_structurally_valid(content, &error),
                         std::string(file) + " " + path + ": " + error);
            }
        }
        std::string error;
        c.expect(python_structurally_valid(*p.find("actions/actions.py"), &error),
                 std::string(file) + " actions script: " + error);
        c.expect(total >= lo && total <= hi,
                 std::string(file) + " total lines " + std::to_string(total) + " outside [" +
                     std::to_string(lo) + ", " + std::to_string(hi) + "]");
    };
    check_project("hello_world.dflow", 44, 60);
    check_project("demo_assistant.dflow", 303, 411);
    c.expect_under(elapsed(started), 2.0);
}

void round_trip(Criterion& c) {
    auto started = std::chrono::steady_clock::now();
    for (uint64_t seed = 1; seed <= 200; ++seed) {
        Model m = random_valid_model(seed);
        std::string printed = print(m);
        ParseResult again = parse(printed, "generated");
        if (!again.ok()) {
            c.expect(false, "printed model must re-parse (seed " + std::to_string(seed) + ")");
            continue;
        }
        c.expect(model_equals(*again.model, m),
                 "parse(print(m)) must equal m (seed " + std::to_string(seed) + ")");
        c.expect(print(*again.model) == printed,
                 "print must be idempotent (seed " + std::to_string(seed) + ")");
    }
    for (const char* name :
         {"hello_world.dflow", "demo_triggers.dflow", "demo_eservices.dflow",
          "demo_dialogues.dflow", "demo_assistant.dflow", "weather_assistant.dflow"}) {
        Model m = parse_fixture(name);
        ParseResult again = parse(print(m), name);
        c.expect(again.ok() && model_equals(*again.model, m),
                 std::string(name) + " must round-trip");
    }
    c.expect_under(elapsed(started), 30.0);
}

void validator_mutation(Criterion& c) {
    std::set<std::string> covered;
    for (const auto& mutant : rule_mutants()) {
        covered.insert(mutant.code);
        bool found = false;
        bool extra_error = false;
        for (const auto& d : mutant.report.diagnostics) {
            if (d.code == mutant.code) found = true;
            if (d.severity == Severity::Error && d.code != mutant.code) extra_error = true;
        }
        c.expect(found, "mutant for " + mutant.code + " must trigger it");
        c.expect(!extra_error, "mutant for " + mutant.code + " must not trigger other errors");
        if (!mutant.expect_error)
            c.expect(mutant.report.valid, "mutant for " + mutant.code + " must stay warning-only");
    }
    c.expect(covered.size() == 13, "all 13 rule codes need a mutant");
    for (const char* name :
         {"hello_world.dflow", "demo_assistant.dflow", "weather_assistant.dflow"}) {
        c.expect(validate(parse_fixture(name)).valid,
                 std::string(name) + " must stay error-free");
    }
}

std::vector<std::pair<std::string, std::string>> scripted_demo_transcript() {
    Model m = parse_fixture("demo_assistant.dflow");
    StubEnv env = StubEnv::from_file(fixture_path("stubs/demo_stubs.json"));
    SessionConfig config;
    config.seed = 1;
    config.clock = [] { return std::chrono::system_clock::time_point{}; };
    config.profile = UserProfile::from_file(fixture_path("profile.json"));
    DialogueSession session(m, env, config);
    session.handle_message("hey");
    session.handle_message("which pharmacy is open today");
    session.handle_message("tell me a joke");
    return session.transcript();
}

void demo_transcript(Criterion& c) {
    auto first = scripted_demo_transcript();
    auto second = scripted_demo_transcript();
    c.expect(first == second, "transcript must be byte-stable across runs");
    c.expect(first.size() == 7, "transcript must hold 3 user turns and 4 bot lines");
    if (first.size() != 7) return;
    c.expect(first[1].second == "Hello there!", "greeting reply must be 'Hello there!'");
    c.expect(first[3].second == "The nearest open pharmacy is in 25 Egnatia Street, Thessaloniki",
             "pharmacy reply must interpolate the stubbed address (got '" + first[3].second + "')");
    c.expect(first[5].second ==
                 "Why do programmers prefer dark mode? Because light attracts bugs.",
             "joke reply must start with the stub question");
    c.expect(first[6].second == "42", "joke reply must end with the stub answer");
}

void weather_flow(Criterion& c) {
    Model m = parse_fixture("weather_assistant.dflow");
    StubEnv env = StubEnv::from_file(fixture_path("stubs/weather_stubs.json"));
    SessionConfig config;
    config.clock = [] { return std::chrono::system_clock::time_point{}; };
    DialogueSession session(m, env, config);
    BotReply ask = session.handle_message("Tell me the weather please");
    c.expect(ask.say_texts() == std::vector<std::string>{"For which city?"},
             "the form must ask for the city");
    BotReply reply = session.handle_message("Thessaloniki");
    c.expect(reply.say_texts() ==
                 std::vector<std::string>{"The weather for Thessaloniki is sunny"},
             "the reply must interpolate city and stubbed description");
}

void merge_properties(Criterion& c) {
    Model hello = parse_fixture("hello_world.dflow");
    Model weather = parse_fixture("weather_assistant.dflow");
    Model profile = parse_fixture("workshop/user_profile.dflow");
    Model demo = parse_fixture("demo_assistant.dflow");

    MergeResult single = merge({hello});
    c.expect(single.ok() && model_equals(*single.model, hello), "merge([m]) must equal m");

    MergeResult twice = merge({hello, hello});
    c.expect(twice.ok() && model_equals(*twice.model, hello), "merge([m, m]) must equal m");

    MergeResult left = merge({hello, weather});
    MergeResult nested = left.ok() ? merge({*left.model, profile}) : MergeResult{};
    MergeResult flat = merge({hello, weather, profile});
    c.expect(nested.ok() && flat.ok() && model_equals(*nested.model, *flat.model),
             "merge must be associative on the success fixture");

    MergeResult combo = merge({demo, weather});
    c.expect(combo.ok(), "demo + weather must merge");
    if (combo.ok()) {
        c.expect(combo.model->triggers.size() == 4, "merged model must hold 4 intents");
        c.expect(combo.model->eservices.size() == 4, "merged model must hold 4 eservices");
        c.expect(combo.model->dialogues.size() == 4, "merged model must hold 4 dialogues");
    }

    // seeded name collision surfaces as a conflict, and as 409 over HTTP
    std::string mutated = read_fixture("hello_world.dflow");
    mutated.replace(mutated.find("\"hey\","), 6, "\"heya\",");
    MergeResult conflict = merge({hello, parse_source(mutated, "mutated")});
    c.expect(!conflict.ok() && !conflict.diagnostics.empty() &&
                 conflict.diagnostics[0].code == "M001",
             "name collision must be reported as a conflict");

    ServerConfig config;
    config.db_path = scratch_dir("acceptance_merge") + "/models.db";
    DflowServer server(config);
    if (!server.bind("127.0.0.1", 0)) {
        c.expect(false, "server must bind an ephemeral port");
        return;
    }
    server.start();
    httplib::Client client("127.0.0.1", server.port());
    client.Post("/model",
                nlohmann::json{{"username", "alice"}, {"source", read_fixture("hello_world.dflow")}}
                    .dump(),
                "application/json");
    client.Post("/model", nlohmann::json{{"username", "bob"}, {"source", mutated}}.dump(),
                "application/json");
    auto res = client.Get("/model/merge");
    c.expect(res && res->status == 409, "conflicting stores must yield 409 on /model/merge");
    server.stop();
}

void service_conformance(Criterion& c) {
    auto started = std::chrono::steady_clock::now();
    std::string db = scratch_dir("acceptance_service") + "/models.db";
    long long tick = 1700000000;
    auto clock = [&tick] {
        return std::chrono::system_clock::time_point{std::chrono::seconds{tick++}};
    };

    ServerConfig config;
    config.db_path = db;
    config.clock = clock;
    auto server = std::make_unique<DflowServer>(config);
    if (!server->bind("127.0.0.1", 0)) {
        c.expect(false, "server must bind");
        return;
    }
    server->start();
    int port = server->port();
    httplib::Client client("127.0.0.1", port);
    std::string hello = read_fixture("hello_world.dflow");
    std::string weather = read_fixture("weather_assistant.dflow");

    // POST /model: 201 and 422
    auto created = client.Post("/model",
                               nlohmann::json{{"username", "alice"}, {"source", hello}}.dump(),
                               "application/json");
    c.expect(created && created->status == 201, "POST /model must answer 201");
    long long id = created ? nlohmann::json::parse(created->body)["model_id"].get<long long>() : 0;
    auto invalid = client.Post("/model",
                               nlohmann::json{{"username", "alice"}, {"source", "Intent x"}}.dump(),
                               "application/json");
    c.expect(invalid && invalid->status == 422, "POST /model with bad source must answer 422");
    auto malformed = client.Post("/model", "not json", "application/json");
    c.expect(malformed && malformed->status == 400, "POST /model with bad body must answer 400");

    // GET /model/{id}: read-your-write
    auto fetched = client.Get("/model/" + std::to_string(id));
    c.expect(fetched && fetched->status == 200 &&
                 nlohmann::json::parse(fetched->body)["source"] == hello,
             "GET /model/{id} must return the stored source byte-equal");
    auto missing = client.Get("/model/424242");
    c.expect(missing && missing->status == 404, "GET of an unknown id must answer 404");

    // PUT /model/{id}
    auto updated = client.Put("/model/" + std::to_string(id),
                              nlohmann::json{{"source", weather}}.dump(), "application/json");
    c.expect(updated && updated->status == 200 &&
                 nlohmann::json::parse(updated->body)["version"] == 2,
             "PUT /model/{id} must bump the version");
    auto bad_put = client.Put("/model/" + std::to_string(id),
                              nlohmann::json{{"source", "Intent x"}}.dump(), "application/json");
    c.expect(bad_put && bad_put->status == 422, "invalid PUT must answer 422");

    // /model/validation
    auto report = client.Post("/model/validation", nlohmann::json{{"source", hello}}.dump(),
                              "application/json");
    c.expect(report && report->status == 200 &&
                 nlohmann::json::parse(report->body)["valid"] == true,
             "POST /model/validation must answer 200 with the report");

    // /model/codegen
    auto archive = client.Post("/model/codegen", nlohmann::json{{"source", hello}}.dump(),
                               "application/json");
    c.expect(archive && archive->status == 200 && zip_entry_names(archive->body).size() == 8,
             "POST /model/codegen must answer a zip with 8 entries");

    // /user/{username}/model/latest: latest per user
    client.Post("/model", nlohmann::json{{"username", "bob"}, {"source", hello}}.dump(),
                "application/json");
    auto latest_bob = client.Get("/user/bob/model/latest");
    c.expect(latest_bob && latest_bob->status == 200, "latest for bob must be 200");
    auto latest_missing = client.Get("/user/nobody/model/latest");
    c.expect(latest_missing && latest_missing->status == 404,
             "latest for an unknown user must be 404");

    // /model/merge 200
    auto merged = client.Get("/model/merge");
    c.expect(merged && merged->status == 200, "GET /model/merge must answer 200");

    // DELETE
    auto deleted = client.Delete("/model/" + std::to_string(id));
    c.expect(deleted && deleted->status == 200, "DELETE must answer 200");
    auto deleted_again = client.Delete("/model/" + std::to_string(id));
    c.expect(deleted_again && deleted_again->status == 404,
             "DELETE of a removed id must answer 404");

    // restart durability
    server->stop();
    server = std::make_unique<DflowServer>(config);
    c.expect(server->bind("127.0.0.1", 0), "server must rebind after restart");
    server->start();
    httplib::Client fresh("127.0.0.1", server->port());
    auto survived = fresh.Get("/user/bob/model/latest");
    c.expect(survived && survived->status == 200 &&
                 nlohmann::json::parse(survived->body)["source"] == hello,
             "stored models must survive a restart");
    server->stop();

    c.expect_under(elapsed(started), 10.0);
}

void crash_freedom(Criterion& c) {
    int faults = 0;
    for (uint64_t seed = 1; seed <= 1000; ++seed) {
        Model m = random_valid_model(seed * 131 + 17);
        if (!validate(m).valid) {
            c.expect(false, "generator produced an invalid model (seed " + std::to_string(seed) + ")");
            continue;
        }
        FuzzEnv env;
        SessionConfig config;
        config.seed = seed;
        config.clock = [] { return std::chrono::system_clock::time_point{}; };
        DialogueSession session(m, env, config);
        Rng rng(seed);
        for (int turn = 0; turn < 20; ++turn) {
            try {
                session.handle_message(random_utterance(m, rng));
            } catch (...) {
                ++faults;
            }
        }
    }
    c.expect(faults == 0, std::to_string(faults) + " faulted turns in 1000 sessions");

    // byte-mutation fuzz over the sample corpus: spans stay in bounds
    std::vector<std::string> corpus = {read_fixture("hello_world.dflow"),
                                       read_fixture("demo_assistant.dflow"),
                                       read_fixture("weather_assistant.dflow")};
    Rng rng(0xACCE);
    int bad_spans = 0;
    for (int round = 0; round < 500; ++round) {
        std::string text = corpus[rng.range(0, corpus.size() - 1)];
        for (int e = rng.range(1, 4); e > 0 && !text.empty(); --e) {
            size_t at = rng.next() % text.size();
            switch (rng.range(0, 2)) {
                case 0: text[at] = static_cast<char>(rng.next() % 256); break;
                case 1: text.erase(at, 1); break;
                default: text.insert(at, 1, static_cast<char>(rng.next() % 256)); break;
            }
        }
        ParseResult r = parse(text, "fuzz");
        std::string normalized;
        for (size_t i = 0; i < text.size(); ++i) {
            if (text[i] == '\r' && i + 1 < text.size() && text[i + 1] == '\n') continue;
            normalized.push_back(text[i] == '\r' ? '\n' : text[i]);
        }
        int lines = 1;
        for (char ch : normalized)
            if (ch == '\n') ++lines;
        for (const auto& d : r.diagnostics)
            if (d.span.start_line < 1 || d.span.start_line > lines || d.span.end_line > lines ||
                d.span.start_col < 1)
                ++bad_spans;
    }
    c.expect(bad_spans == 0, std::to_string(bad_spans) + " out-of-bounds diagnostic spans");
}

} // namespace

int main() {
    std::printf("dFlow acceptance suite\n");
    run(1, "corpus fidelity: sample models parse and validate", corpus_fidelity);
    run(2, "lines-of-code reproduction", loc_reproduction);
    run(3, "codegen structure and size bands", codegen_structure);
    run(4, "parse/print round-trip over 200 random models", round_trip);
    run(5, "validator mutation coverage for all 13 rules", validator_mutation);
    run(6, "demo conversation transcript reproduction", demo_transcript);
    run(7, "weather flow with stubbed description", weather_flow);
    run(8, "merge properties and conflict behavior", merge_properties);
    run(9, "REST service conformance", service_conformance);
    run(10, "crash-freedom fuzzing", crash_freedom);
    if (g_failed_criteria) {
        std::printf("%d criterion(s) failed\n", g_failed_criteria);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
