#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dflow/codegen.hpp"
#include "dflow/merger.hpp"
#include "dflow/parser.hpp"
#include "dflow/printer.hpp"
#include "dflow/runtime.hpp"
#include "dflow/server.hpp"
#include "dflow/validator.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;   // validation errors, merge conflicts, no-match input
constexpr int kExitEnv = 2;      // I/O, bind failures, bad invocations

bool read_file(const std::string& path, std::string& out) {
    std::ifstream file(path, std::ios::binary);
    if (!file) return false;
    std::ostringstream text;
    text << file.rdbuf();
    out = text.str();
    return true;
}

void print_diagnostics(const std::vector<dflow::Diagnostic>& diags, std::ostream& os) {
    for (const auto& d : diags) os << dflow::format_diagnostic(d) << "\n";
}

int cmd_validate(const std::string& path, bool as_json) {
    std::string source;
    if (!read_file(path, source)) {
        std::cerr << "cannot read " << path << "\n";
        return kExitEnv;
    }
    dflow::ValidationReport report = dflow::check_source(source, path);
    if (as_json) {
        std::cout << dflow::report_to_json(report, 2) << "\n";
    } else {
        print_diagnostics(report.diagnostics, std::cout);
        std::cout << (report.valid ? "valid" : "invalid") << ": " << path << "\n";
    }
    return report.valid ? kExitOk : kExitDomain;
}

int cmd_codegen(const std::string& path, const std::string& out_dir, bool force) {
    std::string source;
    if (!read_file(path, source)) {
        std::cerr << "cannot read " << path << "\n";
        return kExitEnv;
    }
    dflow::ParseResult parsed = dflow::parse(source, path);
    if (!parsed.ok()) {
        print_diagnostics(parsed.diagnostics, std::cerr);
        return kExitDomain;
    }
    dflow::ValidationReport report = dflow::validate(*parsed.model);
    if (!report.valid) {
        print_diagnostics(report.diagnostics, std::cerr);
        return kExitDomain;
    }
    dflow::GeneratedProject project = dflow::generate(*parsed.model);
    std::vector<std::string> written;
    try {
        written = dflow::write_project(project, out_dir, force);
    } catch (const dflow::OverwriteRefused& e) {
        std::cerr << e.what() << "\n";
        return kExitEnv;
    } catch (const dflow::WriteFailure& e) {
        std::cerr << e.what() << "\n";
        return kExitEnv;
    }
    int total = 0;
    std::printf("%-40s %8s\n", "file", "lines");
    for (size_t i = 0; i < project.files.size(); ++i) {
        int lines = dflow::line_count(project.files[i].second);
        total += lines;
        std::printf("%-40s %8d\n", written[i].c_str(), lines);
    }
    std::printf("%-40s %8d\n", "total", total);
    return kExitOk;
}

void print_reply(const dflow::BotReply& reply) {
    for (const auto& item : reply.items) {
        if (const auto* s = std::get_if<dflow::Say>(&item))
            std::cout << "bot: " << s->text << "\n";
        else if (const auto* e = std::get_if<dflow::EventFired>(&item))
            std::cerr << "[event] " << e->uri << " " << e->message << "\n";
        else if (const auto* v = std::get_if<dflow::ServiceInvoked>(&item))
            std::cerr << "[service] " << v->service << " " << v->url << "\n";
        else if (const auto* err = std::get_if<dflow::ErrorNote>(&item))
            std::cerr << "[error] " << err->text << "\n";
    }
}

int cmd_chat(const std::string& path, const std::string& stubs, const std::string& profile,
             const std::string& script, uint64_t seed, const std::string& fallback, bool live,
             int timeout) {
    std::string source;
    if (!read_file(path, source)) {
        std::cerr << "cannot read " << path << "\n";
        return kExitEnv;
    }
    dflow::ParseResult parsed = dflow::parse(source, path);
    if (!parsed.ok()) {
        print_diagnostics(parsed.diagnostics, std::cerr);
        return kExitDomain;
    }
    dflow::ValidationReport report = dflow::validate(*parsed.model);
    if (!report.valid) {
        print_diagnostics(report.diagnostics, std::cerr);
        return kExitDomain;
    }

    std::unique_ptr<dflow::ServiceEnv> env;
    try {
        if (live)
            env = std::make_unique<dflow::HttpEnv>(timeout);
        else if (!stubs.empty())
            env = std::make_unique<dflow::StubEnv>(dflow::StubEnv::from_file(stubs));
        else
            env = std::make_unique<dflow::StubEnv>();
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return kExitEnv;
    }

    dflow::SessionConfig config;
    config.seed = seed;
    if (!fallback.empty()) config.fallback = fallback;
    if (!profile.empty()) {
        try {
            config.profile = dflow::UserProfile::from_file(profile);
        } catch (const std::exception& e) {
            std::cerr << e.what() << "\n";
            return kExitEnv;
        }
    }

    dflow::DialogueSession session(*parsed.model, *env, config);

    if (!script.empty()) {
        std::ifstream lines(script);
        if (!lines) {
            std::cerr << "cannot read " << script << "\n";
            return kExitEnv;
        }
        std::string line;
        while (std::getline(lines, line)) {
            if (line.empty()) continue;
            session.handle_message(line);
        }
        for (const auto& [who, text] : session.transcript())
            std::cout << who << ": " << text << "\n";
        return kExitOk;
    }

    std::string line;
    std::cout << "chatting with " << path << " (/reset restarts, /quit exits)\n";
    while (std::getline(std::cin, line)) {
        if (line == "/quit") break;
        if (line == "/reset") {
            session.reset();
            std::cout << "session reset\n";
            continue;
        }
        if (line.empty()) continue;
        print_reply(session.handle_message(line));
    }
    return kExitOk;
}

int cmd_merge(const std::vector<std::string>& paths) {
    std::vector<dflow::Model> models;
    for (const auto& path : paths) {
        std::string source;
        if (!read_file(path, source)) {
            std::cerr << "cannot read " << path << "\n";
            return kExitEnv;
        }
        dflow::ParseResult parsed = dflow::parse(source, path);
        if (!parsed.ok()) {
            print_diagnostics(parsed.diagnostics, std::cerr);
            return kExitDomain;
        }
        dflow::ValidationReport report = dflow::validate(*parsed.model);
        if (!report.valid) {
            print_diagnostics(report.diagnostics, std::cerr);
            return kExitDomain;
        }
        models.push_back(std::move(*parsed.model));
    }
    dflow::MergeResult merged = dflow::merge(models);
    if (!merged.ok()) {
        print_diagnostics(merged.diagnostics, std::cerr);
        return kExitDomain;
    }
    std::cout << dflow::print(*merged.model);
    return kExitOk;
}

int cmd_serve(const std::string& addr, const std::string& db_path) {
    std::string host = addr;
    int port = 8080;
    if (auto colon = addr.rfind(':'); colon != std::string::npos) {
        host = addr.substr(0, colon);
        try {
            port = std::stoi(addr.substr(colon + 1));
        } catch (const std::exception&) {
            std::cerr << "bad address: " << addr << "\n";
            return kExitEnv;
        }
    }
    if (host.empty()) host = "127.0.0.1";

    dflow::ServerConfig config;
    config.db_path = db_path;
    config.log = [](const std::string& line) { std::cout << line << std::endl; };
    try {
        dflow::DflowServer server(config);
        if (!server.bind(host, port)) {
            std::cerr << "cannot bind " << host << ":" << port << "\n";
            return kExitEnv;
        }
        std::cout << "serving on http://" << host << ":" << server.port() << " (db: " << db_path
                  << ")\n";
        server.serve();
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return kExitEnv;
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"dFlow toolchain: validate, compile, run and serve assistant models"};
    app.require_subcommand(1);

    std::string path, out_dir, stubs, profile, script, fallback, db_path = "dflow.db";
    std::string addr = "127.0.0.1:8080";
    std::vector<std::string> merge_paths;
    bool as_json = false, force = false, live = false;
    uint64_t seed = 0;
    int timeout = 10;

    auto* validate = app.add_subcommand("validate", "Check a model against the language rules");
    validate->add_option("file", path, "dFlow model file")->required();
    validate->add_flag("--json", as_json, "machine-readable report");

    auto* codegen = app.add_subcommand("codegen", "Generate the assistant project from a model");
    codegen->add_option("file", path, "dFlow model file")->required();
    codegen->add_option("--out", out_dir, "output directory")->required();
    codegen->add_flag("--force", force, "overwrite existing files");

    auto* chat = app.add_subcommand("chat", "Converse with a model in-process");
    chat->add_option("file", path, "dFlow model file")->required();
    chat->add_option("--stubs", stubs, "JSON stub table for eservice calls");
    chat->add_option("--profile", profile, "JSON user profile");
    chat->add_option("--script", script, "utterance list to replay; prints the transcript");
    chat->add_option("--seed", seed, "random seed");
    chat->add_option("--fallback", fallback, "no-match reply");
    chat->add_flag("--live", live, "call eservices over real HTTP");
    chat->add_option("--timeout", timeout, "live-call timeout in seconds");

    auto* merge = app.add_subcommand("merge", "Merge several models into one");
    merge->add_option("files", merge_paths, "dFlow model files")->required()->expected(-1);

    auto* serve = app.add_subcommand("serve", "Run the REST service");
    serve->add_option("--addr", addr, "listen address host:port")->envname("DFLOW_ADDR");
    serve->add_option("--db", db_path, "model store path")->envname("DFLOW_DB");

    CLI11_PARSE(app, argc, argv);

    if (validate->parsed()) return cmd_validate(path, as_json);
    if (codegen->parsed()) return cmd_codegen(path, out_dir, force);
    if (chat->parsed())
        return cmd_chat(path, stubs, profile, script, seed, fallback, live, timeout);
    if (merge->parsed()) return cmd_merge(merge_paths);
    if (serve->parsed()) return cmd_serve(addr, db_path);
    return kExitEnv;
}
