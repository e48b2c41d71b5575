#include "dflow/store.hpp"

#include <ctime>
#include <map>
#include <stdexcept>

#include <sqlite3.h>

namespace dflow {

namespace {

void exec_or_throw(sqlite3* db, const char* sql) {
    char* err = nullptr;
    if (sqlite3_exec(db, sql, nullptr, nullptr, &err) != SQLITE_OK) {
        std::string msg = err ? err : "unknown sqlite error";
        sqlite3_free(err);
        throw std::runtime_error("sqlite: " + msg);
    }
}

struct Stmt {
    sqlite3_stmt* stmt = nullptr;

    Stmt(sqlite3* db, const char* sql) {
        if (sqlite3_prepare_v2(db, sql, -1, &stmt, nullptr) != SQLITE_OK)
            throw std::runtime_error(std::string("sqlite prepare: ") + sqlite3_errmsg(db));
    }
    ~Stmt() { sqlite3_finalize(stmt); }

    void bind(int i, long long v) { sqlite3_bind_int64(stmt, i, v); }
    void bind(int i, const std::string& v) {
        sqlite3_bind_text(stmt, i, v.c_str(), static_cast<int>(v.size()), SQLITE_TRANSIENT);
    }
    bool row() { return sqlite3_step(stmt) == SQLITE_ROW; }
    bool done() { return sqlite3_step(stmt) == SQLITE_DONE; }

    long long int64(int col) { return sqlite3_column_int64(stmt, col); }
    std::string text(int col) {
        const unsigned char* t = sqlite3_column_text(stmt, col);
        return t ? reinterpret_cast<const char*>(t) : "";
    }
};

ModelStore::Stored read_row(Stmt& s) {
    ModelStore::Stored row;
    row.model_id = s.int64(0);
    row.username = s.text(1);
    row.source = s.text(2);
    row.created_at_ns = s.int64(3);
    row.version = static_cast<int>(s.int64(4));
    return row;
}

const char* kSelect = "SELECT model_id, username, source, created_at_ns, version FROM models ";

} // namespace

std::string ModelStore::Stored::created_at_iso() const {
    std::time_t secs = static_cast<std::time_t>(created_at_ns / 1000000000LL);
    std::tm tm{};
    gmtime_r(&secs, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

ModelStore::ModelStore(const std::string& path, Clock clock) : clock_(std::move(clock)) {
    if (!clock_)
        clock_ = [] { return std::chrono::system_clock::now(); };
    if (sqlite3_open(path.c_str(), &db_) != SQLITE_OK) {
        std::string msg = db_ ? sqlite3_errmsg(db_) : "cannot open database";
        sqlite3_close(db_);
        throw std::runtime_error("sqlite open '" + path + "': " + msg);
    }
    exec_or_throw(db_,
                  "CREATE TABLE IF NOT EXISTS models ("
                  "  model_id INTEGER PRIMARY KEY AUTOINCREMENT,"
                  "  username TEXT NOT NULL,"
                  "  source TEXT NOT NULL,"
                  "  created_at_ns INTEGER NOT NULL,"
                  "  version INTEGER NOT NULL DEFAULT 1)");
}

ModelStore::~ModelStore() { sqlite3_close(db_); }

long long ModelStore::now_ns() {
    auto tp = clock_();
    return std::chrono::duration_cast<std::chrono::nanoseconds>(tp.time_since_epoch()).count();
}

long long ModelStore::insert(const std::string& username, const std::string& source) {
    std::lock_guard lock(mutex_);
    Stmt s(db_, "INSERT INTO models (username, source, created_at_ns, version) VALUES (?,?,?,1)");
    s.bind(1, username);
    s.bind(2, source);
    s.bind(3, now_ns());
    if (!s.done()) throw std::runtime_error(std::string("sqlite insert: ") + sqlite3_errmsg(db_));
    return sqlite3_last_insert_rowid(db_);
}

std::optional<ModelStore::Stored> ModelStore::get(long long model_id) {
    std::lock_guard lock(mutex_);
    Stmt s(db_, (std::string(kSelect) + "WHERE model_id = ?").c_str());
    s.bind(1, model_id);
    if (!s.row()) return std::nullopt;
    return read_row(s);
}

bool ModelStore::update(long long model_id, const std::string& source,
                        const std::optional<std::string>& username) {
    std::lock_guard lock(mutex_);
    const char* sql = username
                          ? "UPDATE models SET source=?, created_at_ns=?, version=version+1, "
                            "username=? WHERE model_id=?"
                          : "UPDATE models SET source=?, created_at_ns=?, version=version+1 "
                            "WHERE model_id=?";
    Stmt s(db_, sql);
    s.bind(1, source);
    s.bind(2, now_ns());
    if (username) {
        s.bind(3, *username);
        s.bind(4, model_id);
    } else {
        s.bind(3, model_id);
    }
    if (!s.done()) throw std::runtime_error(std::string("sqlite update: ") + sqlite3_errmsg(db_));
    return sqlite3_changes(db_) > 0;
}

bool ModelStore::remove(long long model_id) {
    std::lock_guard lock(mutex_);
    Stmt s(db_, "DELETE FROM models WHERE model_id = ?");
    s.bind(1, model_id);
    if (!s.done()) throw std::runtime_error(std::string("sqlite delete: ") + sqlite3_errmsg(db_));
    return sqlite3_changes(db_) > 0;
}

std::optional<ModelStore::Stored> ModelStore::latest_for(const std::string& username) {
    std::lock_guard lock(mutex_);
    Stmt s(db_, (std::string(kSelect) +
                 "WHERE username = ? ORDER BY created_at_ns DESC, model_id DESC LIMIT 1")
                    .c_str());
    s.bind(1, username);
    if (!s.row()) return std::nullopt;
    return read_row(s);
}

std::vector<ModelStore::Stored> ModelStore::latest_per_user() {
    std::lock_guard lock(mutex_);
    Stmt s(db_, (std::string(kSelect) + "ORDER BY username ASC, created_at_ns ASC, model_id ASC")
                    .c_str());
    std::map<std::string, Stored> latest;
    while (s.row()) {
        Stored row = read_row(s);
        latest[row.username] = row;  // later rows win: ascending scan
    }
    std::vector<Stored> out;
    for (auto& [name, row] : latest) out.push_back(std::move(row));
    return out;
}

} // namespace dflow
