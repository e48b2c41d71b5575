#pragma once

#include <chrono>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

struct sqlite3;

namespace dflow {

// Single-file store for submitted models. Every write stamps the row with
// the clock; "latest" is the greatest (created_at, model_id) pair.
class ModelStore {
public:
    using Clock = std::function<std::chrono::system_clock::time_point()>;

    struct Stored {
        long long model_id = 0;
        std::string username;
        std::string source;
        long long created_at_ns = 0;
        int version = 1;

        std::string created_at_iso() const;
    };

    explicit ModelStore(const std::string& path, Clock clock = nullptr);
    ~ModelStore();
    ModelStore(const ModelStore&) = delete;
    ModelStore& operator=(const ModelStore&) = delete;

    long long insert(const std::string& username, const std::string& source);
    std::optional<Stored> get(long long model_id);
    // Bumps version and re-stamps created_at; username is kept unless given.
    bool update(long long model_id, const std::string& source,
                const std::optional<std::string>& username = std::nullopt);
    bool remove(long long model_id);

    std::optional<Stored> latest_for(const std::string& username);
    // Latest model of every user, ordered by username.
    std::vector<Stored> latest_per_user();

private:
    sqlite3* db_ = nullptr;
    std::mutex mutex_;
    Clock clock_;

    long long now_ns();
};

} // namespace dflow
