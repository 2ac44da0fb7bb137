#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "cellgraph/analytics.hpp"
#include "cellgraph/cdr.hpp"
#include "cellgraph/fisheye.hpp"
#include "cellgraph/json_io.hpp"
#include "cellgraph/layout.hpp"
#include "cellgraph/network.hpp"

namespace cellgraph {

// ---------------------------------------------------------------- datasets

/// Raw inputs of a dataset. Text rather than paths so the content hash is
/// well defined.
struct DatasetSources {
    std::string cdr;
    std::optional<std::string> bts;
    std::optional<std::string> annotations;
    ParsePolicy policy = ParsePolicy::lenient;

    static DatasetSources from_files(const std::filesystem::path& cdr, const std::optional<std::filesystem::path>& bts,
                                     const std::optional<std::filesystem::path>& annotations,
                                     ParsePolicy policy = ParsePolicy::lenient);
};

struct Dataset {
    std::string id;
    std::vector<CallRecord> records;
    std::vector<LineDiagnostic> diagnostics;
    std::size_t data_lines = 0;
    std::optional<CellRegistry> registry;
    Annotations annotations;
    /// Undirected, count-weighted, annotated.
    CrimeNetwork network;
    /// Records whose caller-side cell is missing or not in the registry.
    std::size_t unresolved_cell_records = 0;

    json summary() const;
    /// Smallest window covering every record; nullopt when there are none.
    std::optional<TimeWindow> span() const;
};

/// Parses and indexes a dataset. Throws ParseError (strict CDR failures, any
/// BTS or annotation failure).
std::shared_ptr<const Dataset> make_dataset(const DatasetSources& sources);

/// SHA-256 based id of the inputs.
std::string dataset_id(const DatasetSources& sources);

/// Append-only, content-addressed dataset store. With a directory, each
/// dataset is written under `<dir>/<id>/` and reloaded on demand.
class DatasetStore {
public:
    explicit DatasetStore(std::optional<std::filesystem::path> directory = std::nullopt);

    /// Directory from CELLGRAPH_DATA_DIR, if set.
    static std::optional<std::filesystem::path> directory_from_env();

    std::shared_ptr<const Dataset> add(const DatasetSources& sources);
    /// Throws NotFound.
    std::shared_ptr<const Dataset> get(const std::string& id);
    std::vector<std::string> ids() const;

private:
    std::optional<std::filesystem::path> directory_;
    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<const Dataset>> datasets_;
};

// ---------------------------------------------------------------- sessions

struct SessionConfig {
    std::uint64_t seed = 1;
    Canvas canvas;
    LayoutParams params;
    LayoutMode mode = LayoutMode::single;
    /// Publish every k-th tick (plus the first and last tick of each run).
    std::uint64_t publish_every = 2;
    /// Tick budget for the run that follows each command.
    std::uint64_t max_ticks_per_command = 2000;
    int transition_ticks = 60;
};

/// Overrides fields of `base` from a JSON object (config file or request).
SessionConfig session_config_from_json(const json& j, SessionConfig base = {});

/// Interactive layout session. A single writer thread owns the simulation;
/// commands are applied in arrival order, each followed by a run of ticks
/// that lasts until convergence or the tick budget. Published frames are
/// immutable JSON lines in a shared log.
class Session {
public:
    Session(std::string id, std::shared_ptr<const Dataset> dataset, SessionConfig config);
    ~Session();

    Session(const Session&) = delete;
    Session& operator=(const Session&) = delete;

    const std::string& id() const { return id_; }
    const std::string& dataset_id() const { return dataset_->id; }

    /// Applies a command and returns its acknowledgment. Blocks until the
    /// command has been applied (not until its run finishes). Invalid
    /// commands throw and leave the session unchanged.
    json command(const json& payload);

    struct FrameBatch {
        std::vector<std::shared_ptr<const std::string>> frames;
        bool idle = false;
        bool closed = false;
    };

    /// Frames with seq >= from. Waits up to `timeout` for at least one.
    FrameBatch wait_frames(std::size_t from, std::chrono::milliseconds timeout) const;
    /// Waits until every queued command has run, then returns frames from `from`.
    FrameBatch drain(std::size_t from) const;
    /// The last published frame re-marked as a heartbeat.
    std::optional<std::string> heartbeat() const;

    json state() const;
    void close();

private:
    struct Pending {
        json payload;
        std::promise<json> ack;
    };
    struct Focus {
        std::optional<std::string> node;
        Vec2 point;
        double distortion = 3.0;
        double radius = 0.0;
    };
    struct EgoFilter {
        std::set<std::string> seeds;
        std::size_t radius = 0;
    };

    void writer_loop();
    json apply(const json& payload);  // writer thread only
    void rebuild_view(const std::optional<TimeWindow>& window, const std::optional<EgoFilter>& ego);
    void run(std::optional<LayoutMode> transition_to, int transition_ticks);
    void publish(const LayoutFrame& frame, bool converged, bool force);
    void refresh_state();
    std::optional<FisheyeSpec> focus_spec(const LayoutFrame& frame) const;

    std::string id_;
    std::shared_ptr<const Dataset> dataset_;
    SessionConfig config_;

    // writer-owned simulation state
    CrimeNetwork view_;
    LayoutGraph graph_;
    CommunityAssignment communities_;
    GravityPlan plan_;
    LayoutFrame frame_;
    bool converged_ = false;
    std::optional<Focus> focus_;
    std::optional<TimeWindow> window_;
    std::optional<EgoFilter> ego_;
    std::uint64_t last_published_tick_ = 0;
    bool published_any_ = false;
    std::size_t commands_applied_ = 0;

    mutable std::mutex mutex_;
    mutable std::condition_variable changed_;
    std::deque<std::unique_ptr<Pending>> queue_;
    std::vector<std::shared_ptr<const std::string>> log_;
    json state_;
    bool busy_ = true;
    bool closed_ = false;
    std::thread writer_;
};

class SessionManager {
public:
    explicit SessionManager(DatasetStore& store, SessionConfig defaults = {}) : store_(store), defaults_(defaults) {}

    /// Body: {dataset_id, seed?, mode?, canvas?, params?, ...}.
    std::shared_ptr<Session> create(const json& request);
    /// Throws NotFound.
    std::shared_ptr<Session> get(const std::string& id) const;
    void close(const std::string& id);
    void close_all();

private:
    DatasetStore& store_;
    SessionConfig defaults_;
    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    std::size_t next_id_ = 1;
};

// ---------------------------------------------------------------- HTTP

struct ServerOptions {
    SessionConfig session_defaults;
    std::chrono::milliseconds heartbeat_interval{500};
};

/// HTTP front end. Commands are request/response; frames stream as
/// newline-delimited JSON over a chunked response.
class ApiServer {
public:
    ApiServer(DatasetStore& store, ServerOptions options = {});
    ~ApiServer();

    /// Binds and serves on a background thread; returns the bound port.
    int start(const std::string& host, int port = 0);
    /// Serves on the calling thread until stop().
    bool listen(const std::string& host, int port);
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace cellgraph
