#include <algorithm>
#include <unordered_map>

#include "cellgraph/service.hpp"

namespace cellgraph {

namespace {

std::uint64_t positive_u64(const json& j, const char* key, std::uint64_t fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number_integer() || j[key].get<std::int64_t>() <= 0) {
        throw InvalidArgument(std::string("'") + key + "' must be a positive integer");
    }
    return j[key].get<std::uint64_t>();
}

TimeWindow window_from_json(const json& j) {
    if (!j.contains("start") || !j.contains("end") || !j["start"].is_string() || !j["end"].is_string()) {
        throw InvalidArgument("set_window needs string 'start' and 'end'");
    }
    return make_window(Timestamp::parse_iso8601(j["start"].get<std::string>()),
                       Timestamp::parse_iso8601(j["end"].get<std::string>()));
}

}  // namespace

SessionConfig session_config_from_json(const json& j, SessionConfig base) {
    if (!j.is_object()) throw InvalidArgument("session configuration must be a JSON object");
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned() && !(j["seed"].is_number_integer() && j["seed"].get<std::int64_t>() >= 0)) {
            throw InvalidArgument("'seed' must be a non-negative integer");
        }
        base.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("mode")) base.mode = parse_layout_mode(j["mode"].get<std::string>());
    if (j.contains("canvas")) {
        const auto& c = j["canvas"];
        base.canvas.width = c.value("width", base.canvas.width);
        base.canvas.height = c.value("height", base.canvas.height);
        if (!(base.canvas.width > 0 && base.canvas.height > 0)) throw InvalidArgument("canvas must be positive");
    }
    if (j.contains("params")) base.params = params_from_json(j["params"], base.params);
    base.publish_every = positive_u64(j, "publish_every", base.publish_every);
    base.max_ticks_per_command = positive_u64(j, "max_ticks_per_command", base.max_ticks_per_command);
    base.transition_ticks = static_cast<int>(positive_u64(j, "transition_ticks", static_cast<std::uint64_t>(base.transition_ticks)));
    return base;
}

Session::Session(std::string id, std::shared_ptr<const Dataset> dataset, SessionConfig config)
    : id_(std::move(id)), dataset_(std::move(dataset)), config_(config) {
    config_.params.validate();
    plan_.mode = config_.mode;
    rebuild_view(std::nullopt, std::nullopt);
    frame_.mode = plan_.mode;
    frame_.centers = plan_.centers;
    frame_.targets = plan_.node_targets;
    publish(frame_, false, true);
    refresh_state();
    writer_ = std::thread([this] { writer_loop(); });
}

Session::~Session() { close(); }

void Session::close() {
    {
        std::lock_guard lock(mutex_);
        closed_ = true;
    }
    changed_.notify_all();
    if (writer_.joinable() && writer_.get_id() != std::this_thread::get_id()) writer_.join();
}

json Session::command(const json& payload) {
    auto pending = std::make_unique<Pending>();
    pending->payload = payload;
    auto result = pending->ack.get_future();
    {
        std::lock_guard lock(mutex_);
        if (closed_) throw Error("session " + id_ + " is closed");
        queue_.push_back(std::move(pending));
    }
    changed_.notify_all();
    return result.get();
}

void Session::writer_loop() {
    run(std::nullopt, 0);
    std::unique_lock lock(mutex_);
    busy_ = false;
    changed_.notify_all();
    while (true) {
        changed_.wait(lock, [&] { return closed_ || !queue_.empty(); });
        if (closed_) break;
        auto pending = std::move(queue_.front());
        queue_.pop_front();
        busy_ = true;
        lock.unlock();

        std::optional<LayoutMode> transition_to;
        int transition_ticks = 0;
        bool applied = false;
        try {
            const auto& p = pending->payload;
            if (p.is_object() && p.value("command", std::string()) == "set_mode" && p.contains("mode") &&
                p["mode"].is_string()) {
                transition_to = parse_layout_mode(p["mode"].get<std::string>());
                transition_ticks = static_cast<int>(
                    positive_u64(p, "duration_ticks", static_cast<std::uint64_t>(config_.transition_ticks)));
            }
            json ack = apply(p);
            ++commands_applied_;
            ack["command_index"] = commands_applied_;
            applied = true;
            pending->ack.set_value(std::move(ack));
        } catch (...) {
            pending->ack.set_exception(std::current_exception());
        }
        if (applied) run(transition_to, transition_ticks);

        lock.lock();
        busy_ = !queue_.empty();
        changed_.notify_all();
    }
    // fail whatever is still queued
    for (auto& p : queue_) p->ack.set_exception(std::make_exception_ptr(Error("session " + id_ + " closed")));
    queue_.clear();
    busy_ = false;
    changed_.notify_all();
}

json Session::apply(const json& payload) {
    if (!payload.is_object() || !payload.contains("command") || !payload["command"].is_string()) {
        throw InvalidArgument("command payload needs a string 'command' field");
    }
    const auto name = payload["command"].get<std::string>();
    json ack{{"ok", true}, {"command", name}, {"tick", frame_.tick}};

    if (name == "set_mode") {
        if (!payload.contains("mode") || !payload["mode"].is_string()) throw InvalidArgument("set_mode needs 'mode'");
        const auto mode = parse_layout_mode(payload["mode"].get<std::string>());
        ack["changed"] = mode != plan_.mode;
    } else if (name == "set_focus") {
        Focus focus;
        focus.distortion = payload.value("d", 3.0);
        focus.radius = payload.value("radius", 0.4 * config_.canvas.diagonal());
        if (!(focus.distortion >= 0.0)) throw InvalidArgument("focus distortion must be >= 0");
        if (!(focus.radius > 0.0)) throw InvalidArgument("focus radius must be > 0");
        if (payload.contains("node_id")) {
            const auto node = payload["node_id"].get<std::string>();
            if (!view_.index_of(node)) throw NotFound("unknown node id '" + node + "'");
            focus.node = node;
        } else if (payload.contains("point")) {
            const auto& p = payload["point"];
            focus.point = {p.at("x").get<double>(), p.at("y").get<double>()};
            if (!config_.canvas.contains(focus.point)) throw InvalidArgument("focus point lies outside the canvas");
        } else {
            throw InvalidArgument("set_focus needs 'node_id' or 'point'");
        }
        focus_ = focus;
    } else if (name == "clear_focus") {
        focus_.reset();
    } else if (name == "set_params") {
        if (!payload.contains("params")) throw InvalidArgument("set_params needs 'params'");
        config_.params = params_from_json(payload["params"], config_.params);
        ack["params"] = to_json(config_.params);
    } else if (name == "ego_filter") {
        std::optional<EgoFilter> ego;
        if (!payload.value("clear", false)) {
            EgoFilter f;
            if (!payload.contains("seeds") || !payload["seeds"].is_array() || payload["seeds"].empty()) {
                throw InvalidArgument("ego_filter needs a non-empty 'seeds' array");
            }
            for (const auto& s : payload["seeds"]) f.seeds.insert(normalize_subscriber(s.get<std::string>()));
            const auto radius = payload.value("radius", std::int64_t{1});
            if (radius < 0) throw InvalidArgument("ego radius must be >= 0");
            f.radius = static_cast<std::size_t>(radius);
            ego = std::move(f);
        }
        rebuild_view(window_, ego);
    } else if (name == "set_window") {
        std::optional<TimeWindow> window;
        if (!payload.value("clear", false)) window = window_from_json(payload);
        rebuild_view(window, ego_);
    } else {
        throw InvalidArgument("unknown command '" + name + "'");
    }
    ack["node_count"] = view_.node_count();
    return ack;
}

void Session::rebuild_view(const std::optional<TimeWindow>& window, const std::optional<EgoFilter>& ego) {
    // build everything first; commit only when nothing threw
    CrimeNetwork base = window ? filter_window(dataset_->records, *window)
                                     .with_annotations(dataset_->annotations)
                                     .with_provenance(Provenance{dataset_->id, window})
                               : dataset_->network;
    CrimeNetwork view = ego ? ego_expand(base, ego->seeds, ego->radius) : std::move(base);
    LayoutGraph graph = LayoutGraph::from_network(view);
    CommunityAssignment communities = louvain(view, config_.seed);
    GravityPlan plan = make_gravity_plan(plan_.mode, view, config_.canvas, communities);

    LayoutFrame frame = init_layout(graph, config_.seed, config_.canvas);
    if (frame_.ids) {
        std::unordered_map<std::string_view, std::size_t> previous;
        for (std::size_t i = 0; i < frame_.ids->size(); ++i) previous.emplace((*frame_.ids)[i], i);
        for (std::size_t i = 0; i < frame.size(); ++i) {
            if (auto it = previous.find((*frame.ids)[i]); it != previous.end()) {
                frame.positions[i] = frame_.positions[it->second];
                frame.velocities[i] = frame_.velocities[it->second];
            }
        }
        frame.tick = frame_.tick;
    }
    frame.mode = plan.mode;
    frame.centers = plan.centers;
    frame.targets = plan.node_targets;
    frame.groups = std::make_shared<const std::vector<std::size_t>>(plan.groups);
    frame.kinetic_energy = kinetic_energy(frame.velocities);

    view_ = std::move(view);
    graph_ = std::move(graph);
    communities_ = std::move(communities);
    plan_ = std::move(plan);
    frame_ = std::move(frame);
    window_ = window;
    ego_ = ego;
    converged_ = false;
    if (focus_ && focus_->node && !view_.index_of(*focus_->node)) focus_.reset();
}

void Session::run(std::optional<LayoutMode> transition_to, int transition_ticks) {
    const double threshold = convergence_threshold(config_.canvas);
    std::uint64_t used = 0;
    bool converged = false;
    auto stopping = [&] {
        std::lock_guard lock(mutex_);
        return closed_;
    };

    if (transition_to && *transition_to != plan_.mode) {
        GravityPlan target = make_gravity_plan(*transition_to, view_, config_.canvas, communities_);
        auto frames = transition(frame_, graph_, config_.params, plan_, target, transition_ticks);
        for (std::size_t k = 0; k < frames.size(); ++k) {
            frame_ = std::move(frames[k]);
            publish(frame_, false, k == 0 || k + 1 == frames.size());
        }
        plan_ = std::move(target);
        used = frames.size();
    }
    const std::uint64_t budget = config_.max_ticks_per_command;
    bool first = used == 0;
    while ((used < budget || used == 0) && !stopping()) {
        frame_ = step(frame_, graph_, config_.params, plan_);
        ++used;
        converged = frame_.max_displacement < threshold;
        publish(frame_, converged, first || converged || used >= budget);
        first = false;
        if (converged) break;
    }
    converged_ = converged;
    refresh_state();
}

void Session::refresh_state() {
    std::lock_guard lock(mutex_);
    state_ = json{{"id", id_},
                  {"dataset_id", dataset_->id},
                  {"tick", frame_.tick},
                  {"mode", std::string(to_string(plan_.mode))},
                  {"converged", converged_},
                  {"focus", focus_ ? (focus_->node ? json(*focus_->node) : json("point")) : json(nullptr)},
                  {"window", window_ ? json{{"start", window_->start.to_iso8601()}, {"end", window_->end.to_iso8601()}}
                                     : json(nullptr)},
                  {"node_count", view_.node_count()},
                  {"edge_count", view_.edge_count()},
                  {"community_count", communities_.community_count},
                  {"modularity", communities_.modularity},
                  {"params", to_json(config_.params)},
                  {"commands_applied", commands_applied_},
                  {"frames", log_.size()}};
}

std::optional<FisheyeSpec> Session::focus_spec(const LayoutFrame& frame) const {
    if (!focus_) return std::nullopt;
    Vec2 point = focus_->point;
    if (focus_->node) point = frame.positions[view_.require_index(*focus_->node)];
    return FisheyeSpec{point, focus_->distortion, focus_->radius, config_.canvas};
}

void Session::publish(const LayoutFrame& frame, bool converged, bool force) {
    if (published_any_ && frame.tick <= last_published_tick_) return;
    if (!force && frame.tick % config_.publish_every != 0) return;
    FrameAnnotations extra;
    extra.converged = converged;
    extra.window = window_;
    extra.focus = focus_spec(frame);
    if (focus_) extra.focus_node = focus_->node;
    std::string line;
    {
        std::lock_guard lock(mutex_);
        extra.seq = log_.size();
    }
    const LayoutFrame shown = extra.focus ? apply_fisheye(frame, *extra.focus) : frame;
    line = frame_to_json(shown, extra).dump();
    {
        std::lock_guard lock(mutex_);
        log_.push_back(std::make_shared<const std::string>(std::move(line)));
    }
    last_published_tick_ = frame.tick;
    published_any_ = true;
    changed_.notify_all();
}

Session::FrameBatch Session::wait_frames(std::size_t from, std::chrono::milliseconds timeout) const {
    std::unique_lock lock(mutex_);
    changed_.wait_for(lock, timeout, [&] { return closed_ || log_.size() > from; });
    FrameBatch batch;
    if (from < log_.size()) batch.frames.assign(log_.begin() + static_cast<std::ptrdiff_t>(from), log_.end());
    batch.idle = !busy_ && queue_.empty();
    batch.closed = closed_;
    return batch;
}

Session::FrameBatch Session::drain(std::size_t from) const {
    std::unique_lock lock(mutex_);
    changed_.wait(lock, [&] { return closed_ || (!busy_ && queue_.empty()); });
    FrameBatch batch;
    if (from < log_.size()) batch.frames.assign(log_.begin() + static_cast<std::ptrdiff_t>(from), log_.end());
    batch.idle = true;
    batch.closed = closed_;
    return batch;
}

std::optional<std::string> Session::heartbeat() const {
    std::shared_ptr<const std::string> last;
    {
        std::lock_guard lock(mutex_);
        if (log_.empty()) return std::nullopt;
        last = log_.back();
    }
    auto j = json::parse(*last);
    j.erase("seq");
    j["heartbeat"] = true;
    return j.dump();
}

json Session::state() const {
    std::lock_guard lock(mutex_);
    json s = state_;
    s["frames"] = log_.size();
    s["busy"] = busy_ || !queue_.empty();
    s["closed"] = closed_;
    return s;
}

std::shared_ptr<Session> SessionManager::create(const json& request) {
    if (!request.is_object() || !request.contains("dataset_id") || !request["dataset_id"].is_string()) {
        throw InvalidArgument("session request needs 'dataset_id'");
    }
    auto dataset = store_.get(request["dataset_id"].get<std::string>());
    json overrides = request;
    overrides.erase("dataset_id");
    const auto config = session_config_from_json(overrides, defaults_);
    std::string id;
    {
        std::lock_guard lock(mutex_);
        id = "s" + std::to_string(next_id_++);
    }
    auto session = std::make_shared<Session>(id, std::move(dataset), config);
    std::lock_guard lock(mutex_);
    sessions_.emplace(id, session);
    return session;
}

std::shared_ptr<Session> SessionManager::get(const std::string& id) const {
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw NotFound("unknown session '" + id + "'");
    return it->second;
}

void SessionManager::close(const std::string& id) {
    std::shared_ptr<Session> session;
    {
        std::lock_guard lock(mutex_);
        auto it = sessions_.find(id);
        if (it == sessions_.end()) throw NotFound("unknown session '" + id + "'");
        session = it->second;
        sessions_.erase(it);
    }
    session->close();
}

void SessionManager::close_all() {
    std::map<std::string, std::shared_ptr<Session>> all;
    {
        std::lock_guard lock(mutex_);
        all.swap(sessions_);
    }
    for (auto& [id, s] : all) s->close();
}

}  // namespace cellgraph
