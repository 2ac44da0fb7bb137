#include "cellgraph/layout.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "cellgraph/kernels.hpp"

namespace cellgraph {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

// Unit double in [0, 1) from the top 53 bits.
double unit(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

void validate_canvas(const Canvas& canvas) {
    if (!(canvas.width > 0 && canvas.height > 0) || !std::isfinite(canvas.width) || !std::isfinite(canvas.height)) {
        throw InvalidArgument("canvas dimensions must be positive");
    }
}

// Separates exactly coincident points by 1e-6 in a direction derived from
// (seed, tick, node). The first point of each coincident run stays put.
void jitter_coincident(std::vector<Vec2>& positions, std::uint64_t seed, std::uint64_t tick) {
    std::vector<std::size_t> order(positions.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (positions[a].x != positions[b].x) return positions[a].x < positions[b].x;
        if (positions[a].y != positions[b].y) return positions[a].y < positions[b].y;
        return a < b;
    });
    const std::vector<Vec2> original = positions;
    for (std::size_t k = 1; k < order.size(); ++k) {
        const auto cur = order[k];
        if (original[cur] == original[order[k - 1]]) {
            const double angle =
                2.0 * std::numbers::pi * unit(splitmix64(seed ^ splitmix64(tick ^ splitmix64(cur))));
            positions[cur] += Vec2{std::cos(angle), std::sin(angle)} * 1e-6;
        }
    }
}

}  // namespace

std::string_view to_string(LayoutMode mode) {
    switch (mode) {
        case LayoutMode::single: return "single";
        case LayoutMode::foci: return "foci";
        case LayoutMode::semantic: return "semantic";
    }
    return "single";
}

LayoutMode parse_layout_mode(std::string_view text) {
    if (text == "single") return LayoutMode::single;
    if (text == "foci") return LayoutMode::foci;
    if (text == "semantic") return LayoutMode::semantic;
    throw InvalidArgument("unknown layout mode '" + std::string(text) + "'");
}

void LayoutParams::validate() const {
    const double fields[] = {spring_stiffness, spring_rest_length, repulsion_constant, gravity_strength,
                             viscosity,        theta,              time_step,          max_speed};
    for (double f : fields) {
        if (!(f >= 0.0) || !std::isfinite(f)) throw InvalidArgument("layout parameters must be finite and non-negative");
    }
    if (!(viscosity < 1.0)) throw InvalidArgument("viscosity must be < 1");
    if (!(time_step > 0.0)) throw InvalidArgument("time_step must be > 0");
}

LayoutGraph LayoutGraph::from_network(const CrimeNetwork& network) {
    const auto links = LinkGraph::from_network(network);
    LayoutGraph g;
    auto ids = std::make_shared<std::vector<std::string>>();
    ids->reserve(network.node_count());
    for (const auto& n : network.nodes()) ids->push_back(n.id);
    g.ids = std::move(ids);
    g.springs = links.links;
    g.masses.resize(network.node_count());
    for (std::size_t i = 0; i < network.node_count(); ++i) {
        g.masses[i] = 1.0 + static_cast<double>(links.offsets[i + 1] - links.offsets[i]);
    }
    return g;
}

double kinetic_energy(std::span<const Vec2> velocities) {
    double e = 0.0;
    for (const auto& v : velocities) e += v.dot(v);
    return 0.5 * e;
}

Vec2 initial_position(std::uint64_t seed, std::string_view id, const Canvas& canvas) {
    const std::uint64_t base = splitmix64(seed ^ fnv1a(id));
    const double u = unit(splitmix64(base));
    const double v = unit(splitmix64(base + 1));
    return {canvas.width * (0.25 + 0.5 * u), canvas.height * (0.25 + 0.5 * v)};
}

LayoutFrame init_layout(const LayoutGraph& graph, std::uint64_t seed, const Canvas& canvas) {
    validate_canvas(canvas);
    LayoutFrame frame;
    frame.canvas = canvas;
    frame.seed = seed;
    frame.ids = graph.ids ? graph.ids : std::make_shared<const std::vector<std::string>>();
    frame.positions.reserve(graph.size());
    for (std::size_t i = 0; i < graph.size(); ++i) {
        frame.positions.push_back(initial_position(seed, (*frame.ids)[i], canvas));
    }
    frame.velocities.assign(graph.size(), Vec2{});
    frame.targets.assign(graph.size(), canvas.center());
    frame.centers = {canvas.center()};
    frame.groups = std::make_shared<const std::vector<std::size_t>>(graph.size(), 0);
    return frame;
}

FociTargets foci_targets(const CommunityAssignment& assignment, const Canvas& canvas) {
    validate_canvas(canvas);
    const std::size_t k = assignment.community_count;
    if (k == 0) throw InvalidArgument("foci_targets: at least one community required");
    FociTargets out;
    out.centers.assign(k, canvas.center());
    if (k == 1) return out;

    auto sizes = assignment.community_sizes();
    std::vector<std::size_t> rank(k);
    std::iota(rank.begin(), rank.end(), 0);
    std::stable_sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) { return sizes[a] > sizes[b]; });
    const double radius = 0.35 * std::min(canvas.width, canvas.height);
    for (std::size_t slot = 0; slot < k; ++slot) {
        const double angle = 2.0 * std::numbers::pi * static_cast<double>(slot) / static_cast<double>(k);
        out.centers[rank[slot]] = canvas.center() + Vec2{std::cos(angle), std::sin(angle)} * radius;
    }
    return out;
}

GravityPlan make_gravity_plan(LayoutMode mode, const CrimeNetwork& network, const Canvas& canvas,
                              const CommunityAssignment& communities) {
    GravityPlan plan;
    plan.mode = mode;
    const auto n = network.node_count();
    if (mode == LayoutMode::single) {
        plan.node_targets.assign(n, canvas.center());
        plan.centers = {canvas.center()};
        plan.groups = communities.membership;
        return plan;
    }
    const CommunityAssignment grouping = mode == LayoutMode::foci ? communities : group_by_crime_type(network);
    plan.groups = grouping.membership;
    if (n == 0) {
        plan.centers = {canvas.center()};
        return plan;
    }
    plan.centers = foci_targets(grouping, canvas).centers;
    plan.node_targets.reserve(n);
    for (auto g : grouping.membership) plan.node_targets.push_back(plan.centers[g]);
    return plan;
}

LayoutFrame step(const LayoutFrame& frame, const LayoutGraph& graph, const LayoutParams& params,
                 std::span<const Vec2> targets) {
    const std::size_t n = frame.size();
    if (graph.size() != n || targets.size() != n || frame.velocities.size() != n) {
        throw InvalidArgument("step: frame, graph and targets disagree on node count");
    }
    LayoutFrame next = frame;
    next.tick = frame.tick + 1;
    std::vector<Vec2> positions = frame.positions;
    jitter_coincident(positions, frame.seed, frame.tick);

    std::vector<Vec2> forces =
        kernels::repulsion_barnes_hut(positions, graph.masses, params.repulsion_constant, params.theta);
    for (const auto& [u, v] : graph.springs) {
        const Vec2 d = positions[v] - positions[u];
        const double dist = d.norm();
        if (dist == 0.0) continue;
        const Vec2 f = d * (params.spring_stiffness * (dist - params.spring_rest_length) / dist);
        forces[u] += f;
        forces[v] -= f;
    }
    // Mass is inertial as well: a hub with many springs would otherwise see a
    // combined stiffness that makes the explicit step unstable at dt = 1.
    // Gravity is an acceleration and pulls every node alike.
    std::vector<Vec2> accel(n);
    for (std::size_t i = 0; i < n; ++i) {
        accel[i] = forces[i] * (1.0 / graph.masses[i]) + (targets[i] - positions[i]) * params.gravity_strength;
    }

    const double damping = 1.0 - params.viscosity;
    double max_disp = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        Vec2 v = (frame.velocities[i] + accel[i] * params.time_step) * damping;
        const double speed = v.norm();
        if (!(speed <= params.max_speed)) {
            // also catches NaN from a degenerate force
            v = std::isfinite(speed) && speed > 0 ? v * (params.max_speed / speed) : Vec2{};
        }
        next.velocities[i] = v;
        next.positions[i] = positions[i] + v * params.time_step;
        max_disp = std::max(max_disp, (next.positions[i] - frame.positions[i]).norm());
    }
    next.targets.assign(targets.begin(), targets.end());
    next.kinetic_energy = kinetic_energy(next.velocities);
    next.max_displacement = max_disp;
    return next;
}

LayoutFrame step(const LayoutFrame& frame, const LayoutGraph& graph, const LayoutParams& params,
                 const GravityPlan& plan) {
    LayoutFrame next = step(frame, graph, params, plan.node_targets);
    next.mode = plan.mode;
    next.centers = plan.centers;
    next.groups = std::make_shared<const std::vector<std::size_t>>(plan.groups);
    return next;
}

double convergence_threshold(const Canvas& canvas) { return 1e-3 * canvas.diagonal(); }

ConvergenceResult run_until_converged(const LayoutFrame& frame, const LayoutGraph& graph, const LayoutParams& params,
                                      const GravityPlan& plan, std::uint64_t max_ticks) {
    if (max_ticks == 0) throw InvalidArgument("run_until_converged: max_ticks must be > 0");
    params.validate();
    const double threshold = convergence_threshold(frame.canvas);
    ConvergenceResult result{frame, false, 0};
    while (result.ticks < max_ticks) {
        result.frame = step(result.frame, graph, params, plan);
        ++result.ticks;
        if (result.frame.max_displacement < threshold) {
            result.converged = true;
            break;
        }
    }
    return result;
}

std::vector<LayoutFrame> transition(const LayoutFrame& frame, const LayoutGraph& graph, const LayoutParams& params,
                                    const GravityPlan& from, const GravityPlan& to, int duration_ticks) {
    if (duration_ticks <= 0) throw InvalidArgument("transition: duration must be positive");
    if (from.mode == to.mode) throw InvalidArgument("transition: modes must differ");
    const std::size_t n = frame.size();
    if (from.node_targets.size() != n || to.node_targets.size() != n) {
        throw InvalidArgument("transition: gravity plans do not match the frame");
    }
    std::vector<LayoutFrame> frames;
    frames.reserve(static_cast<std::size_t>(duration_ticks));
    std::vector<Vec2> targets(n);
    for (int t = 1; t <= duration_ticks; ++t) {
        const double s = static_cast<double>(t) / duration_ticks;
        for (std::size_t i = 0; i < n; ++i) {
            targets[i] = from.node_targets[i] + (to.node_targets[i] - from.node_targets[i]) * s;
        }
        LayoutFrame next = step(frames.empty() ? frame : frames.back(), graph, params, targets);
        const GravityPlan& label = t == duration_ticks ? to : from;
        next.mode = label.mode;
        next.centers = label.centers;
        next.groups = std::make_shared<const std::vector<std::size_t>>(label.groups);
        frames.push_back(std::move(next));
    }
    return frames;
}

}  // namespace cellgraph
