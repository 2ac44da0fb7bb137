#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cellgraph/analytics.hpp"
#include "cellgraph/core.hpp"
#include "cellgraph/network.hpp"

namespace cellgraph {

enum class LayoutMode { single, foci, semantic };
std::string_view to_string(LayoutMode mode);
/// Accepts "single", "foci", "semantic". Throws InvalidArgument.
LayoutMode parse_layout_mode(std::string_view text);

/// Physical model of the force-directed simulation.
struct LayoutParams {
    double spring_stiffness = 0.08;
    double spring_rest_length = 30.0;
    double repulsion_constant = 5000.0;
    double gravity_strength = 0.05;
    double viscosity = 0.15;  // fraction of velocity removed per tick
    double theta = 0.5;
    double time_step = 1.0;
    double max_speed = 50.0;

    /// Throws InvalidArgument when a field is negative, viscosity >= 1 or
    /// time_step <= 0.
    void validate() const;
    bool operator==(const LayoutParams&) const = default;
};

/// Simulation view of a network: springs along undirected links, node mass
/// 1 + degree (scales repulsion).
struct LayoutGraph {
    std::shared_ptr<const std::vector<std::string>> ids;
    std::vector<std::pair<std::size_t, std::size_t>> springs;
    std::vector<double> masses;

    std::size_t size() const { return masses.size(); }
    static LayoutGraph from_network(const CrimeNetwork& network);
};

/// Per-node gravity targets plus the display metadata for a mode.
struct GravityPlan {
    LayoutMode mode = LayoutMode::single;
    std::vector<Vec2> node_targets;
    std::vector<Vec2> centers;
    std::vector<std::size_t> groups;  // community / category shown per node
};

struct FociTargets {
    std::vector<Vec2> centers;  // indexed by community
};

struct LayoutFrame {
    std::uint64_t tick = 0;
    LayoutMode mode = LayoutMode::single;
    Canvas canvas;
    std::uint64_t seed = 0;
    std::shared_ptr<const std::vector<std::string>> ids;
    std::vector<Vec2> positions;
    std::vector<Vec2> velocities;
    /// Gravity target each node was pulled toward during the last tick.
    std::vector<Vec2> targets;
    std::vector<Vec2> centers;
    std::shared_ptr<const std::vector<std::size_t>> groups;
    double kinetic_energy = 0.0;
    /// Largest per-node displacement of the last tick.
    double max_displacement = 0.0;

    std::size_t size() const { return positions.size(); }
};

double kinetic_energy(std::span<const Vec2> velocities);

/// Seeded start position of a node, uniform over the central half of the
/// canvas. Depends only on (seed, id).
Vec2 initial_position(std::uint64_t seed, std::string_view id, const Canvas& canvas);

/// Throws InvalidArgument for a non-positive canvas.
LayoutFrame init_layout(const LayoutGraph& graph, std::uint64_t seed, const Canvas& canvas);

/// Centers for k communities: the canvas center for k = 1, otherwise evenly
/// spaced on a circle of radius 0.35 * min(width, height), largest community
/// at angle 0 and continuing clockwise on screen (y grows downward).
FociTargets foci_targets(const CommunityAssignment& assignment, const Canvas& canvas);

GravityPlan make_gravity_plan(LayoutMode mode, const CrimeNetwork& network, const Canvas& canvas,
                              const CommunityAssignment& communities);

/// One semi-implicit Euler tick.
LayoutFrame step(const LayoutFrame& frame, const LayoutGraph& graph, const LayoutParams& params,
                 std::span<const Vec2> targets);
LayoutFrame step(const LayoutFrame& frame, const LayoutGraph& graph, const LayoutParams& params,
                 const GravityPlan& plan);

/// Displacement threshold used for convergence: 1e-3 of the canvas diagonal.
double convergence_threshold(const Canvas& canvas);

struct ConvergenceResult {
    LayoutFrame frame;
    bool converged = false;
    std::uint64_t ticks = 0;
};

/// Steps until the largest per-tick displacement falls under the
/// convergence threshold, or `max_ticks` ticks ran. max_ticks must be > 0.
ConvergenceResult run_until_converged(const LayoutFrame& frame, const LayoutGraph& graph, const LayoutParams& params,
                                      const GravityPlan& plan, std::uint64_t max_ticks);

/// Moves gravity targets linearly from `from` to `to` over `duration_ticks`
/// ticks while stepping; frame k uses from + (to - from) * k / duration.
/// The last frame carries `to.mode`.
std::vector<LayoutFrame> transition(const LayoutFrame& frame, const LayoutGraph& graph, const LayoutParams& params,
                                    const GravityPlan& from, const GravityPlan& to, int duration_ticks);

}  // namespace cellgraph
