#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cellgraph/core.hpp"

namespace cellgraph {

/// Region quadtree over weighted points. Every cell keeps its total mass and
/// center of mass; leaves below the depth limit hold one point, leaves at the
/// limit hold all points that landed there.
class Quadtree {
public:
    static constexpr int kMaxDepth = 48;

    Quadtree(std::span<const Vec2> positions, std::span<const double> masses);

    double total_mass() const { return cells_.empty() ? 0.0 : cells_[0].mass; }
    Vec2 center_of_mass() const { return cells_.empty() ? Vec2{} : cells_[0].center; }
    std::size_t cell_count() const { return cells_.size(); }

    /// Repulsive force on point `i` (which must be one of the inserted points).
    Vec2 repulsion_on(std::size_t i, double constant, double theta) const;

private:
    struct Cell {
        Vec2 origin;  // lower corner
        double size = 0.0;
        double mass = 0.0;
        Vec2 center;
        std::int32_t child[4] = {-1, -1, -1, -1};
        std::vector<std::uint32_t> points;
        bool leaf = true;
    };

    void insert(std::uint32_t point);
    int quadrant(const Cell& cell, Vec2 p) const;
    std::int32_t make_child(std::int32_t parent, int quadrant);
    void summarize(std::int32_t cell);
    bool contains(const Cell& cell, Vec2 p) const;

    std::span<const Vec2> positions_;
    std::span<const double> masses_;
    std::vector<Cell> cells_;
};

}  // namespace cellgraph
