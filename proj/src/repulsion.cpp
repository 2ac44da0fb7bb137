#include <algorithm>
#include <limits>

#include "cellgraph/kernels.hpp"
#include "cellgraph/quadtree.hpp"

namespace cellgraph {

Quadtree::Quadtree(std::span<const Vec2> positions, std::span<const double> masses)
    : positions_(positions), masses_(masses) {
    if (positions.size() != masses.size()) {
        throw InvalidArgument("Quadtree: positions and masses differ in length");
    }
    if (positions.empty()) return;

    Vec2 lo = positions[0];
    Vec2 hi = positions[0];
    for (const auto& p : positions) {
        lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
        hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
    }
    const double extent = std::max({hi.x - lo.x, hi.y - lo.y, 1e-9});
    Cell root;
    root.origin = lo;
    root.size = extent * (1.0 + 1e-9);
    cells_.reserve(positions.size() * 2);
    cells_.push_back(std::move(root));
    for (std::uint32_t i = 0; i < positions.size(); ++i) insert(i);
    summarize(0);
}

int Quadtree::quadrant(const Cell& cell, Vec2 p) const {
    const double half = cell.size / 2.0;
    const int east = p.x >= cell.origin.x + half ? 1 : 0;
    const int north = p.y >= cell.origin.y + half ? 2 : 0;
    return east | north;
}

std::int32_t Quadtree::make_child(std::int32_t parent, int q) {
    Cell child;
    const double half = cells_[parent].size / 2.0;
    child.size = half;
    child.origin = {cells_[parent].origin.x + ((q & 1) ? half : 0.0), cells_[parent].origin.y + ((q & 2) ? half : 0.0)};
    cells_.push_back(std::move(child));
    const auto index = static_cast<std::int32_t>(cells_.size() - 1);
    cells_[parent].child[q] = index;
    return index;
}

void Quadtree::insert(std::uint32_t point) {
    std::int32_t current = 0;
    int depth = 0;
    const Vec2 p = positions_[point];
    while (true) {
        Cell& cell = cells_[current];
        if (cell.leaf) {
            if (cell.points.empty() || depth >= kMaxDepth) {
                cell.points.push_back(point);
                return;
            }
            // split: push the resident point one level down
            cell.leaf = false;
            const auto resident = cell.points.front();
            cell.points.clear();
            const int rq = quadrant(cells_[current], positions_[resident]);
            const auto child = make_child(current, rq);
            cells_[child].points.push_back(resident);
        }
        const int q = quadrant(cells_[current], p);
        auto next = cells_[current].child[q];
        if (next < 0) next = make_child(current, q);
        current = next;
        ++depth;
    }
}

void Quadtree::summarize(std::int32_t index) {
    // iterative post-order keeps deep degenerate trees off the call stack
    std::vector<std::pair<std::int32_t, bool>> stack{{index, false}};
    while (!stack.empty()) {
        auto [c, expanded] = stack.back();
        stack.pop_back();
        Cell& cell = cells_[c];
        if (cell.leaf) {
            double mass = 0.0;
            Vec2 weighted;
            for (auto i : cell.points) {
                mass += masses_[i];
                weighted += positions_[i] * masses_[i];
            }
            cell.mass = mass;
            cell.center = mass > 0 ? weighted * (1.0 / mass) : cell.origin;
            continue;
        }
        if (!expanded) {
            stack.emplace_back(c, true);
            for (auto child : cell.child) {
                if (child >= 0) stack.emplace_back(child, false);
            }
            continue;
        }
        double mass = 0.0;
        Vec2 weighted;
        for (auto child : cell.child) {
            if (child < 0) continue;
            mass += cells_[child].mass;
            weighted += cells_[child].center * cells_[child].mass;
        }
        cell.mass = mass;
        cell.center = mass > 0 ? weighted * (1.0 / mass) : cell.origin;
    }
}

bool Quadtree::contains(const Cell& cell, Vec2 p) const {
    return p.x >= cell.origin.x && p.x <= cell.origin.x + cell.size && p.y >= cell.origin.y &&
           p.y <= cell.origin.y + cell.size;
}

namespace {

Vec2 pair_force(Vec2 at, Vec2 from, double strength) {
    const Vec2 d = at - from;
    const double r2 = d.dot(d);
    if (r2 == 0.0) return {};
    const double r = std::sqrt(r2);
    return d * (strength / (r2 * r));
}

}  // namespace

Vec2 Quadtree::repulsion_on(std::size_t i, double constant, double theta) const {
    if (cells_.empty()) return {};
    const Vec2 p = positions_[i];
    const double scale = constant * masses_[i];
    Vec2 force;
    std::int32_t stack[4 * kMaxDepth + 8];
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
        const Cell& cell = cells_[stack[--top]];
        if (cell.mass == 0.0) continue;
        if (cell.leaf) {
            for (auto j : cell.points) {
                if (j != i) force += pair_force(p, positions_[j], scale * masses_[j]);
            }
            continue;
        }
        if (theta > 0.0 && !contains(cell, p)) {
            const double dist = (p - cell.center).norm();
            if (dist > 0.0 && cell.size / dist < theta) {
                force += pair_force(p, cell.center, scale * cell.mass);
                continue;
            }
        }
        for (int q = 3; q >= 0; --q) {
            if (cell.child[q] >= 0) stack[top++] = cell.child[q];
        }
    }
    return force;
}

namespace kernels {

std::vector<Vec2> repulsion_exact(std::span<const Vec2> positions, std::span<const double> masses, double constant) {
    if (positions.size() != masses.size()) throw InvalidArgument("repulsion_exact: size mismatch");
    const std::size_t n = positions.size();
    std::vector<Vec2> forces(n);
    for (std::size_t i = 0; i < n; ++i) {
        Vec2 f;
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) f += pair_force(positions[i], positions[j], constant * masses[i] * masses[j]);
        }
        forces[i] = f;
    }
    return forces;
}

std::vector<Vec2> repulsion_barnes_hut(std::span<const Vec2> positions, std::span<const double> masses,
                                       double constant, double theta) {
    const Quadtree tree(positions, masses);
    std::vector<Vec2> forces(positions.size());
    const auto n = static_cast<std::ptrdiff_t>(positions.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        forces[static_cast<std::size_t>(i)] = tree.repulsion_on(static_cast<std::size_t>(i), constant, theta);
    }
    return forces;
}

std::vector<Vec2> repulsion_barnes_hut_serial(std::span<const Vec2> positions, std::span<const double> masses,
                                              double constant, double theta) {
    const Quadtree tree(positions, masses);
    std::vector<Vec2> forces(positions.size());
    for (std::size_t i = 0; i < positions.size(); ++i) forces[i] = tree.repulsion_on(i, constant, theta);
    return forces;
}

}  // namespace kernels

}  // namespace cellgraph
