#pragma once

#include <optional>

#include "cellgraph/core.hpp"
#include "cellgraph/layout.hpp"

namespace cellgraph {

/// Radial graphical fisheye around `focus`. Inside the effect radius a point
/// at normalized distance x moves to g(x) = (d + 1) x / (d x + 1).
struct FisheyeSpec {
    Vec2 focus;
    double distortion = 3.0;
    double radius = 1.0;
    /// When set, the effect radius along each bearing is clipped to the
    /// distance from the focus to the canvas border, so points inside the
    /// canvas stay inside.
    std::optional<Canvas> bounds;

    /// Throws InvalidArgument unless distortion >= 0, radius > 0 and the
    /// focus lies inside the bounds (when given).
    void validate() const;

    /// d = 3, radius = 0.4 * canvas diagonal, bounded by the canvas.
    static FisheyeSpec defaults_for(Vec2 focus, const Canvas& canvas);
};

/// g(x) for x in [0, 1].
double fisheye_magnify(double x, double distortion);
/// Inverse of g: x = y / ((d + 1) - d y).
double fisheye_unmagnify(double y, double distortion);

Vec2 apply_fisheye(Vec2 point, const FisheyeSpec& spec);
Vec2 invert_fisheye(Vec2 point, const FisheyeSpec& spec);

/// Distorts positions only; velocities and simulation metadata are copied.
LayoutFrame apply_fisheye(const LayoutFrame& frame, const FisheyeSpec& spec);

}  // namespace cellgraph
