#include "cellgraph/fisheye.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cellgraph {

namespace {

// Distance from `focus` to the canvas border along unit direction `dir`.
double border_distance(Vec2 focus, Vec2 dir, const Canvas& canvas) {
    double t = std::numeric_limits<double>::infinity();
    if (dir.x > 0) t = std::min(t, (canvas.width - focus.x) / dir.x);
    if (dir.x < 0) t = std::min(t, -focus.x / dir.x);
    if (dir.y > 0) t = std::min(t, (canvas.height - focus.y) / dir.y);
    if (dir.y < 0) t = std::min(t, -focus.y / dir.y);
    return std::max(t, 0.0);
}

double effect_radius(const FisheyeSpec& spec, Vec2 dir) {
    if (!spec.bounds || !spec.bounds->contains(spec.focus)) return spec.radius;
    return std::min(spec.radius, border_distance(spec.focus, dir, *spec.bounds));
}

template <typename Radial>
Vec2 remap(Vec2 point, const FisheyeSpec& spec, Radial radial) {
    const Vec2 offset = point - spec.focus;
    const double r = offset.norm();
    if (r == 0.0 || spec.distortion == 0.0) return point;
    const Vec2 dir = offset * (1.0 / r);
    const double limit = effect_radius(spec, dir);
    if (!(limit > 0.0) || r >= limit) return point;
    const double mapped = radial(r / limit) * limit;
    // scale the offset instead of rebuilding from an angle: bearing is exact
    return spec.focus + offset * (mapped / r);
}

}  // namespace

void FisheyeSpec::validate() const {
    if (!(distortion >= 0.0) || !std::isfinite(distortion)) throw InvalidArgument("fisheye distortion must be >= 0");
    if (!(radius > 0.0) || !std::isfinite(radius)) throw InvalidArgument("fisheye radius must be > 0");
    if (!std::isfinite(focus.x) || !std::isfinite(focus.y)) throw InvalidArgument("fisheye focus must be finite");
    if (bounds && !bounds->contains(focus)) throw InvalidArgument("fisheye focus lies outside the canvas");
}

FisheyeSpec FisheyeSpec::defaults_for(Vec2 focus, const Canvas& canvas) {
    return FisheyeSpec{focus, 3.0, 0.4 * canvas.diagonal(), canvas};
}

double fisheye_magnify(double x, double distortion) {
    return (distortion + 1.0) * x / (distortion * x + 1.0);
}

double fisheye_unmagnify(double y, double distortion) {
    return y / ((distortion + 1.0) - distortion * y);
}

Vec2 apply_fisheye(Vec2 point, const FisheyeSpec& spec) {
    return remap(point, spec, [&](double x) { return fisheye_magnify(x, spec.distortion); });
}

Vec2 invert_fisheye(Vec2 point, const FisheyeSpec& spec) {
    return remap(point, spec, [&](double y) { return fisheye_unmagnify(y, spec.distortion); });
}

LayoutFrame apply_fisheye(const LayoutFrame& frame, const FisheyeSpec& spec) {
    LayoutFrame out = frame;
    for (auto& p : out.positions) p = apply_fisheye(p, spec);
    return out;
}

}  // namespace cellgraph
