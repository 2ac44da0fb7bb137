#include <cmath>
#include <fstream>
#include <random>

#include "doctest.h"

#include "cellgraph/fisheye.hpp"

using namespace cellgraph;

TEST_CASE("closed form values") {
    CHECK(fisheye_magnify(0.5, 3.0) == doctest::Approx(0.8));
    CHECK(fisheye_unmagnify(0.8, 3.0) == doctest::Approx(0.5));
    CHECK(fisheye_magnify(1.0, 7.5) == 1.0);
    CHECK(fisheye_magnify(0.0, 7.5) == 0.0);
    for (double x : {0.0, 0.1, 0.37, 0.99, 1.0}) CHECK(fisheye_magnify(x, 0.0) == x);
}

TEST_CASE("a node halfway to the rim moves to 0.8 of the radius") {
    const FisheyeSpec spec{{500, 500}, 3.0, 200.0, std::nullopt};
    const Vec2 out = apply_fisheye(Vec2{500 + 60, 500 - 80}, spec);  // r = 100
    CHECK((out - spec.focus).norm() == doctest::Approx(160.0));
    CHECK(out.x == doctest::Approx(500 + 96));
    CHECK(out.y == doctest::Approx(500 - 128));
    const Vec2 back = invert_fisheye(out, spec);
    CHECK(back.x == doctest::Approx(560));
    CHECK(back.y == doctest::Approx(420));
}

TEST_CASE("fixed points") {
    const FisheyeSpec spec{{300, 200}, 4.0, 100.0, std::nullopt};
    CHECK(apply_fisheye(spec.focus, spec) == spec.focus);
    CHECK(apply_fisheye(Vec2{450, 200}, spec) == Vec2{450, 200});  // beyond the radius
    CHECK(apply_fisheye(Vec2{400, 200}, spec) == Vec2{400, 200});  // on the rim
    const FisheyeSpec flat{{300, 200}, 0.0, 100.0, std::nullopt};
    CHECK(apply_fisheye(Vec2{333, 222}, flat) == Vec2{333, 222});
    CHECK(invert_fisheye(Vec2{333, 222}, flat) == Vec2{333, 222});
}

TEST_CASE("g expands, is monotone and meets the rim") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.0, 1.0), dist(0.0, 10.0);
    for (int i = 0; i < 20000; ++i) {
        const double d = dist(rng);
        const double a = u(rng), b = u(rng);
        const double lo = std::min(a, b), hi = std::max(a, b);
        CHECK(fisheye_magnify(lo, d) >= lo);
        if (lo < hi) CHECK(fisheye_magnify(lo, d) < fisheye_magnify(hi, d));
        CHECK(std::abs(fisheye_unmagnify(fisheye_magnify(lo, d), d) - lo) <= 1e-12);
    }
}

TEST_CASE("canvas bounds are preserved when the spec carries them") {
    std::mt19937_64 rng(32);
    const Canvas canvas{1200, 700};
    std::uniform_real_distribution<double> x(0.0, canvas.width), y(0.0, canvas.height), d(0.0, 10.0);
    for (int i = 0; i < 20000; ++i) {
        FisheyeSpec spec = FisheyeSpec::defaults_for({x(rng), y(rng)}, canvas);
        spec.distortion = d(rng);
        const Vec2 p{x(rng), y(rng)};
        const Vec2 q = apply_fisheye(p, spec);
        CHECK(canvas.contains(q));
        CHECK((invert_fisheye(q, spec) - p).norm() <= 1e-6);
        // bearing from the focus is unchanged
        if ((p - spec.focus).norm() > 1e-9) {
            const double before = std::atan2(p.y - spec.focus.y, p.x - spec.focus.x);
            const double after = std::atan2(q.y - spec.focus.y, q.x - spec.focus.x);
            CHECK(std::abs(std::remainder(after - before, 2 * M_PI)) <= 1e-9);
        }
    }
}

TEST_CASE("spec validation") {
    const Canvas canvas;
    CHECK_NOTHROW(FisheyeSpec::defaults_for({10, 10}, canvas).validate());
    CHECK(FisheyeSpec::defaults_for({10, 10}, canvas).radius == doctest::Approx(0.4 * canvas.diagonal()));
    CHECK(FisheyeSpec::defaults_for({10, 10}, canvas).distortion == 3.0);
    CHECK_THROWS_AS((FisheyeSpec{{10, 10}, -1.0, 10.0, std::nullopt}.validate()), InvalidArgument);
    CHECK_THROWS_AS((FisheyeSpec{{10, 10}, 1.0, 0.0, std::nullopt}.validate()), InvalidArgument);
    CHECK_THROWS_AS((FisheyeSpec{{-10, 10}, 1.0, 5.0, canvas}.validate()), InvalidArgument);
}

TEST_CASE("focusing a node keeps its neighbors visible") {
    std::ifstream in(CELLGRAPH_TEST_DATA "/cdr_75.csv");
    const auto net = build_network(parse_cdr(in).records);
    const auto g = LayoutGraph::from_network(net);
    const Canvas canvas;
    auto frame = run_until_converged(init_layout(g, 1, canvas), g, LayoutParams{},
                                     make_gravity_plan(LayoutMode::single, net, canvas, louvain(net, 1)), 2000)
                     .frame;
    for (std::size_t focus = 0; focus < net.node_count(); ++focus) {
        const auto spec = FisheyeSpec::defaults_for(frame.positions[focus], canvas);
        const auto view = apply_fisheye(frame, spec);
        CHECK(view.positions[focus] == frame.positions[focus]);
        std::size_t incident = 0;
        for (const auto& nb : net.neighbors(focus)) {
            ++incident;
            const double before = (frame.positions[nb.node] - frame.positions[focus]).norm();
            const double after = (view.positions[nb.node] - view.positions[focus]).norm();
            CHECK(after >= before - 1e-9);
        }
        // the view moves nodes only; the incident edge list is the network's
        CHECK(incident == net.neighbors(focus).size());
        CHECK(view.velocities == frame.velocities);
        CHECK(view.tick == frame.tick);
    }
}
