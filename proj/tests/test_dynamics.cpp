#include <doctest.h>

#include <cstring>
#include <random>
#include <set>
#include <tuple>

#include "sorts/dynamics.hpp"

using namespace sorts;

TEST_CASE("primitive library has 252 distinct, ordered primitives") {
    const auto& lib = primitive_library();
    REQUIRE(lib.size() == 252);

    const auto& first = lib[0];
    CHECK(first.commanded_airspeed == kAirspeeds.front());
    CHECK(first.vertical_rate == kVerticalRates.front());
    CHECK(first.heading_change == doctest::Approx(-std::numbers::pi / 2));

    std::set<std::tuple<double, double, double>> seen;
    for (const auto& p : lib) {
        seen.insert({p.commanded_airspeed, p.vertical_rate, p.heading_change});
        CHECK(p.duration == 20.0);
    }
    CHECK(seen.size() == 252);

    // Airspeed-major, then vertical rate, then heading change.
    for (std::size_t i = 0; i < lib.size(); ++i) {
        const auto g = grid_index(i);
        CHECK(primitive_index(g.airspeed, g.vertical_rate, g.heading_change) == i);
        CHECK(lib[i].commanded_airspeed == kAirspeeds[static_cast<std::size_t>(g.airspeed)]);
        CHECK(lib[i].vertical_rate == kVerticalRates[static_cast<std::size_t>(g.vertical_rate)]);
        CHECK(lib[i].heading_change ==
              doctest::Approx(kHeadingChangesDeg[static_cast<std::size_t>(g.heading_change)] * std::numbers::pi / 180));
    }
}

TEST_CASE("straight level flight covers v times 20 s") {
    const AgentState s{0, 0, 0.5, 0, 0.04};
    const AgentState e = step_dynamics(s, MotionPrimitive{0.04, 0.0, 0.0});
    CHECK(e.x == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(e.y == doctest::Approx(0.0));
    CHECK(e.z == doctest::Approx(0.5));
    CHECK(e.heading == 0.0);
    CHECK(e.airspeed == 0.04);
}

TEST_CASE("full turns return to the initial heading") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> h(0.0, kTwoPi);
    for (int k = -2; k <= 2; ++k) {
        for (int trial = 0; trial < 20; ++trial) {
            const AgentState s{1.0, 2.0, 0.3, h(rng), 0.04};
            const AgentState e = step_dynamics(s, MotionPrimitive{0.045, 0.0, kTwoPi * k});
            CHECK(std::abs(wrap_angle(e.heading - s.heading)) < 1e-9);
        }
    }
}

TEST_CASE("quarter turn matches the closed-form circular arc") {
    const AgentState s{0, 0, 0.5, 0, 0.04};
    const double omega = (std::numbers::pi / 2) / 20.0;
    const double r = 0.04 / omega;
    const AgentState e = step_dynamics(s, MotionPrimitive{0.04, 0.0, std::numbers::pi / 2});
    // Counter-clockwise quarter circle starting east: centre (0, r), end (r, r).
    CHECK(std::hypot(e.x - r, e.y - r) < 1e-3);
    CHECK(e.heading == doctest::Approx(std::numbers::pi / 2).epsilon(1e-12));
}

TEST_CASE("intermediate states end at step_dynamics and are evenly spaced on straight legs") {
    const AgentState s{3, -1, 0.4, 1.2, 0.05};
    for (std::size_t i = 0; i < kNumPrimitives; ++i) {
        const auto sub = intermediate_states(s, i);
        const auto end = step_dynamics(s, i);
        CHECK(sub.back() == end);
    }
    const auto sub = intermediate_states(s, primitive_index(3, 3, 3));
    const double v = kAirspeeds[3];
    AgentState prev = s;
    for (const auto& p : sub) {
        CHECK(separation(prev, p) == doctest::Approx(v).epsilon(1e-12));
        // Collinear with the start heading.
        const double cross = std::cos(s.heading) * (p.y - s.y) - std::sin(s.heading) * (p.x - s.x);
        CHECK(std::abs(cross) < 1e-12);
        prev = p;
    }
}

TEST_CASE("positive vertical rate climbs strictly at every sub-step") {
    const AgentState s{0, 0, 0.3, 0.7, 0.04};
    for (std::size_t i = 0; i < kNumPrimitives; ++i) {
        if (primitive(i).vertical_rate <= 0.0)
            continue;
        double z = s.z;
        for (const auto& p : intermediate_states(s, i)) {
            CHECK(p.z > z);
            z = p.z;
        }
    }
}

TEST_CASE("altitude is clamped at the ground") {
    const AgentState s{0, 0, 0.02, 0, 0.04};
    const auto sub = intermediate_states(s, primitive_index(2, 0, 3));
    for (const auto& p : sub)
        CHECK(p.z >= 0.0);
    CHECK(sub.back().z == 0.0);
}

TEST_CASE("separation: identity, axis and 3-4-5") {
    CHECK(separation(AgentState{1, 2, 3, 0, 0}, AgentState{1, 2, 3, 1, 1}) == 0.0);
    CHECK(separation(AgentState{0, 0, 0, 0, 0}, AgentState{0.3, 0, 0, 0, 0}) == doctest::Approx(0.3));
    CHECK(separation(AgentState{0.1, 0.2, 0.2, 0, 0}, AgentState{0.4, 0.6, 0.2, 0, 0}) == doctest::Approx(0.5));
}

TEST_CASE("per-primitive invariants: heading change, path length, determinism") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-5.0, 5.0), h(0.0, kTwoPi);
    for (int trial = 0; trial < 10; ++trial) {
        const AgentState s{u(rng), u(rng), 0.5 + 0.05 * u(rng), h(rng), 0.04};
        for (std::size_t i = 0; i < kNumPrimitives; ++i) {
            const auto& p = primitive(i);
            const auto sub = intermediate_states(s, i);
            CHECK(std::abs(wrap_angle(sub.back().heading - s.heading - p.heading_change)) < 1e-9);
            CHECK(sub.back().heading >= 0.0);
            CHECK(sub.back().heading < kTwoPi);
            double length = 0.0;
            AgentState prev = s;
            for (const auto& q : sub) {
                length += std::hypot(q.x - prev.x, q.y - prev.y);
                prev = q;
            }
            CHECK(std::abs(length - p.commanded_airspeed * 20.0) < 1e-6);
            const auto again = intermediate_states(s, i);
            CHECK(std::memcmp(sub.data(), again.data(), sizeof(sub)) == 0);
        }
    }
}

TEST_CASE("separation is symmetric and obeys the triangle inequality") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    for (int i = 0; i < 1000; ++i) {
        const AgentState a{u(rng), u(rng), std::abs(u(rng)), 0, 0};
        const AgentState b{u(rng), u(rng), std::abs(u(rng)), 0, 0};
        const AgentState c{u(rng), u(rng), std::abs(u(rng)), 0, 0};
        CHECK(separation(a, b) == separation(b, a));
        CHECK(separation(a, c) <= separation(a, b) + separation(b, c) + 1e-12);
    }
}

TEST_CASE("heading normalization") {
    CHECK(normalize_heading(-0.5) == doctest::Approx(kTwoPi - 0.5));
    CHECK(normalize_heading(kTwoPi) == 0.0);
    CHECK(normalize_heading(3 * kTwoPi + 1.0) == doctest::Approx(1.0));
    CHECK(wrap_angle(kTwoPi - 0.1) == doctest::Approx(-0.1));
}

TEST_CASE("constant-velocity extrapolation and minimum sub-step separation") {
    const AgentState a{0, 0, 0.5, 0, 0.04};
    const AgentState b{0, 1, 0.5, 0, 0.04};
    const auto ta = constant_velocity_substeps(a);
    const auto tb = constant_velocity_substeps(b);
    CHECK(ta.back().x == doctest::Approx(0.8));
    CHECK(min_substep_separation(ta, tb) == doctest::Approx(1.0));
}
