#include <doctest.h>

#include <random>

#include "support.hpp"

using namespace sorts;
using sorts::testing::dense_distance;
using sorts::testing::straight_path;

TEST_CASE("sector bearings run counter-clockwise from east") {
    CHECK(sector_bearing("E") == 0.0);
    CHECK(sector_bearing("N") == doctest::Approx(std::numbers::pi / 2));
    CHECK(sector_bearing("W") == doctest::Approx(std::numbers::pi));
    CHECK(sector_bearing("SE") == doctest::Approx(7 * std::numbers::pi / 4));
    CHECK(is_sector_label("NW"));
    CHECK_FALSE(is_sector_label("X"));
    CHECK_THROWS_AS(sector_bearing("up"), ConfigError);
}

TEST_CASE("pattern library: one path per sector ending at the threshold") {
    const RunwayPose rw{2.0, -1.0, 0.3};
    const auto lib = build_pattern_library(rw, 0.3);
    REQUIRE(lib.size() == 8);
    for (const auto& p : lib) {
        CHECK(p.waypoints().size() >= 2);
        CHECK(norm(p.goal() - rw.threshold()) < 1e-6);
        const Vec3 spawn = p.waypoints().front();
        CHECK(std::hypot(spawn.x - rw.x, spawn.y - rw.y) == doctest::Approx(10.0));
        CHECK(spawn.z == doctest::Approx(0.3));
        for (std::size_t i = 1; i < p.waypoints().size(); ++i)
            CHECK(norm(p.waypoints()[i] - p.waypoints()[i - 1]) > 0.0);
    }
    CHECK(path_for_sector(lib, "S").entry_label() == "S");
    CHECK_THROWS(path_for_sector(lib, "Q"));
}

TEST_CASE("reference paths reject degenerate polylines") {
    CHECK_THROWS_AS(ReferencePath({{0, 0, 0}}, "N"), InputError);
    CHECK_THROWS_AS(ReferencePath({{0, 0, 0}, {0, 0, 0}}, "N"), InputError);
}

TEST_CASE("cross-track error examples") {
    const ReferencePath p({{0, 0, 0.3}, {5, 0, 0.3}, {5, 5, 0.3}}, "E");
    CHECK(cross_track_error({5, 0, 0.3, 0, 0}, p) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(cross_track_error({2, 1, 0.3, 0, 0}, p) == doctest::Approx(1.0).epsilon(1e-12));
    // Beyond the last waypoint along the final segment direction.
    const AgentState beyond{5, 5.5, 0.3, 0, 0};
    CHECK(std::abs(cross_track_error(beyond, p) - dense_distance(beyond.position(), p.waypoints())) < 1e-9);
    CHECK(cross_track_error(beyond, p) == doctest::Approx(0.5));
}

TEST_CASE("cross-track error matches the dense-sampling oracle") {
    const auto lib = build_pattern_library(RunwayPose{}, 0.3);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-11.0, 11.0), z(0.0, 0.8);
    for (int i = 0; i < 40; ++i) {
        const auto& p = lib[static_cast<std::size_t>(i) % lib.size()];
        const AgentState s{u(rng), u(rng), z(rng), 0, 0};
        CHECK(std::abs(cross_track_error(s, p) - dense_distance(s.position(), p.waypoints())) < 1e-9);
    }
}

TEST_CASE("cross-track error vanishes exactly on the polyline") {
    const ReferencePath p({{0, 0, 0.3}, {3, 4, 0.3}, {3, 9, 0.0}}, "E");
    for (double s = 0.0; s <= p.length(); s += 0.37) {
        const Vec3 q = p.point_at(s);
        CHECK(cross_track_error({q.x, q.y, q.z, 0, 0}, p) < 1e-9);
    }
    CHECK(cross_track_error({1, 1, 0.3, 0, 0}, p) > 1e-3);
}

TEST_CASE("reference prior is a distribution") {
    const auto lib = build_pattern_library(RunwayPose{}, 0.3);
    const auto pr = reference_prior({4, 7, 0.3, 2.0, 0.04}, lib[2]);
    CHECK(is_valid_distribution(pr));
}

TEST_CASE("on a straight level leg the prior favours cruise, level, straight") {
    const ReferencePath path = straight_path();
    const AgentState s{0, 0, 0.5, 0, 0.04};
    const ReferencePriorParams prm;

    // Exhaustive oracle: score every successor with a dense-sampled cross-track error.
    std::size_t best = 0;
    double best_score = -1e300;
    for (std::size_t a = 0; a < kNumPrimitives; ++a) {
        const AgentState n = step_dynamics(s, a);
        const double xte = dense_distance(n.position(), path.waypoints());
        const double back = std::max(0.0, s.x - n.x);
        const double score = -prm.beta_cross_track * xte - prm.beta_progress * back -
                             prm.beta_speed * std::abs(primitive(a).commanded_airspeed - prm.cruise_airspeed);
        if (score > best_score + 1e-12) {
            best_score = score;
            best = a;
        }
    }
    const auto pr = reference_prior(s, path);
    CHECK(argmax_lowest(pr) == best);
    CHECK(best == primitive_index(2, 3, 3));
}

TEST_CASE("left of track the prior turns back toward it") {
    const ReferencePath path = straight_path();
    const AgentState left{0, 1.0, 0.5, 0, 0.04};  // north of an eastbound track
    const auto g = grid_index(argmax_lowest(reference_prior(left, path)));
    CHECK(kHeadingChangesDeg[static_cast<std::size_t>(g.heading_change)] < 0.0);
    const AgentState right{0, -1.0, 0.5, 0, 0.04};
    const auto gr = grid_index(argmax_lowest(reference_prior(right, path)));
    CHECK(kHeadingChangesDeg[static_cast<std::size_t>(gr.heading_change)] > 0.0);
}

TEST_CASE("reference state score") {
    const ReferencePath path = straight_path();
    CHECK(reference_state_score({0, 0, 0.5, 0, 0.04}, path) == 1.0);
    CHECK(reference_state_score({0, 0.5, 0.5, 0, 0.04}, path) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    double prev = 2.0;
    for (double off = 0.0; off < 3.0; off += 0.1) {
        const double v = reference_state_score({0, off, 0.5, 0, 0.04}, path);
        CHECK(v < prev);
        prev = v;
    }
}

TEST_CASE("reference prior is invariant under joint translation") {
    const auto lib = build_pattern_library(RunwayPose{}, 0.3);
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(-8.0, 8.0), h(0.0, kTwoPi);
    for (int i = 0; i < 10; ++i) {
        const auto& p = lib[static_cast<std::size_t>(i) % lib.size()];
        const AgentState s{u(rng), u(rng), 0.3, h(rng), 0.04};
        const Vec3 off{u(rng), u(rng), 0.0};
        const auto a = reference_prior(s, p);
        const auto b = reference_prior({s.x + off.x, s.y + off.y, s.z, s.heading, s.airspeed}, p.translated(off));
        for (std::size_t k = 0; k < kNumPrimitives; ++k)
            CHECK(a[k] == doctest::Approx(b[k]).epsilon(1e-9));
    }
}

TEST_CASE("path library JSON round trip") {
    const auto lib = build_pattern_library(RunwayPose{1, 2, 0.5}, 0.3);
    const auto j = path_library_to_json(lib);
    CHECK(j.at("version") == "v1");
    const auto back = path_library_from_json(j);
    REQUIRE(back.size() == lib.size());
    for (std::size_t i = 0; i < lib.size(); ++i)
        CHECK(back[i] == lib[i]);
    auto bad = j;
    bad["version"] = "v0";
    CHECK_THROWS(path_library_from_json(bad));
}
