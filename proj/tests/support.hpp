#pragma once

// Small fixtures shared by the unit tests.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>

#include "sorts/scenario.hpp"

namespace sorts::testing {

/// Default spec with no batches; building its environment takes a fraction of a second.
inline ExperimentSpec default_spec() {
    ExperimentSpec s;
    s.name = "test";
    return s;
}

inline const Environment& default_environment() {
    static const Environment env = make_environment(default_spec());
    return env;
}

/// A straight two-waypoint path along +x at constant altitude.
inline ReferencePath straight_path(double length = 20.0, double z = 0.5) {
    return ReferencePath({{-length / 2, 0.0, z}, {length / 2, 0.0, z}}, "E");
}

/// Predictor that ignores its inputs and returns the uniform distribution.
class UniformPredictor final : public Predictor {
  public:
    std::string name() const override { return "uniform"; }
    ActionDistribution predict_agent(const JointHistory&, std::span<const AgentState>, PathRefs, std::size_t,
                                     std::uint64_t) const override {
        ActionDistribution d;
        d.fill(1.0 / static_cast<double>(kNumPrimitives));
        return d;
    }
};

/// Cost map whose every cell has the given value, covering a generous box around the origin.
inline CostMap constant_costmap(double value) {
    CostMap m({-30.0, -30.0, 0.0}, {1.0, 1.0, 0.5}, {60, 60, 6});
    for (auto& v : m.values())
        v = value;
    return m;
}

/// World snapshot of agents with single-state histories.
inline WorldSnapshot world_of(const std::vector<AgentState>& states, const std::vector<const ReferencePath*>& paths) {
    WorldSnapshot w;
    for (std::size_t i = 0; i < states.size(); ++i) {
        w.ids.push_back(static_cast<int>(i));
        w.histories.push_back({states[i]});
        w.paths.push_back(paths[i]);
    }
    return w;
}

/// Brute-force distance from a point to a polyline: 1 m samples along every segment, then a
/// ternary search inside the best 2 m window. Shares no code with ReferencePath::project.
inline double dense_distance(Vec3 p, const std::vector<Vec3>& polyline) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < polyline.size(); ++i) {
        const Vec3 a = polyline[i], b = polyline[i + 1];
        const double len = norm(b - a);
        const auto at = [&](double s) { return norm(p - (a + (s / len) * (b - a))); };
        const int n = static_cast<int>(std::ceil(len / 0.001));
        double best_s = 0.0, best_d = at(0.0);
        for (int k = 1; k <= n; ++k) {
            const double s = std::min(len, 0.001 * k);
            const double d = at(s);
            if (d < best_d) {
                best_d = d;
                best_s = s;
            }
        }
        double lo = std::max(0.0, best_s - 0.001), hi = std::min(len, best_s + 0.001);
        for (int it = 0; it < 200; ++it) {
            const double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
            if (at(m1) < at(m2))
                hi = m2;
            else
                lo = m1;
        }
        best = std::min({best, best_d, at(0.5 * (lo + hi))});
    }
    return best;
}

// Random flight of `ticks` primitives starting at `tick0`; the last transition may stop early.
inline Trajectory random_trajectory(std::mt19937_64& rng, AgentState start, int tick0, int ticks) {
    std::uniform_int_distribution<int> action(0, static_cast<int>(kNumPrimitives) - 1);
    std::uniform_int_distribution<int> tail(1, kSubSteps);
    Trajectory t;
    t.points.push_back({tick0, start});
    for (int k = 0; k < ticks; ++k) {
        const auto a = static_cast<PrimitiveIndex>(action(rng));
        const int flown = k + 1 == ticks ? tail(rng) : kSubSteps;
        const auto sub = intermediate_states(t.back(), a);
        t.points.push_back({tick0 + k + 1, sub[static_cast<std::size_t>(flown - 1)]});
        t.actions.push_back(a);
        t.substeps.push_back(flown);
    }
    return t;
}

// Position at absolute second `s`, or nullopt when the agent is not flying then.
inline std::optional<AgentState> at_second(const Trajectory& t, int s) {
    const int start = t.points.front().tick * kSubSteps;
    if (s <= start)
        return std::nullopt;
    const auto i = static_cast<std::size_t>((s - start - 1) / kSubSteps);
    if (i >= t.actions.size())
        return std::nullopt;
    const int k = (s - start - 1) % kSubSteps;
    if (k >= t.substeps[i])
        return std::nullopt;
    return intermediate_states(t.points[i].state, t.actions[i])[static_cast<std::size_t>(k)];
}

// Dense 1 s sampling over the whole shared time span.
inline double ls_oracle(const Trajectory& a, const Trajectory& b, double d) {
    const int lo = std::min(a.points.front().tick, b.points.front().tick) * kSubSteps;
    const int hi = std::max(a.points.back().tick, b.points.back().tick) * kSubSteps;
    double seconds = 0.0;
    for (int s = lo + 1; s <= hi; ++s) {
        const auto pa = at_second(a, s), pb = at_second(b, s);
        if (pa && pb && norm(pa->position() - pb->position()) < d)
            seconds += 1.0;
    }
    return seconds;
}

inline double re_oracle(const Trajectory& t, const ReferencePath& path) {
    double sum = 0.0;
    for (const auto& p : t.points)
        sum += dense_distance(p.state.position(), path.waypoints());
    return sum / static_cast<double>(t.points.size());
}

inline Trajectory translated(Trajectory t, Vec3 off) {
    for (auto& p : t.points) {
        p.state.x += off.x;
        p.state.y += off.y;
        p.state.z += off.z;
    }
    return t;
}

}  // namespace sorts::testing
