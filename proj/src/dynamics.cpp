#include "sorts/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace sorts {

ActionDistribution softmax(const ActionScores& scores) {
    const double top = *std::max_element(scores.begin(), scores.end());
    ActionDistribution p{};
    double total = 0.0;
    for (std::size_t i = 0; i < kNumPrimitives; ++i) {
        p[i] = std::exp(scores[i] - top);
        total += p[i];
    }
    for (double& v : p)
        v /= total;
    return p;
}

bool is_valid_distribution(const ActionDistribution& p, double tol) {
    double total = 0.0;
    for (double v : p) {
        if (!(v >= 0.0))
            return false;
        total += v;
    }
    return std::abs(total - 1.0) <= tol;
}

namespace {

std::vector<MotionPrimitive> build_library() {
    std::vector<MotionPrimitive> lib;
    lib.reserve(kNumPrimitives);
    for (double v : kAirspeeds)
        for (double vr : kVerticalRates)
            for (double deg : kHeadingChangesDeg)
                lib.push_back({v, vr, deg * std::numbers::pi / 180.0, kPrimitiveDuration});
    return lib;
}

// Horizontal displacement after each sub-step for a heading-0 start. Rotating these by the
// start heading gives the same positions as integrating from any heading.
struct Offsets {
    std::array<double, kSubSteps> dx;
    std::array<double, kSubSteps> dy;
};

Offsets integrate_offsets(const MotionPrimitive& p) {
    Offsets o{};
    const double rate = p.heading_change / p.duration;
    double x = 0.0;
    double y = 0.0;
    for (int k = 0; k < kSubSteps; ++k) {
        const double mid = rate * (static_cast<double>(k) + 0.5) * kSubStep;
        x += p.commanded_airspeed * std::cos(mid) * kSubStep;
        y += p.commanded_airspeed * std::sin(mid) * kSubStep;
        o.dx[k] = x;
        o.dy[k] = y;
    }
    return o;
}

const std::vector<Offsets>& offset_table() {
    static const std::vector<Offsets> table = [] {
        std::vector<Offsets> t;
        t.reserve(kNumPrimitives);
        for (const auto& p : primitive_library())
            t.push_back(integrate_offsets(p));
        return t;
    }();
    return table;
}

SubSteps apply_offsets(const AgentState& s, const MotionPrimitive& p, const Offsets& o) {
    SubSteps out;
    const double c = std::cos(s.heading);
    const double sn = std::sin(s.heading);
    const double rate = p.heading_change / p.duration;
    double z = s.z;
    for (int k = 0; k < kSubSteps; ++k) {
        z = std::max(0.0, z + p.vertical_rate * kSubStep);
        AgentState& q = out[k];
        q.x = s.x + c * o.dx[k] - sn * o.dy[k];
        q.y = s.y + sn * o.dx[k] + c * o.dy[k];
        q.z = z;
        q.heading = normalize_heading(s.heading + rate * static_cast<double>(k + 1) * kSubStep);
        q.airspeed = p.commanded_airspeed;
    }
    return out;
}

}  // namespace

const std::vector<MotionPrimitive>& primitive_library() {
    static const std::vector<MotionPrimitive> lib = build_library();
    return lib;
}

const MotionPrimitive& primitive(std::size_t index) { return primitive_library().at(index); }

SubSteps intermediate_states(const AgentState& state, std::size_t primitive_index) {
    return apply_offsets(state, primitive_library().at(primitive_index), offset_table()[primitive_index]);
}

SubSteps intermediate_states(const AgentState& state, const MotionPrimitive& p) {
    const auto& lib = primitive_library();
    const auto it = std::find(lib.begin(), lib.end(), p);
    if (it != lib.end())
        return intermediate_states(state, static_cast<std::size_t>(it - lib.begin()));
    return apply_offsets(state, p, integrate_offsets(p));
}

AgentState step_dynamics(const AgentState& state, std::size_t primitive_index) {
    return intermediate_states(state, primitive_index).back();
}

AgentState step_dynamics(const AgentState& state, const MotionPrimitive& p) {
    return intermediate_states(state, p).back();
}

double min_substep_separation(std::span<const AgentState> a, std::span<const AgentState> b) {
    double best = std::numeric_limits<double>::infinity();
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t k = 0; k < n; ++k)
        best = std::min(best, separation(a[k], b[k]));
    return best;
}

SubSteps constant_velocity_substeps(const AgentState& s, double vertical_rate) {
    SubSteps out;
    const double vx = s.airspeed * std::cos(s.heading);
    const double vy = s.airspeed * std::sin(s.heading);
    for (int k = 0; k < kSubSteps; ++k) {
        const double t = static_cast<double>(k + 1) * kSubStep;
        out[k] = {s.x + vx * t, s.y + vy * t, std::max(0.0, s.z + vertical_rate * t), s.heading, s.airspeed};
    }
    return out;
}

}  // namespace sorts
