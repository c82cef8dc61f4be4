#pragma once

#include <array>
#include <span>
#include <vector>

#include "sorts/types.hpp"

namespace sorts {

inline constexpr std::array<double, 6> kAirspeeds = {0.030, 0.035, 0.040, 0.045, 0.050, 0.055};
inline constexpr std::array<double, 6> kVerticalRates = {-0.005, -0.0025, -0.001, 0.0, 0.001, 0.0025};
inline constexpr std::array<double, 7> kHeadingChangesDeg = {-90.0, -45.0, -15.0, 0.0, 15.0, 45.0, 90.0};

inline constexpr double kMaxAirspeed = kAirspeeds.back();

/// Grid coordinates of a primitive index (airspeed-major, then vertical rate, then turn).
struct PrimitiveGridIndex {
    int airspeed = 0;
    int vertical_rate = 0;
    int heading_change = 0;
};

inline constexpr PrimitiveIndex primitive_index(int airspeed, int vertical_rate, int heading_change) {
    return static_cast<PrimitiveIndex>(airspeed * 42 + vertical_rate * 7 + heading_change);
}

inline constexpr PrimitiveGridIndex grid_index(std::size_t index) {
    return {static_cast<int>(index / 42), static_cast<int>((index / 7) % 6), static_cast<int>(index % 7)};
}

/// The 252-element standard library, ordered by index.
const std::vector<MotionPrimitive>& primitive_library();

const MotionPrimitive& primitive(std::size_t index);

/// Sub-step positions of one primitive: intermediate_states(s, p)[k] is the state after k+1 seconds.
using SubSteps = std::array<AgentState, kSubSteps>;

/// Constant-turn-rate, constant-speed integration at 1 s sub-steps. Position advances along
/// the mid-sub-step heading; altitude is clamped at zero.
SubSteps intermediate_states(const AgentState& state, const MotionPrimitive& primitive);
SubSteps intermediate_states(const AgentState& state, std::size_t primitive_index);

AgentState step_dynamics(const AgentState& state, const MotionPrimitive& primitive);
AgentState step_dynamics(const AgentState& state, std::size_t primitive_index);

/// Euclidean 3D distance in km.
inline double separation(const AgentState& a, const AgentState& b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    const double dz = a.z - b.z;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

/// Minimum over sub-steps k of separation(a[k], b[k]).
double min_substep_separation(std::span<const AgentState> a, std::span<const AgentState> b);

/// Straight, level-rate extrapolation at the current heading and airspeed, 1 s sub-steps.
SubSteps constant_velocity_substeps(const AgentState& state, double vertical_rate = 0.0);

}  // namespace sorts
