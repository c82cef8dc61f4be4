#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace sorts {

/// Number of motion primitives in the standard library (6 airspeeds x 6 vertical rates x 7 turns).
inline constexpr std::size_t kNumPrimitives = 252;
/// Duration of every primitive, seconds.
inline constexpr double kPrimitiveDuration = 20.0;
/// Integration and collision-sampling sub-step, seconds.
inline constexpr double kSubStep = 1.0;
inline constexpr int kSubSteps = 20;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Maps any angle into [0, 2*pi).
inline double normalize_heading(double psi) {
    double h = std::fmod(psi, kTwoPi);
    if (h < 0.0)
        h += kTwoPi;
    if (h >= kTwoPi)
        h = 0.0;
    return h;
}

/// Wraps an angle difference into (-pi, pi].
inline double wrap_angle(double a) {
    double w = std::fmod(a + std::numbers::pi, kTwoPi);
    if (w <= 0.0)
        w += kTwoPi;
    return w - std::numbers::pi;
}

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
    friend bool operator==(const Vec3&, const Vec3&) = default;
};

inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(Vec3 a) { return std::sqrt(dot(a, a)); }

/// Pose and airspeed of one aircraft. Units: km, radians, km/s.
/// Frame: airport-centred East/North/Up; heading 0 = East, counter-clockwise positive.
struct AgentState {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    double heading = 0.0;
    double airspeed = 0.0;

    Vec3 position() const { return {x, y, z}; }
    friend bool operator==(const AgentState&, const AgentState&) = default;
};

using PrimitiveIndex = std::uint16_t;

struct MotionPrimitive {
    double commanded_airspeed = 0.0;  // km/s
    double vertical_rate = 0.0;       // km/s
    double heading_change = 0.0;      // rad, total over the primitive
    double duration = kPrimitiveDuration;

    friend bool operator==(const MotionPrimitive&, const MotionPrimitive&) = default;
};

struct TrajectoryPoint {
    int tick = 0;
    AgentState state;
    friend bool operator==(const TrajectoryPoint&, const TrajectoryPoint&) = default;
};

/// Executed or logged trajectory. actions[i] is the primitive flown from points[i] to points[i+1];
/// substeps[i] is how many 1 s sub-steps of it were flown (20, or fewer on the landing tick).
struct Trajectory {
    std::vector<TrajectoryPoint> points;
    std::vector<PrimitiveIndex> actions;
    std::vector<int> substeps;

    bool empty() const { return points.empty(); }
    std::size_t size() const { return points.size(); }
    const AgentState& back() const { return points.back().state; }
    friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

/// Probability vector over the primitive library.
using ActionDistribution = std::array<double, kNumPrimitives>;

/// Unnormalized log-scores over the primitive library.
using ActionScores = std::array<double, kNumPrimitives>;

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class SchemaError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class InputError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Softmax of log-scores; shifts by the max for stability.
ActionDistribution softmax(const ActionScores& scores);

/// True when entries are >= 0 and sum to one within tol.
bool is_valid_distribution(const ActionDistribution& p, double tol = 1e-9);

/// Index of the largest entry; ties go to the lowest index.
template <class Container>
std::size_t argmax_lowest(const Container& values) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] > values[best])
            best = i;
    return best;
}

}  // namespace sorts
