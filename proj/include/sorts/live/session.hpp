#pragma once

#include <array>
#include <chrono>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sorts/scenario.hpp"
#include "sorts/selfplay.hpp"

namespace sorts::live {

inline constexpr std::string_view kProtocolVersion = "v1";

/// Rejected protocol requests; the message is sent back to the client verbatim.
class ProtocolError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Human control input. Airspeed and vertical rate in km/s, heading rate in rad/s.
struct Control {
    double airspeed = 0.040;
    double vertical_rate = 0.0;
    double heading_rate = 0.0;
    friend bool operator==(const Control&, const Control&) = default;
};

struct QuantizedControl {
    Control control;
    PrimitiveIndex primitive = 0;
};

/// Nearest grid value; exact midpoints go to the value closer to zero.
double quantize_axis(std::span<const double> grid, double value);

/// Snaps a control onto the primitive grid so human and planner agents share one action space.
QuantizedControl quantize(const Control& c);

/// Control that reproduces a primitive exactly.
Control control_for(PrimitiveIndex primitive);

/// Default entry sectors of a desk-scale session.
inline constexpr std::array<std::string_view, 3> kStudySectors = {"N", "S", "W"};

struct StartOptions {
    std::string sector = "N";
    PlannerKind opponent = PlannerKind::Sorts;
    /// Defaults to the first of N, S, W that the human is not using.
    std::optional<std::string> opponent_sector;
    std::optional<std::uint64_t> seed;
};

/// Parses a client `start` message. Throws ProtocolError on bad fields.
StartOptions start_options_from_json(const nlohmann::json& j);

struct ControlAck {
    bool accepted = false;
    /// Tick the control was submitted for.
    int tick = 0;
    /// Session tick at the time of the request.
    int current_tick = 0;
    QuantizedControl quantized;
    std::string error;
};

nlohmann::json to_json(const ControlAck& ack);

/// One human-versus-planner landing episode driven one tick at a time. Not thread-safe; the
/// server confines each session to its own tick loop.
class Session {
  public:
    Session(std::string id, std::shared_ptr<const Environment> env, const ExperimentSpec& spec,
            const StartOptions& options, std::uint64_t default_seed);

    const std::string& id() const { return id_; }
    int tick() const { return episode_.tick(); }
    bool finished() const { return episode_.finished(); }
    std::uint64_t seed() const { return config_.seed; }
    int human_id() const { return 0; }
    int opponent_id() const { return 1; }
    const EpisodeConfig& config() const { return config_; }

    /// Queues a control for the given tick. It takes effect at the first tick boundary at or after
    /// that tick; stale ticks are rejected.
    ControlAck submit_control(int tick, const Control& control);

    /// Runs one tick: plans, applies every action and evaluates termination. Returns the
    /// snapshot message describing the new state.
    nlohmann::json advance(std::optional<std::chrono::nanoseconds> planner_budget = std::nullopt);

    /// Snapshot of the current state with no events or decisions.
    nlohmann::json snapshot_message() const;
    /// Final result message; valid at any time, meaningful once finished.
    nlohmann::json result_message() const;
    EpisodeResult result() const { return episode_.result(); }

    /// Decision log, one JSON object per line.
    const std::vector<std::string>& log_lines() const { return log_; }

  private:
    nlohmann::json snapshot_json(const std::vector<StepEvent>& events, const std::vector<Decision>& decisions) const;

    std::string id_;
    std::shared_ptr<const Environment> env_;
    ExperimentSpec spec_;
    EpisodeConfig config_;
    Episode episode_;
    // Controls keyed by the tick they were submitted for, in arrival order.
    std::vector<std::pair<int, PrimitiveIndex>> pending_;
    std::vector<std::string> log_;
};

/// Builds the two-agent episode config a session would fly, without starting it.
EpisodeConfig session_config(const ExperimentSpec& spec, const StartOptions& options, std::uint64_t default_seed);

}  // namespace sorts::live
