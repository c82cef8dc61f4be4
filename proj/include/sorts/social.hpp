#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "sorts/dynamics.hpp"
#include "sorts/reference.hpp"
#include "sorts/types.hpp"

namespace sorts {

/// Last H ticks of every agent's motion; windows[i] is oldest-first and ends at `tick`.
struct JointHistory {
    std::vector<int> agent_ids;
    std::vector<std::vector<AgentState>> windows;
    int tick = 0;

    std::size_t size() const { return windows.size(); }
    const AgentState& current(std::size_t i) const { return windows[i].back(); }
    /// Vertical rate over the last tick, 0 with a single-state window.
    double vertical_rate(std::size_t i) const;
    void validate() const;
};

inline constexpr std::size_t kDefaultHistory = 5;

struct SocialPrediction {
    std::vector<ActionDistribution> distributions;
    /// Expected position one primitive ahead under each distribution.
    std::vector<Vec3> expected_successors;
};

using PathRefs = std::span<const ReferencePath* const>;

/// Maps joint motion histories to per-agent action distributions over the primitive library.
/// Implementations are deterministic for a given seed and safe to call concurrently.
class Predictor {
  public:
    virtual ~Predictor() = default;

    virtual std::string name() const = 0;
    virtual std::size_t required_history() const { return 1; }

    /// Distribution of one agent. Agents other than `agent` are context only.
    virtual ActionDistribution predict_agent(const JointHistory& history, std::span<const AgentState> goals,
                                             PathRefs paths, std::size_t agent, std::uint64_t seed) const = 0;

    SocialPrediction predict(const JointHistory& history, std::span<const AgentState> goals, PathRefs paths,
                             std::uint64_t seed = 0) const;

  protected:
    void check_inputs(const JointHistory& history, std::span<const AgentState> goals, PathRefs paths) const;
};

/// Interaction-aware stand-in for a learned prediction model: reference-seeking scores,
/// a penalty for passing near constant-velocity extrapolations of other agents, and
/// right-of-way yielding to traffic on the right.
class SurrogatePredictor final : public Predictor {
  public:
    struct Params {
        ReferencePriorParams reference;
        double social_distance = 0.5;   // km
        double conflict_weight = 8.0;   // per km
        double yield_factor = 0.25;
    };

    SurrogatePredictor() = default;
    explicit SurrogatePredictor(Params params) : params_(params) {}

    std::string name() const override { return "surrogate-v1"; }
    ActionDistribution predict_agent(const JointHistory& history, std::span<const AgentState> goals, PathRefs paths,
                                     std::size_t agent, std::uint64_t seed) const override;

    /// Log-scores before normalization.
    ActionScores scores(const JointHistory& history, PathRefs paths, std::size_t agent) const;
    const Params& params() const { return params_; }

    /// Beyond this initial separation another agent cannot influence the distribution.
    double influence_radius(double other_speed, double other_vertical_rate) const;

  private:
    Params params_;
};

/// Keeps doing what the agent was last observed doing.
class ConstantVelocityPredictor final : public Predictor {
  public:
    explicit ConstantVelocityPredictor(double sharpness = 100.0) : sharpness_(sharpness) {}

    std::string name() const override { return "constant-velocity"; }
    ActionDistribution predict_agent(const JointHistory& history, std::span<const AgentState> goals, PathRefs paths,
                                     std::size_t agent, std::uint64_t seed) const override;

  private:
    double sharpness_;  // per km/s of velocity mismatch
};

/// Registered names: "surrogate-v1", "constant-velocity". Unknown names or parameters throw ConfigError.
std::unique_ptr<Predictor> make_predictor(const std::string& name, const nlohmann::json& params = nlohmann::json::object());
std::vector<std::string> registered_predictors();

}  // namespace sorts
