#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sorts/costmap.hpp"
#include "sorts/planner.hpp"
#include "sorts/reference.hpp"
#include "sorts/social.hpp"

namespace sorts {

/// Everything shared, read-only, by all agents of an episode.
struct Environment {
    RunwayPose runway;
    double pattern_altitude = 0.3;
    std::vector<ReferencePath> paths;
    CostMap costmap;
    std::shared_ptr<const Predictor> predictor;
    PlannerConfig planner;
    double ablation_lambda = 0.3;
};

enum class PlannerKind { Sorts, Ablation, Scripted, Human };

std::string to_string(PlannerKind k);
PlannerKind planner_kind_from_string(const std::string& s);

enum class Outcome { Active, Success, FailLS, FailTimeout, FailOfftrack };

std::string to_string(Outcome o);
Outcome outcome_from_string(const std::string& s);

struct EpisodeConfig {
    int n_agents = 2;
    std::uint64_t seed = 0;
    double spawn_radius = 10.0;
    /// Spawn bearings are drawn uniformly within +/- this many degrees of the sector centre.
    double spawn_jitter_deg = 15.0;
    /// One entry applies to every agent; otherwise one per agent.
    std::vector<PlannerKind> planners = {PlannerKind::Sorts};
    double separation_d = 0.2;
    double offtrack_limit = 3.0;
    int max_steps = 100;
    double tick_seconds = 20.0;
    double goal_radius = 0.2;
    /// Explicit sectors; seeded distinct draws when empty.
    std::vector<std::string> sectors;
    /// Optional start-state overrides, test fixtures only.
    std::vector<std::optional<AgentState>> spawn_overrides;
    /// Fixed primitive sequences for scripted agents; past the end they track their reference.
    std::vector<std::vector<PrimitiveIndex>> scripts;

    PlannerKind planner_for(std::size_t agent) const;
    void validate() const;
    friend bool operator==(const EpisodeConfig&, const EpisodeConfig&) = default;
};

struct AgentResult {
    int id = 0;
    std::string sector;
    PlannerKind planner = PlannerKind::Sorts;
    Outcome outcome = Outcome::Active;
    int end_tick = 0;
    double reference_error = 0.0;
    /// The agent's own reference: its sector's pattern path starting from the actual spawn point.
    ReferencePath reference;
    Trajectory trajectory;
};

struct EpisodeResult {
    EpisodeConfig config;
    int ticks = 0;
    std::vector<AgentResult> agents;
    /// Pairwise loss-of-separation durations, seconds; symmetric with zero diagonal.
    std::vector<std::vector<double>> ls_seconds;
    std::vector<Decision> decisions;

    std::size_t count(Outcome o) const;
    std::size_t forced_ticks() const;
};

/// Mean cross-track error over the executed states.
double reference_error(const Trajectory& executed, const ReferencePath& path);

/// Seconds, at 1 s sub-step resolution, during which the two trajectories are closer than d.
/// Both trajectories must advance one tick per point; only their common ticks are compared.
double loss_of_separation(const Trajectory& a, const Trajectory& b, double d);

/// Cruise-speed primitive flying straight and level.
PrimitiveIndex cruise_primitive();

/// Greedy reference tracking: argmax of the reference prior.
PrimitiveIndex reference_tracking_action(const AgentState& state, const ReferencePath& path);

struct StepEvent {
    int agent_id = 0;
    Outcome outcome = Outcome::Active;
};

struct StepOptions {
    /// Per-planner wall-clock budget; unset means unbounded.
    std::optional<std::chrono::nanoseconds> planner_budget;
};

/// Synchronous multi-agent landing episode: every agent plans on the same snapshot, then all
/// actions are applied together and termination is checked.
class Episode {
  public:
    Episode(const Environment& env, EpisodeConfig config);
    // Runtime entries point into agents_, so copying would leave them dangling.
    Episode(const Episode&) = delete;
    Episode& operator=(const Episode&) = delete;
    Episode(Episode&&) = default;

    bool finished() const { return finished_; }
    int tick() const { return tick_; }
    WorldSnapshot snapshot() const;
    /// Ids of agents still flying.
    std::vector<int> active_ids() const;
    const AgentState& state_of(int id) const;
    const std::vector<AgentResult>& agents() const { return agents_; }
    const ReferencePath& path_of(int id) const;

    /// Advances one tick. Human agents take their entry in `human_actions` or repeat their last action.
    std::vector<StepEvent> step(const std::map<int, PrimitiveIndex>& human_actions = {}, const StepOptions& opts = {});

    /// Decisions made during the most recent step.
    const std::vector<Decision>& last_decisions() const { return last_decisions_; }

    EpisodeResult result() const;

  private:
    struct Runtime {
        std::size_t result_index = 0;
        const ReferencePath* path = nullptr;
        std::vector<AgentState> history;
        PrimitiveIndex last_action = 0;
        bool active = true;
    };

    Decision decide(std::size_t agent, const WorldSnapshot& world, std::size_t slot,
                    const std::map<int, PrimitiveIndex>& human_actions, const StepOptions& opts) const;

    const Environment& env_;
    EpisodeConfig config_;
    int tick_ = 0;
    bool finished_ = false;
    std::vector<AgentResult> agents_;
    std::vector<Runtime> runtime_;
    std::vector<Decision> decisions_;
    std::vector<Decision> last_decisions_;
};

EpisodeResult run_episode(const Environment& env, const EpisodeConfig& config);

/// Runs a batch, one episode per config, with OpenMP across episodes. Results are in input order.
std::vector<EpisodeResult> run_batch(const Environment& env, const std::vector<EpisodeConfig>& configs, int jobs);
/// Serial reference for run_batch.
std::vector<EpisodeResult> run_batch_serial(const Environment& env, const std::vector<EpisodeConfig>& configs);

/// Where a re-simulation first departed from a logged episode.
struct ReplayReport {
    bool match = true;
    int first_divergent_tick = -1;
    int agent_id = -1;
    std::string detail;
};

/// Re-simulates a logged episode from its config and compares it bit for bit. Human agents are
/// fed their logged actions; everything else is recomputed.
ReplayReport replay_episode(const Environment& env, const EpisodeResult& logged);

nlohmann::json to_json(const EpisodeConfig& c);
EpisodeConfig episode_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Trajectory& t);
Trajectory trajectory_from_json(const nlohmann::json& j);
nlohmann::json to_json(const EpisodeResult& r);
EpisodeResult episode_result_from_json(const nlohmann::json& j);

}  // namespace sorts
