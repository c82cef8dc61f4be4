#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "sorts/costmap.hpp"
#include "sorts/planner.hpp"
#include "sorts/reference.hpp"
#include "sorts/selfplay.hpp"

namespace sorts {

struct AirportSpec {
    RunwayPose runway;
    double pattern_altitude = 0.3;
    friend bool operator==(const AirportSpec&, const AirportSpec&) = default;
};

struct EpisodeDefaults {
    double spawn_radius = 10.0;
    double offtrack_limit = 3.0;
    double goal_radius = 0.2;
    double tick_seconds = 20.0;
    double spawn_jitter_deg = 15.0;
    friend bool operator==(const EpisodeDefaults&, const EpisodeDefaults&) = default;
};

/// A family of episodes: seeds are seed_base + episode index.
struct BatchTemplate {
    int n_agents = 2;
    int episodes = 1;
    std::uint64_t seed_base = 0;
    friend bool operator==(const BatchTemplate&, const BatchTemplate&) = default;
};

struct LiveSettings {
    int tick_period_ms = 1000;
    double planner_budget_fraction = 0.8;
    double disconnect_grace_s = 5.0;
    friend bool operator==(const LiveSettings&, const LiveSettings&) = default;
};

struct ExperimentSpec {
    std::string name;
    AirportSpec airport;
    CostMapBuildParams costmap;
    std::string predictor = "surrogate-v1";
    nlohmann::json predictor_params = nlohmann::json::object();
    PlannerConfig planner;
    double ablation_lambda = 0.3;
    EpisodeDefaults episode;
    std::vector<BatchTemplate> batches;
    LiveSettings live;

    void validate() const;
    friend bool operator==(const ExperimentSpec& a, const ExperimentSpec& b);
};

/// Strict: unknown keys, wrong types and violated bounds throw ConfigError naming the field.
ExperimentSpec spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentSpec& spec);

/// Parses a spec file. Malformed JSON throws SchemaError carrying the line number.
ExperimentSpec load_spec(const std::filesystem::path& path);
void save_spec(const ExperimentSpec& spec, const std::filesystem::path& path);

/// Builds the reference library, cost map and predictor for a spec.
Environment make_environment(const ExperimentSpec& spec);

/// Episode configs of one batch for one planner; seeds are seed_base + index.
std::vector<EpisodeConfig> episode_configs(const ExperimentSpec& spec, const BatchTemplate& batch, PlannerKind planner);

EpisodeConfig base_episode_config(const ExperimentSpec& spec);

/// Self-contained episode log: the experiment spec that built the environment plus the result.
struct EpisodeRecord {
    ExperimentSpec spec;
    std::string algorithm;
    int episode = 0;
    EpisodeResult result;
};

nlohmann::json to_json(const EpisodeRecord& record);
/// Throws SchemaError for a wrong version or a structurally invalid log.
EpisodeRecord episode_record_from_json(const nlohmann::json& j);
EpisodeRecord load_episode_record(const std::filesystem::path& path);

}  // namespace sorts
