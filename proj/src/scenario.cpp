#include "sorts/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

namespace sorts {

namespace {

// Reads fields from one JSON object and rejects whatever it did not consume.
class Fields {
  public:
    Fields(const nlohmann::json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_object())
            throw ConfigError(where_ + ": expected an object");
    }

    template <class T>
    T get(const char* key) {
        if (!j_.contains(key))
            throw ConfigError(where_ + "." + key + ": missing");
        return convert<T>(key);
    }

    template <class T>
    T get_or(const char* key, T fallback) {
        return j_.contains(key) ? convert<T>(key) : fallback;
    }

    const nlohmann::json& object(const char* key) {
        if (!j_.contains(key))
            throw ConfigError(where_ + "." + key + ": missing");
        used_.insert(key);
        return j_.at(key);
    }

    bool has(const char* key) const { return j_.contains(key); }
    std::string path(const char* key) const { return where_ + "." + key; }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!used_.count(it.key()))
                throw ConfigError(where_ + "." + it.key() + ": unknown field");
    }

  private:
    template <class T>
    T convert(const char* key) {
        used_.insert(key);
        try {
            return j_.at(key).get<T>();
        } catch (const nlohmann::json::exception&) {
            throw ConfigError(where_ + "." + key + ": wrong type");
        }
    }

    const nlohmann::json& j_;
    std::string where_;
    std::set<std::string> used_;
};

void require(bool ok, const std::string& what) {
    if (!ok)
        throw ConfigError(what);
}

constexpr double kDeg = std::numbers::pi / 180.0;

}  // namespace

bool operator==(const ExperimentSpec& a, const ExperimentSpec& b) {
    return a.name == b.name && a.airport == b.airport && a.costmap.samples_per_path == b.costmap.samples_per_path &&
           a.costmap.noise_sigma == b.costmap.noise_sigma && a.costmap.seed == b.costmap.seed &&
           a.costmap.sample_spacing == b.costmap.sample_spacing && a.predictor == b.predictor &&
           a.predictor_params == b.predictor_params && a.planner == b.planner && a.ablation_lambda == b.ablation_lambda &&
           a.episode == b.episode && a.batches == b.batches && a.live == b.live;
}

void ExperimentSpec::validate() const {
    planner.validate();
    make_predictor(predictor, predictor_params);
    require(airport.pattern_altitude > 0.0, "airport.pattern_altitude_km: must be positive");
    require(costmap.samples_per_path > 0, "costmap.samples_per_path: must be positive");
    require(costmap.noise_sigma > 0.0, "costmap.noise_sigma_km: must be positive");
    require(costmap.sample_spacing > 0.0, "costmap.sample_spacing_km: must be positive");
    require(ablation_lambda >= 0.0 && ablation_lambda <= 1.0, "ablation.lambda: must lie in [0, 1]");
    require(episode.spawn_radius > 0.0 && episode.offtrack_limit > 0.0 && episode.goal_radius > 0.0 &&
                episode.tick_seconds > 0.0,
            "episode: limits must be positive");
    require(episode.spawn_jitter_deg >= 0.0 && episode.spawn_jitter_deg <= 22.5,
            "episode.spawn_jitter_deg: must lie in [0, 22.5]");
    require(episode.tick_seconds == kPrimitiveDuration, "episode.tick_seconds: must equal the primitive duration (20)");
    for (std::size_t i = 0; i < batches.size(); ++i) {
        const auto& b = batches[i];
        const std::string at = "batches[" + std::to_string(i) + "]";
        require(b.n_agents >= 1 && b.n_agents <= 5, at + ".n_agents: must be between 1 and 5");
        require(b.episodes >= 1, at + ".episodes: must be positive");
    }
    require(live.tick_period_ms > 0, "live.tick_period_ms: must be positive");
    require(live.planner_budget_fraction > 0.0 && live.planner_budget_fraction <= 1.0,
            "live.planner_budget_fraction: must lie in (0, 1]");
    require(live.disconnect_grace_s >= 0.0, "live.disconnect_grace_s: must be non-negative");
}

ExperimentSpec spec_from_json(const nlohmann::json& j) {
    Fields top(j, "spec");
    const auto version = top.get<std::string>("version");
    if (version != "v1")
        throw ConfigError("spec.version: expected \"v1\", got \"" + version + "\"");

    ExperimentSpec s;
    s.name = top.get<std::string>("name");

    {
        Fields a(top.object("airport"), "airport");
        Fields r(a.object("runway"), "airport.runway");
        s.airport.runway.x = r.get<double>("x_km");
        s.airport.runway.y = r.get<double>("y_km");
        s.airport.runway.heading = normalize_heading(r.get<double>("heading_deg") * kDeg);
        r.finish();
        s.airport.pattern_altitude = a.get<double>("pattern_altitude_km");
        a.finish();
    }
    {
        Fields c(top.object("costmap"), "costmap");
        s.costmap.samples_per_path = c.get<std::size_t>("samples_per_path");
        s.costmap.noise_sigma = c.get<double>("noise_sigma_km");
        s.costmap.seed = c.get<std::uint64_t>("seed");
        s.costmap.sample_spacing = c.get_or<double>("sample_spacing_km", 0.1);
        c.finish();
    }
    {
        Fields p(top.object("predictor"), "predictor");
        s.predictor = p.get<std::string>("name");
        s.predictor_params = p.get_or<nlohmann::json>("params", nlohmann::json::object());
        p.finish();
    }
    {
        Fields p(top.object("planner"), "planner");
        s.planner.expansions_per_plan = p.get<int>("expansions_per_plan");
        s.planner.max_episode_steps = p.get<int>("max_episode_steps");
        s.planner.c1 = p.get<double>("c1");
        s.planner.c2 = p.get<double>("c2");
        s.planner.separation_d = p.get<double>("separation_d_km");
        s.planner.branch_limit = p.get<int>("branch_limit");
        s.planner.max_tree_depth = p.get<int>("max_tree_depth");
        p.finish();
    }
    {
        Fields a(top.object("ablation"), "ablation");
        s.ablation_lambda = a.get<double>("lambda");
        a.finish();
    }
    if (top.has("episode")) {
        Fields e(top.object("episode"), "episode");
        s.episode.spawn_radius = e.get_or<double>("spawn_radius_km", s.episode.spawn_radius);
        s.episode.offtrack_limit = e.get_or<double>("offtrack_limit_km", s.episode.offtrack_limit);
        s.episode.goal_radius = e.get_or<double>("goal_radius_km", s.episode.goal_radius);
        s.episode.tick_seconds = e.get_or<double>("tick_seconds", s.episode.tick_seconds);
        s.episode.spawn_jitter_deg = e.get_or<double>("spawn_jitter_deg", s.episode.spawn_jitter_deg);
        e.finish();
    }
    {
        const auto& arr = top.object("batches");
        if (!arr.is_array())
            throw ConfigError("spec.batches: expected an array");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            Fields b(arr[i], "batches[" + std::to_string(i) + "]");
            BatchTemplate t;
            t.n_agents = b.get<int>("n_agents");
            t.episodes = b.get<int>("episodes");
            t.seed_base = b.get<std::uint64_t>("seed_base");
            b.finish();
            s.batches.push_back(t);
        }
    }
    if (top.has("live")) {
        Fields l(top.object("live"), "live");
        s.live.tick_period_ms = l.get_or<int>("tick_period_ms", s.live.tick_period_ms);
        s.live.planner_budget_fraction = l.get_or<double>("planner_budget_fraction", s.live.planner_budget_fraction);
        s.live.disconnect_grace_s = l.get_or<double>("disconnect_grace_s", s.live.disconnect_grace_s);
        l.finish();
    }
    top.finish();
    s.validate();
    return s;
}

nlohmann::json to_json(const ExperimentSpec& s) {
    nlohmann::json batches = nlohmann::json::array();
    for (const auto& b : s.batches)
        batches.push_back({{"n_agents", b.n_agents}, {"episodes", b.episodes}, {"seed_base", b.seed_base}});
    return {
        {"version", "v1"},
        {"name", s.name},
        {"airport",
         {{"runway", {{"x_km", s.airport.runway.x}, {"y_km", s.airport.runway.y}, {"heading_deg", s.airport.runway.heading / kDeg}}},
          {"pattern_altitude_km", s.airport.pattern_altitude}}},
        {"costmap",
         {{"samples_per_path", s.costmap.samples_per_path},
          {"noise_sigma_km", s.costmap.noise_sigma},
          {"seed", s.costmap.seed},
          {"sample_spacing_km", s.costmap.sample_spacing}}},
        {"predictor", {{"name", s.predictor}, {"params", s.predictor_params}}},
        {"planner",
         {{"expansions_per_plan", s.planner.expansions_per_plan},
          {"max_episode_steps", s.planner.max_episode_steps},
          {"c1", s.planner.c1},
          {"c2", s.planner.c2},
          {"separation_d_km", s.planner.separation_d},
          {"branch_limit", s.planner.branch_limit},
          {"max_tree_depth", s.planner.max_tree_depth}}},
        {"ablation", {{"lambda", s.ablation_lambda}}},
        {"episode",
         {{"spawn_radius_km", s.episode.spawn_radius},
          {"offtrack_limit_km", s.episode.offtrack_limit},
          {"goal_radius_km", s.episode.goal_radius},
          {"tick_seconds", s.episode.tick_seconds},
          {"spawn_jitter_deg", s.episode.spawn_jitter_deg}}},
        {"batches", batches},
        {"live",
         {{"tick_period_ms", s.live.tick_period_ms},
          {"planner_budget_fraction", s.live.planner_budget_fraction},
          {"disconnect_grace_s", s.live.disconnect_grace_s}}},
    };
}

ExperimentSpec load_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open spec file " + path.string());
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        const auto upto = std::min<std::size_t>(e.byte, text.size());
        const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
        throw SchemaError(path.string() + ":" + std::to_string(line) + ": parse error: " + e.what());
    }
    return spec_from_json(j);
}

void save_spec(const ExperimentSpec& spec, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out)
        throw ConfigError("cannot write spec file " + path.string());
    out << to_json(spec).dump(2) << '\n';
}

Environment make_environment(const ExperimentSpec& spec) {
    spec.validate();
    Environment env;
    env.runway = spec.airport.runway;
    env.pattern_altitude = spec.airport.pattern_altitude;
    PatternGeometry geometry;
    geometry.spawn_radius = spec.episode.spawn_radius;
    env.paths = build_pattern_library(spec.airport.runway, spec.airport.pattern_altitude, geometry);
    env.costmap = build_costmap(env.paths, spec.costmap);
    env.predictor = make_predictor(spec.predictor, spec.predictor_params);
    env.planner = spec.planner;
    env.ablation_lambda = spec.ablation_lambda;
    return env;
}

EpisodeConfig base_episode_config(const ExperimentSpec& spec) {
    EpisodeConfig c;
    c.spawn_radius = spec.episode.spawn_radius;
    c.separation_d = spec.planner.separation_d;
    c.offtrack_limit = spec.episode.offtrack_limit;
    c.max_steps = spec.planner.max_episode_steps;
    c.tick_seconds = spec.episode.tick_seconds;
    c.goal_radius = spec.episode.goal_radius;
    c.spawn_jitter_deg = spec.episode.spawn_jitter_deg;
    return c;
}

std::vector<EpisodeConfig> episode_configs(const ExperimentSpec& spec, const BatchTemplate& batch, PlannerKind planner) {
    std::vector<EpisodeConfig> out;
    out.reserve(static_cast<std::size_t>(batch.episodes));
    for (int i = 0; i < batch.episodes; ++i) {
        EpisodeConfig c = base_episode_config(spec);
        c.n_agents = batch.n_agents;
        c.seed = batch.seed_base + static_cast<std::uint64_t>(i);
        c.planners = {planner};
        out.push_back(std::move(c));
    }
    return out;
}

nlohmann::json to_json(const EpisodeRecord& record) {
    return {{"version", "v1"},
            {"kind", "episode"},
            {"algorithm", record.algorithm},
            {"episode", record.episode},
            {"spec", to_json(record.spec)},
            {"result", to_json(record.result)}};
}

EpisodeRecord episode_record_from_json(const nlohmann::json& j) {
    if (!j.is_object() || j.value("version", "") != "v1" || j.value("kind", "") != "episode")
        throw SchemaError("episode log: expected an object with version \"v1\" and kind \"episode\"");
    EpisodeRecord r;
    try {
        r.algorithm = j.at("algorithm").get<std::string>();
        r.episode = j.at("episode").get<int>();
        r.result = episode_result_from_json(j.at("result"));
    } catch (const SchemaError&) {
        throw;
    } catch (const std::exception& e) {
        throw SchemaError(std::string("episode log: ") + e.what());
    }
    try {
        r.spec = spec_from_json(j.at("spec"));
    } catch (const ConfigError& e) {
        throw SchemaError(std::string("episode log: embedded spec: ") + e.what());
    }
    return r;
}

EpisodeRecord load_episode_record(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open episode log " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(path.string() + ": parse error: " + e.what());
    }
    return episode_record_from_json(j);
}

}  // namespace sorts
