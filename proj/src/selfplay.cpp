#include "sorts/selfplay.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sorts {

namespace {

constexpr std::array<double, 3> kSpawnAirspeeds = {0.035, 0.040, 0.045};

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace

std::string to_string(PlannerKind k) {
    switch (k) {
    case PlannerKind::Sorts: return "sorts";
    case PlannerKind::Ablation: return "ablation";
    case PlannerKind::Scripted: return "scripted";
    case PlannerKind::Human: return "human";
    }
    return "?";
}

PlannerKind planner_kind_from_string(const std::string& s) {
    if (s == "sorts") return PlannerKind::Sorts;
    if (s == "ablation") return PlannerKind::Ablation;
    if (s == "scripted") return PlannerKind::Scripted;
    if (s == "human") return PlannerKind::Human;
    throw ConfigError("unknown planner '" + s + "'");
}

std::string to_string(Outcome o) {
    switch (o) {
    case Outcome::Active: return "active";
    case Outcome::Success: return "success";
    case Outcome::FailLS: return "fail-ls";
    case Outcome::FailTimeout: return "fail-timeout";
    case Outcome::FailOfftrack: return "fail-offtrack";
    }
    return "?";
}

Outcome outcome_from_string(const std::string& s) {
    for (auto o : {Outcome::Active, Outcome::Success, Outcome::FailLS, Outcome::FailTimeout, Outcome::FailOfftrack})
        if (to_string(o) == s)
            return o;
    throw SchemaError("unknown outcome '" + s + "'");
}

PlannerKind EpisodeConfig::planner_for(std::size_t agent) const {
    return planners.size() == 1 ? planners.front() : planners.at(agent);
}

void EpisodeConfig::validate() const {
    if (n_agents < 1 || n_agents > static_cast<int>(kSectorLabels.size()))
        throw ConfigError("episode: n_agents must be between 1 and 8");
    if (planners.size() != 1 && planners.size() != static_cast<std::size_t>(n_agents))
        throw ConfigError("episode: give one planner, or one per agent");
    if (!sectors.empty()) {
        if (sectors.size() != static_cast<std::size_t>(n_agents))
            throw ConfigError("episode: sector count must equal n_agents");
        for (std::size_t i = 0; i < sectors.size(); ++i) {
            if (!is_sector_label(sectors[i]))
                throw ConfigError("episode: unknown sector '" + sectors[i] + "'");
            for (std::size_t j = 0; j < i; ++j)
                if (sectors[i] == sectors[j])
                    throw ConfigError("episode: spawn sectors must be pairwise distinct");
        }
    }
    if (!spawn_overrides.empty() && spawn_overrides.size() != static_cast<std::size_t>(n_agents))
        throw ConfigError("episode: spawn override count must equal n_agents");
    if (!scripts.empty() && scripts.size() != static_cast<std::size_t>(n_agents))
        throw ConfigError("episode: script count must equal n_agents");
    for (const auto& s : scripts)
        for (auto a : s)
            if (a >= kNumPrimitives)
                throw ConfigError("episode: script primitive out of range");
    if (spawn_jitter_deg < 0.0 || spawn_jitter_deg > 22.5)
        throw ConfigError("episode: spawn_jitter_deg must lie in [0, 22.5]");
    if (!(separation_d > 0.0) || !(offtrack_limit > 0.0) || max_steps < 1 || !(spawn_radius > 0.0) ||
        !(goal_radius > 0.0))
        throw ConfigError("episode: limits must be positive");
}

std::size_t EpisodeResult::count(Outcome o) const {
    return static_cast<std::size_t>(std::count_if(agents.begin(), agents.end(), [o](const auto& a) { return a.outcome == o; }));
}

std::size_t EpisodeResult::forced_ticks() const {
    return static_cast<std::size_t>(std::count_if(decisions.begin(), decisions.end(), [](const auto& d) { return d.forced; }));
}

double reference_error(const Trajectory& executed, const ReferencePath& path) {
    if (executed.empty())
        throw InputError("reference_error: empty trajectory");
    double total = 0.0;
    for (const auto& p : executed.points)
        total += cross_track_error(p.state, path);
    return total / static_cast<double>(executed.size());
}

namespace {

void check_grid(const Trajectory& t) {
    if (t.actions.size() + 1 != t.points.size() && !(t.points.empty() && t.actions.empty()))
        throw InputError("trajectory: expected one action per transition");
    if (t.substeps.size() != t.actions.size())
        throw InputError("trajectory: expected one sub-step count per action");
    for (std::size_t i = 1; i < t.points.size(); ++i)
        if (t.points[i].tick != t.points[i - 1].tick + 1)
            throw InputError("trajectory: ticks must advance by one per point");
}

}  // namespace

double loss_of_separation(const Trajectory& a, const Trajectory& b, double d) {
    check_grid(a);
    check_grid(b);
    if (a.empty() || b.empty())
        return 0.0;
    const int first = std::max(a.points.front().tick, b.points.front().tick);
    const int last = std::min(a.points.back().tick, b.points.back().tick);
    double seconds = 0.0;
    for (int t = first; t < last; ++t) {
        const auto ia = static_cast<std::size_t>(t - a.points.front().tick);
        const auto ib = static_cast<std::size_t>(t - b.points.front().tick);
        const SubSteps sa = intermediate_states(a.points[ia].state, a.actions[ia]);
        const SubSteps sb = intermediate_states(b.points[ib].state, b.actions[ib]);
        const int n = std::min(a.substeps[ia], b.substeps[ib]);
        for (int k = 0; k < n; ++k)
            if (separation(sa[static_cast<std::size_t>(k)], sb[static_cast<std::size_t>(k)]) < d)
                seconds += kSubStep;
    }
    return seconds;
}

PrimitiveIndex cruise_primitive() { return primitive_index(2, 3, 3); }

PrimitiveIndex reference_tracking_action(const AgentState& state, const ReferencePath& path) {
    return static_cast<PrimitiveIndex>(argmax_lowest(reference_prior(state, path)));
}

Episode::Episode(const Environment& env, EpisodeConfig config) : env_(env), config_(std::move(config)) {
    config_.validate();
    const auto n = static_cast<std::size_t>(config_.n_agents);
    std::mt19937_64 rng(splitmix(config_.seed));

    std::vector<std::string> sectors = config_.sectors;
    if (sectors.empty()) {
        std::vector<std::string> pool(kSectorLabels.begin(), kSectorLabels.end());
        for (std::size_t i = pool.size() - 1; i > 0; --i)
            std::swap(pool[i], pool[static_cast<std::size_t>(rng() % (i + 1))]);
        sectors.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n));
    }

    agents_.reserve(n);
    runtime_.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const ReferencePath& sector_path = path_for_sector(env_.paths, sectors[i]);
        const double speed = kSpawnAirspeeds[static_cast<std::size_t>(rng() % kSpawnAirspeeds.size())];
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        const double bearing = sector_bearing(sectors[i]) + (2.0 * u - 1.0) * config_.spawn_jitter_deg * std::numbers::pi / 180.0;

        AgentResult r;
        r.id = static_cast<int>(i);
        r.sector = sectors[i];
        r.planner = config_.planner_for(i);
        r.outcome = Outcome::Active;

        AgentState spawn;
        if (!config_.spawn_overrides.empty() && config_.spawn_overrides[i]) {
            spawn = *config_.spawn_overrides[i];
            r.reference = sector_path;
        } else {
            std::vector<Vec3> wps = sector_path.waypoints();
            wps[0] = {env_.runway.x + config_.spawn_radius * std::cos(bearing),
                      env_.runway.y + config_.spawn_radius * std::sin(bearing), wps[0].z};
            r.reference = ReferencePath(std::move(wps), sectors[i]);
            const Vec3 p0 = r.reference.waypoints()[0];
            const Vec3 p1 = r.reference.waypoints()[1];
            spawn = {p0.x, p0.y, p0.z, normalize_heading(std::atan2(p1.y - p0.y, p1.x - p0.x)), speed};
        }
        r.trajectory.points.push_back({0, spawn});
        agents_.push_back(std::move(r));
        runtime_.push_back({i, &agents_.back().reference, {spawn}, cruise_primitive(), true});
    }
}

WorldSnapshot Episode::snapshot() const {
    WorldSnapshot w;
    w.tick = tick_;
    for (std::size_t i = 0; i < runtime_.size(); ++i) {
        if (!runtime_[i].active)
            continue;
        w.ids.push_back(agents_[i].id);
        w.histories.push_back(runtime_[i].history);
        w.paths.push_back(runtime_[i].path);
    }
    return w;
}

std::vector<int> Episode::active_ids() const {
    std::vector<int> ids;
    for (std::size_t i = 0; i < runtime_.size(); ++i)
        if (runtime_[i].active)
            ids.push_back(agents_[i].id);
    return ids;
}

const AgentState& Episode::state_of(int id) const { return runtime_.at(static_cast<std::size_t>(id)).history.back(); }

const ReferencePath& Episode::path_of(int id) const { return *runtime_.at(static_cast<std::size_t>(id)).path; }

Decision Episode::decide(std::size_t agent, const WorldSnapshot& world, std::size_t slot,
                         const std::map<int, PrimitiveIndex>& human_actions, const StepOptions& opts) const {
    const Runtime& rt = runtime_[agent];
    const int id = agents_[agent].id;
    Decision d;
    switch (config_.planner_for(agent)) {
    case PlannerKind::Sorts: {
        PlanRequest req;
        req.world = &world;
        req.ego = slot;
        req.predictor = env_.predictor.get();
        req.costmap = &env_.costmap;
        req.config = env_.planner;
        req.config.separation_d = config_.separation_d;
        req.config.goal_radius = config_.goal_radius;
        req.seed = splitmix(config_.seed ^ (static_cast<std::uint64_t>(tick_) << 20) ^ static_cast<std::uint64_t>(id));
        if (opts.planner_budget)
            req.deadline = std::chrono::steady_clock::now() + *opts.planner_budget;
        req.fallback_action = rt.last_action;
        d = plan(req);
        break;
    }
    case PlannerKind::Ablation:
        d = ablation_plan(world, slot, *env_.predictor, env_.ablation_lambda);
        break;
    case PlannerKind::Scripted: {
        const auto t = static_cast<std::size_t>(tick_);
        if (!config_.scripts.empty() && t < config_.scripts[agent].size())
            d.action = config_.scripts[agent][t];
        else
            d.action = reference_tracking_action(rt.history.back(), *rt.path);
        break;
    }
    case PlannerKind::Human: {
        const auto it = human_actions.find(id);
        d.action = it != human_actions.end() ? it->second : rt.last_action;
        break;
    }
    }
    d.tick = tick_;
    d.agent_id = id;
    return d;
}

std::vector<StepEvent> Episode::step(const std::map<int, PrimitiveIndex>& human_actions, const StepOptions& opts) {
    std::vector<StepEvent> events;
    if (finished_)
        return events;

    const WorldSnapshot world = snapshot();
    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < runtime_.size(); ++i)
        if (runtime_[i].active)
            active.push_back(i);

    last_decisions_.clear();
    for (std::size_t slot = 0; slot < active.size(); ++slot)
        last_decisions_.push_back(decide(active[slot], world, slot, human_actions, opts));

    const std::size_t m = active.size();
    std::vector<SubSteps> tracks(m);
    std::vector<int> flown(m, kSubSteps);
    std::vector<bool> arrived(m, false);
    for (std::size_t s = 0; s < m; ++s) {
        const Runtime& rt = runtime_[active[s]];
        tracks[s] = intermediate_states(rt.history.back(), last_decisions_[s].action);
        const Vec3 g = rt.path->goal();
        const AgentState goal{g.x, g.y, g.z, 0.0, 0.0};
        for (int k = 0; k < kSubSteps; ++k) {
            if (separation(tracks[s][static_cast<std::size_t>(k)], goal) < config_.goal_radius) {
                arrived[s] = true;
                flown[s] = k + 1;
                break;
            }
        }
    }

    std::vector<bool> breached(m, false);
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = a + 1; b < m; ++b) {
            const int n = std::min(flown[a], flown[b]);
            for (int k = 0; k < n; ++k) {
                const auto kk = static_cast<std::size_t>(k);
                if (separation(tracks[a][kk], tracks[b][kk]) < config_.separation_d) {
                    breached[a] = breached[b] = true;
                    break;
                }
            }
        }
    }

    ++tick_;
    for (std::size_t s = 0; s < m; ++s) {
        Runtime& rt = runtime_[active[s]];
        AgentResult& res = agents_[rt.result_index];
        const AgentState next = tracks[s][static_cast<std::size_t>(flown[s] - 1)];
        res.trajectory.points.push_back({tick_, next});
        res.trajectory.actions.push_back(last_decisions_[s].action);
        res.trajectory.substeps.push_back(flown[s]);
        rt.history.push_back(next);
        if (rt.history.size() > kDefaultHistory)
            rt.history.erase(rt.history.begin());
        rt.last_action = last_decisions_[s].action;

        Outcome o = Outcome::Active;
        if (breached[s])
            o = Outcome::FailLS;
        else if (arrived[s])
            o = Outcome::Success;
        else if (cross_track_error(next, *rt.path) > config_.offtrack_limit)
            o = Outcome::FailOfftrack;
        else if (tick_ >= config_.max_steps)
            o = Outcome::FailTimeout;
        if (o != Outcome::Active) {
            res.outcome = o;
            res.end_tick = tick_;
            rt.active = false;
            events.push_back({res.id, o});
        }
    }
    for (const auto& d : last_decisions_)
        decisions_.push_back(d);

    finished_ = std::none_of(runtime_.begin(), runtime_.end(), [](const Runtime& r) { return r.active; });
    return events;
}

EpisodeResult Episode::result() const {
    EpisodeResult r;
    r.config = config_;
    r.ticks = tick_;
    r.agents = agents_;
    r.decisions = decisions_;
    for (std::size_t i = 0; i < r.agents.size(); ++i) {
        auto& a = r.agents[i];
        a.reference_error = reference_error(a.trajectory, a.reference);
        if (a.outcome == Outcome::Active)
            a.end_tick = tick_;
    }
    const std::size_t n = r.agents.size();
    r.ls_seconds.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            r.ls_seconds[i][j] = r.ls_seconds[j][i] =
                loss_of_separation(r.agents[i].trajectory, r.agents[j].trajectory, config_.separation_d);
    return r;
}

EpisodeResult run_episode(const Environment& env, const EpisodeConfig& config) {
    Episode ep(env, config);
    while (!ep.finished())
        ep.step();
    return ep.result();
}

std::vector<EpisodeResult> run_batch_serial(const Environment& env, const std::vector<EpisodeConfig>& configs) {
    std::vector<EpisodeResult> out;
    out.reserve(configs.size());
    for (const auto& c : configs)
        out.push_back(run_episode(env, c));
    return out;
}

namespace {

bool same_bits(double a, double b) { return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b); }

bool same_bits(const AgentState& a, const AgentState& b) {
    return same_bits(a.x, b.x) && same_bits(a.y, b.y) && same_bits(a.z, b.z) && same_bits(a.heading, b.heading) &&
           same_bits(a.airspeed, b.airspeed);
}

const TrajectoryPoint* point_at_tick(const Trajectory& t, int tick) {
    if (t.points.empty() || tick < t.points.front().tick || tick > t.points.back().tick)
        return nullptr;
    return &t.points[static_cast<std::size_t>(tick - t.points.front().tick)];
}

}  // namespace

ReplayReport replay_episode(const Environment& env, const EpisodeResult& logged) {
    ReplayReport report;
    const auto diverge = [&](int tick, int agent, std::string what) {
        report.match = false;
        report.first_divergent_tick = tick;
        report.agent_id = agent;
        report.detail = std::move(what);
        return report;
    };
    if (logged.agents.size() != static_cast<std::size_t>(logged.config.n_agents))
        return diverge(0, -1, "agent count differs from config");

    Episode ep(env, logged.config);
    while (!ep.finished() && ep.tick() < logged.config.max_steps) {
        std::map<int, PrimitiveIndex> human;
        for (std::size_t i = 0; i < logged.agents.size(); ++i) {
            const auto& a = logged.agents[i];
            if (logged.config.planner_for(i) != PlannerKind::Human || a.trajectory.points.empty())
                continue;
            const int k = ep.tick() - a.trajectory.points.front().tick;
            if (k >= 0 && static_cast<std::size_t>(k) < a.trajectory.actions.size())
                human[a.id] = a.trajectory.actions[static_cast<std::size_t>(k)];
        }
        ep.step(human);
    }
    const EpisodeResult fresh = ep.result();

    const int last = std::max(fresh.ticks, logged.ticks);
    for (int t = 0; t <= last; ++t) {
        for (std::size_t i = 0; i < fresh.agents.size(); ++i) {
            const auto& fa = fresh.agents[i];
            const auto& la = logged.agents[i];
            const auto* fp = point_at_tick(fa.trajectory, t);
            const auto* lp = point_at_tick(la.trajectory, t);
            if (!fp != !lp)
                return diverge(t, fa.id, fp ? "logged trajectory ends early" : "re-simulated trajectory ends early");
            if (fp && !same_bits(fp->state, lp->state))
                return diverge(t, fa.id, "state differs");
            if (fp && t > fa.trajectory.points.front().tick) {
                const auto k = static_cast<std::size_t>(t - fa.trajectory.points.front().tick - 1);
                if (fa.trajectory.actions[k] != la.trajectory.actions.at(k) ||
                    fa.trajectory.substeps[k] != la.trajectory.substeps.at(k))
                    return diverge(t - 1, fa.id, "action differs");
            }
        }
    }
    // The JSON form prints doubles in shortest round-trip form, so equal text means equal bits.
    for (std::size_t k = 0; k < std::min(fresh.decisions.size(), logged.decisions.size()); ++k) {
        const auto& fd = fresh.decisions[k];
        if (to_json(fd) != to_json(logged.decisions[k]))
            return diverge(fd.tick, fd.agent_id, "decision record differs");
    }
    if (fresh.decisions.size() != logged.decisions.size())
        return diverge(fresh.ticks, -1, "decision count differs");
    for (std::size_t i = 0; i < fresh.agents.size(); ++i) {
        const auto& fa = fresh.agents[i];
        const auto& la = logged.agents[i];
        if (fa.outcome != la.outcome || fa.end_tick != la.end_tick)
            return diverge(fa.end_tick, fa.id, "outcome differs");
        if (!(fa.reference == la.reference))
            return diverge(0, fa.id, "reference path differs");
        if (!same_bits(fa.reference_error, la.reference_error))
            return diverge(fa.end_tick, fa.id, "reference error differs");
    }
    if (fresh.ticks != logged.ticks)
        return diverge(std::min(fresh.ticks, logged.ticks), -1, "episode length differs");
    return report;
}

std::vector<EpisodeResult> run_batch(const Environment& env, const std::vector<EpisodeConfig>& configs, int jobs) {
    std::vector<EpisodeResult> out(configs.size());
    const int n = static_cast<int>(configs.size());
#ifdef _OPENMP
    const int threads = jobs > 0 ? jobs : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
#else
    (void)jobs;
#endif
    for (int i = 0; i < n; ++i)
        out[static_cast<std::size_t>(i)] = run_episode(env, configs[static_cast<std::size_t>(i)]);
    return out;
}

// ---- serialization ------------------------------------------------------------------------

namespace {

nlohmann::json state_json(const AgentState& s) { return {s.x, s.y, s.z, s.heading, s.airspeed}; }

AgentState state_from(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 5)
        throw SchemaError("agent state must be [x, y, z, heading, airspeed]");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>(), j[4].get<double>()};
}

}  // namespace

nlohmann::json to_json(const EpisodeConfig& c) {
    nlohmann::json planners = nlohmann::json::array();
    for (auto p : c.planners)
        planners.push_back(to_string(p));
    nlohmann::json overrides = nlohmann::json::array();
    for (const auto& o : c.spawn_overrides)
        overrides.push_back(o ? state_json(*o) : nlohmann::json(nullptr));
    return {{"n_agents", c.n_agents},         {"seed", c.seed},
            {"spawn_radius", c.spawn_radius}, {"spawn_jitter_deg", c.spawn_jitter_deg},
            {"planners", planners},
            {"separation_d", c.separation_d}, {"offtrack_limit", c.offtrack_limit},
            {"max_steps", c.max_steps},       {"tick_seconds", c.tick_seconds},
            {"goal_radius", c.goal_radius},   {"sectors", c.sectors},
            {"spawn_overrides", overrides},   {"scripts", c.scripts}};
}

EpisodeConfig episode_config_from_json(const nlohmann::json& j) {
    EpisodeConfig c;
    c.n_agents = j.at("n_agents").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.spawn_radius = j.at("spawn_radius").get<double>();
    c.spawn_jitter_deg = j.at("spawn_jitter_deg").get<double>();
    c.planners.clear();
    for (const auto& p : j.at("planners"))
        c.planners.push_back(planner_kind_from_string(p.get<std::string>()));
    c.separation_d = j.at("separation_d").get<double>();
    c.offtrack_limit = j.at("offtrack_limit").get<double>();
    c.max_steps = j.at("max_steps").get<int>();
    c.tick_seconds = j.at("tick_seconds").get<double>();
    c.goal_radius = j.at("goal_radius").get<double>();
    c.sectors = j.at("sectors").get<std::vector<std::string>>();
    for (const auto& o : j.at("spawn_overrides"))
        c.spawn_overrides.push_back(o.is_null() ? std::nullopt : std::optional<AgentState>(state_from(o)));
    c.scripts = j.at("scripts").get<std::vector<std::vector<PrimitiveIndex>>>();
    c.validate();
    return c;
}

nlohmann::json to_json(const Trajectory& t) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : t.points)
        pts.push_back({{"tick", p.tick}, {"state", state_json(p.state)}});
    return {{"points", pts}, {"actions", t.actions}, {"substeps", t.substeps}};
}

Trajectory trajectory_from_json(const nlohmann::json& j) {
    Trajectory t;
    for (const auto& p : j.at("points"))
        t.points.push_back({p.at("tick").get<int>(), state_from(p.at("state"))});
    t.actions = j.at("actions").get<std::vector<PrimitiveIndex>>();
    t.substeps = j.at("substeps").get<std::vector<int>>();
    return t;
}

nlohmann::json to_json(const EpisodeResult& r) {
    nlohmann::json agents = nlohmann::json::array();
    for (const auto& a : r.agents)
        agents.push_back({{"id", a.id},
                          {"sector", a.sector},
                          {"planner", to_string(a.planner)},
                          {"outcome", to_string(a.outcome)},
                          {"end_tick", a.end_tick},
                          {"reference_error", a.reference_error},
                          {"reference", path_library_to_json({a.reference})["paths"][0]},
                          {"trajectory", to_json(a.trajectory)}});
    nlohmann::json decisions = nlohmann::json::array();
    for (const auto& d : r.decisions)
        decisions.push_back(to_json(d));
    return {{"config", to_json(r.config)},
            {"ticks", r.ticks},
            {"agents", agents},
            {"ls_seconds", r.ls_seconds},
            {"decisions", decisions}};
}

EpisodeResult episode_result_from_json(const nlohmann::json& j) {
    EpisodeResult r;
    r.config = episode_config_from_json(j.at("config"));
    r.ticks = j.at("ticks").get<int>();
    for (const auto& a : j.at("agents")) {
        AgentResult ar;
        ar.id = a.at("id").get<int>();
        ar.sector = a.at("sector").get<std::string>();
        ar.planner = planner_kind_from_string(a.at("planner").get<std::string>());
        ar.outcome = outcome_from_string(a.at("outcome").get<std::string>());
        ar.end_tick = a.at("end_tick").get<int>();
        ar.reference_error = a.at("reference_error").get<double>();
        ar.reference = path_library_from_json({{"version", "v1"}, {"paths", {a.at("reference")}}}).front();
        ar.trajectory = trajectory_from_json(a.at("trajectory"));
        r.agents.push_back(std::move(ar));
    }
    r.ls_seconds = j.at("ls_seconds").get<std::vector<std::vector<double>>>();
    for (const auto& d : j.at("decisions"))
        r.decisions.push_back(decision_from_json(d));
    return r;
}

}  // namespace sorts
