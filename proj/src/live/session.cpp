#include "sorts/live/session.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "sorts/dynamics.hpp"

namespace sorts::live {

namespace {

std::array<double, kHeadingChangesDeg.size()> heading_rate_grid() {
    std::array<double, kHeadingChangesDeg.size()> g{};
    for (std::size_t i = 0; i < g.size(); ++i)
        g[i] = kHeadingChangesDeg[i] * std::numbers::pi / 180.0 / kPrimitiveDuration;
    return g;
}

std::size_t nearest_slot(std::span<const double> grid, double value) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double d = std::abs(grid[i] - value);
        const double db = std::abs(grid[best] - value);
        // Midpoints computed in floating point are not exactly equidistant; treat near-ties as ties.
        const double tol = 1e-12 * std::max({1.0, std::abs(grid[i]), std::abs(grid[best])});
        if (d < db - tol || (std::abs(d - db) <= tol && std::abs(grid[i]) < std::abs(grid[best])))
            best = i;
    }
    return best;
}

const char* role_of(PlannerKind k) {
    switch (k) {
    case PlannerKind::Human: return "human";
    case PlannerKind::Sorts: return "sorts";
    case PlannerKind::Ablation: return "ablation";
    case PlannerKind::Scripted: return "scripted";
    }
    return "?";
}

}  // namespace

double quantize_axis(std::span<const double> grid, double value) {
    if (grid.empty())
        throw InputError("quantize_axis: empty grid");
    if (!std::isfinite(value))
        throw ProtocolError("control values must be finite");
    return grid[nearest_slot(grid, value)];
}

QuantizedControl quantize(const Control& c) {
    if (!std::isfinite(c.airspeed) || !std::isfinite(c.vertical_rate) || !std::isfinite(c.heading_rate))
        throw ProtocolError("control values must be finite");
    static const auto rates = heading_rate_grid();
    const auto ia = nearest_slot(kAirspeeds, c.airspeed);
    const auto iv = nearest_slot(kVerticalRates, c.vertical_rate);
    const auto ih = nearest_slot(rates, c.heading_rate);
    QuantizedControl q;
    q.control = {kAirspeeds[ia], kVerticalRates[iv], rates[ih]};
    q.primitive = primitive_index(static_cast<int>(ia), static_cast<int>(iv), static_cast<int>(ih));
    return q;
}

Control control_for(PrimitiveIndex primitive) {
    static const auto rates = heading_rate_grid();
    const auto g = grid_index(primitive);
    return {kAirspeeds[static_cast<std::size_t>(g.airspeed)], kVerticalRates[static_cast<std::size_t>(g.vertical_rate)],
            rates[static_cast<std::size_t>(g.heading_change)]};
}

StartOptions start_options_from_json(const nlohmann::json& j) {
    StartOptions o;
    try {
        o.sector = j.at("sector").get<std::string>();
        if (j.contains("opponent"))
            o.opponent = planner_kind_from_string(j.at("opponent").get<std::string>());
        if (j.contains("opponent_sector") && !j.at("opponent_sector").is_null())
            o.opponent_sector = j.at("opponent_sector").get<std::string>();
        if (j.contains("seed") && !j.at("seed").is_null())
            o.seed = j.at("seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw ProtocolError(std::string("start: ") + e.what());
    } catch (const ConfigError& e) {
        throw ProtocolError(std::string("start: ") + e.what());
    }
    if (o.opponent == PlannerKind::Human)
        throw ProtocolError("start: opponent must be sorts, ablation or scripted");
    return o;
}

nlohmann::json to_json(const ControlAck& ack) {
    nlohmann::json j{{"type", "ack"},
                     {"version", kProtocolVersion},
                     {"accepted", ack.accepted},
                     {"tick", ack.tick},
                     {"current_tick", ack.current_tick}};
    if (ack.accepted) {
        j["airspeed"] = ack.quantized.control.airspeed;
        j["vertical_rate"] = ack.quantized.control.vertical_rate;
        j["heading_rate"] = ack.quantized.control.heading_rate;
        j["primitive"] = ack.quantized.primitive;
    } else {
        j["error"] = ack.error;
    }
    return j;
}

EpisodeConfig session_config(const ExperimentSpec& spec, const StartOptions& options, std::uint64_t default_seed) {
    if (!is_sector_label(options.sector))
        throw ProtocolError("start: unknown sector '" + options.sector + "'");
    std::string opponent_sector;
    if (options.opponent_sector) {
        opponent_sector = *options.opponent_sector;
        if (!is_sector_label(opponent_sector))
            throw ProtocolError("start: unknown sector '" + opponent_sector + "'");
        if (opponent_sector == options.sector)
            throw ProtocolError("start: the two agents must use distinct sectors");
    } else {
        for (auto s : kStudySectors)
            if (s != options.sector) {
                opponent_sector = std::string(s);
                break;
            }
    }
    EpisodeConfig c = base_episode_config(spec);
    c.n_agents = 2;
    c.seed = options.seed.value_or(default_seed);
    c.sectors = {options.sector, opponent_sector};
    c.planners = {PlannerKind::Human, options.opponent};
    c.validate();
    return c;
}

Session::Session(std::string id, std::shared_ptr<const Environment> env, const ExperimentSpec& spec,
                 const StartOptions& options, std::uint64_t default_seed)
    : id_(std::move(id)),
      env_(std::move(env)),
      spec_(spec),
      config_(session_config(spec, options, default_seed)),
      episode_(*env_, config_) {}

ControlAck Session::submit_control(int tick, const Control& control) {
    ControlAck ack;
    ack.tick = tick;
    ack.current_tick = episode_.tick();
    if (finished()) {
        ack.error = "session finished";
        return ack;
    }
    if (tick < episode_.tick()) {
        ack.error = "stale tick " + std::to_string(tick) + ", current tick is " + std::to_string(episode_.tick());
        return ack;
    }
    try {
        ack.quantized = quantize(control);
    } catch (const ProtocolError& e) {
        ack.error = e.what();
        return ack;
    }
    ack.accepted = true;
    pending_.emplace_back(tick, ack.quantized.primitive);
    return ack;
}

nlohmann::json Session::advance(std::optional<std::chrono::nanoseconds> planner_budget) {
    if (finished())
        return snapshot_message();
    // The latest control submitted for this tick or earlier wins; later ones wait their turn.
    std::map<int, PrimitiveIndex> human;
    const int now = episode_.tick();
    std::optional<std::pair<int, PrimitiveIndex>> chosen;
    for (const auto& p : pending_)
        if (p.first <= now && (!chosen || p.first >= chosen->first))
            chosen = p;
    std::erase_if(pending_, [now](const auto& p) { return p.first <= now; });
    if (chosen)
        human[human_id()] = chosen->second;

    StepOptions opts;
    opts.planner_budget = planner_budget;
    const auto events = episode_.step(human, opts);
    for (const auto& d : episode_.last_decisions())
        log_.push_back(to_json(d).dump());
    return snapshot_json(events, episode_.last_decisions());
}

nlohmann::json Session::snapshot_message() const { return snapshot_json({}, {}); }

nlohmann::json Session::snapshot_json(const std::vector<StepEvent>& events, const std::vector<Decision>& decisions) const {
    nlohmann::json agents = nlohmann::json::array();
    for (const auto& a : episode_.agents()) {
        const AgentState& s = a.trajectory.points.back().state;
        agents.push_back({{"id", a.id},
                          {"role", role_of(a.planner)},
                          {"sector", a.sector},
                          {"x", s.x},
                          {"y", s.y},
                          {"z", s.z},
                          {"heading", s.heading},
                          {"airspeed", s.airspeed},
                          {"status", to_string(a.outcome)}});
    }
    nlohmann::json ev = nlohmann::json::array();
    for (const auto& e : events)
        ev.push_back({{"agent", e.agent_id}, {"outcome", to_string(e.outcome)}});
    nlohmann::json summary = nlohmann::json::array();
    for (const auto& d : decisions) {
        nlohmann::json pruned = nlohmann::json::array();
        for (const auto& r : d.root)
            if (r.pruned)
                pruned.push_back(r.action);
        summary.push_back({{"agent", d.agent_id},
                           {"action", d.action},
                           {"forced", d.forced},
                           {"overrun", d.overrun},
                           {"iterations", d.iterations},
                           {"pruned_actions", std::move(pruned)}});
    }
    return {{"type", "snapshot"},
            {"version", kProtocolVersion},
            {"session", id_},
            {"tick", episode_.tick()},
            {"finished", finished()},
            {"agents", std::move(agents)},
            {"events", std::move(ev)},
            {"decision_summary", std::move(summary)}};
}

nlohmann::json Session::result_message() const {
    EpisodeRecord record{spec_, "live", 0, episode_.result()};
    return {{"type", "result"}, {"version", kProtocolVersion}, {"session", id_}, {"record", to_json(record)}};
}

}  // namespace sorts::live
