#include "sorts/social.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sorts {

double JointHistory::vertical_rate(std::size_t i) const {
    const auto& w = windows[i];
    if (w.size() < 2)
        return 0.0;
    return (w.back().z - w[w.size() - 2].z) / kPrimitiveDuration;
}

void JointHistory::validate() const {
    if (windows.empty())
        throw InputError("joint history: no agents");
    if (agent_ids.size() != windows.size())
        throw InputError("joint history: agent id count does not match window count");
    for (const auto& w : windows)
        if (w.empty())
            throw InputError("joint history: empty window");
}

void Predictor::check_inputs(const JointHistory& history, std::span<const AgentState> goals, PathRefs paths) const {
    history.validate();
    if (goals.size() != history.size() || paths.size() != history.size())
        throw ConfigError("predictor: expected one goal and one path per agent");
    for (const auto& w : history.windows)
        if (w.size() < required_history())
            throw InputError("predictor '" + name() + "': history shorter than required");
}

SocialPrediction Predictor::predict(const JointHistory& history, std::span<const AgentState> goals, PathRefs paths,
                                    std::uint64_t seed) const {
    check_inputs(history, goals, paths);
    SocialPrediction out;
    out.distributions.reserve(history.size());
    out.expected_successors.reserve(history.size());
    for (std::size_t i = 0; i < history.size(); ++i) {
        out.distributions.push_back(predict_agent(history, goals, paths, i, seed));
        Vec3 mean;
        const auto& p = out.distributions.back();
        for (std::size_t a = 0; a < kNumPrimitives; ++a)
            mean = mean + p[a] * step_dynamics(history.current(i), a).position();
        out.expected_successors.push_back(mean);
    }
    return out;
}

double SurrogatePredictor::influence_radius(double other_speed, double other_vertical_rate) const {
    const double own = std::hypot(kMaxAirspeed, 0.005);
    const double other = std::hypot(other_speed, other_vertical_rate);
    return (own + other) * kPrimitiveDuration + params_.social_distance;
}

ActionScores SurrogatePredictor::scores(const JointHistory& history, PathRefs paths, std::size_t agent) const {
    const AgentState& self = history.current(agent);
    ActionScores s = reference_scores(self, *paths[agent], params_.reference);

    struct Nearby {
        SubSteps track;
        AgentState state;
    };
    std::vector<Nearby> nearby;
    for (std::size_t j = 0; j < history.size(); ++j) {
        if (j == agent)
            continue;
        const AgentState& other = history.current(j);
        const double vr = history.vertical_rate(j);
        if (separation(self, other) >= influence_radius(other.airspeed, vr))
            continue;
        nearby.push_back({constant_velocity_substeps(other, vr), other});
    }
    if (nearby.empty())
        return s;

    const double dsoc = params_.social_distance;
    for (std::size_t a = 0; a < kNumPrimitives; ++a) {
        const SubSteps mine = intermediate_states(self, a);
        double closest = std::numeric_limits<double>::infinity();
        for (const auto& n : nearby)
            closest = std::min(closest, min_substep_separation(mine, n.track));
        s[a] -= params_.conflict_weight * std::max(0.0, dsoc - closest);
    }

    // Yield to conflicting traffic approaching from the right half-plane.
    const SubSteps own_track = constant_velocity_substeps(self, history.vertical_rate(agent));
    const double hx = std::cos(self.heading);
    const double hy = std::sin(self.heading);
    bool yield = false;
    for (const auto& n : nearby) {
        if (min_substep_separation(own_track, n.track) >= dsoc)
            continue;
        const double rx = n.state.x - self.x;
        const double ry = n.state.y - self.y;
        if (hx * ry - hy * rx < 0.0) {
            yield = true;
            break;
        }
    }
    if (yield) {
        const double penalty = std::log(params_.yield_factor);
        for (std::size_t a = 0; a < kNumPrimitives; ++a)
            if (primitive(a).commanded_airspeed >= self.airspeed)
                s[a] += penalty;
    }
    return s;
}

ActionDistribution SurrogatePredictor::predict_agent(const JointHistory& history, std::span<const AgentState>,
                                                     PathRefs paths, std::size_t agent, std::uint64_t) const {
    return softmax(scores(history, paths, agent));
}

ActionDistribution ConstantVelocityPredictor::predict_agent(const JointHistory& history, std::span<const AgentState>,
                                                            PathRefs, std::size_t agent, std::uint64_t) const {
    const auto& w = history.windows[agent];
    const AgentState& self = w.back();
    Vec3 observed;
    if (w.size() >= 2) {
        observed = (1.0 / kPrimitiveDuration) * (self.position() - w[w.size() - 2].position());
    } else {
        observed = {self.airspeed * std::cos(self.heading), self.airspeed * std::sin(self.heading), 0.0};
    }
    ActionScores s{};
    for (std::size_t a = 0; a < kNumPrimitives; ++a) {
        const Vec3 mean = (1.0 / kPrimitiveDuration) * (step_dynamics(self, a).position() - self.position());
        s[a] = -sharpness_ * norm(mean - observed);
    }
    return softmax(s);
}

namespace {

template <class T>
void take(const nlohmann::json& params, const char* key, T& out, std::vector<std::string>& seen) {
    if (params.contains(key)) {
        out = params.at(key).get<T>();
        seen.emplace_back(key);
    }
}

void reject_unknown(const nlohmann::json& params, const std::vector<std::string>& seen, const std::string& who) {
    for (auto it = params.begin(); it != params.end(); ++it)
        if (std::find(seen.begin(), seen.end(), it.key()) == seen.end())
            throw ConfigError("predictor '" + who + "': unknown parameter '" + it.key() + "'");
}

}  // namespace

std::unique_ptr<Predictor> make_predictor(const std::string& name, const nlohmann::json& params) {
    if (!params.is_object())
        throw ConfigError("predictor parameters must be an object");
    std::vector<std::string> seen;
    if (name == "surrogate-v1") {
        SurrogatePredictor::Params p;
        take(params, "beta_cross_track", p.reference.beta_cross_track, seen);
        take(params, "beta_progress", p.reference.beta_progress, seen);
        take(params, "beta_speed", p.reference.beta_speed, seen);
        take(params, "cruise_airspeed", p.reference.cruise_airspeed, seen);
        take(params, "social_distance", p.social_distance, seen);
        take(params, "conflict_weight", p.conflict_weight, seen);
        take(params, "yield_factor", p.yield_factor, seen);
        reject_unknown(params, seen, name);
        if (p.social_distance <= 0.0 || p.conflict_weight < 0.0 || p.yield_factor <= 0.0 || p.yield_factor > 1.0)
            throw ConfigError("predictor 'surrogate-v1': parameter out of range");
        return std::make_unique<SurrogatePredictor>(p);
    }
    if (name == "constant-velocity") {
        double sharpness = 100.0;
        take(params, "sharpness", sharpness, seen);
        reject_unknown(params, seen, name);
        if (sharpness <= 0.0)
            throw ConfigError("predictor 'constant-velocity': sharpness must be positive");
        return std::make_unique<ConstantVelocityPredictor>(sharpness);
    }
    throw ConfigError("unknown predictor '" + name + "'");
}

std::vector<std::string> registered_predictors() { return {"surrogate-v1", "constant-velocity"}; }

}  // namespace sorts
