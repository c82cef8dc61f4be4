#include "sorts/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sorts/kernels.hpp"

namespace sorts {

void PlannerConfig::validate() const {
    if (expansions_per_plan <= 0 || max_episode_steps <= 0 || branch_limit <= 0 || max_tree_depth <= 0)
        throw ConfigError("planner: counts must be positive");
    if (branch_limit > static_cast<int>(kNumPrimitives))
        throw ConfigError("planner: branch_limit exceeds the primitive library");
    if (c1 < 0.0 || c2 < 0.0 || !(separation_d > 0.0) || !(goal_radius > 0.0))
        throw ConfigError("planner: weights must be non-negative and distances positive");
}

JointHistory WorldSnapshot::joint_history() const { return {ids, histories, tick}; }

std::vector<AgentState> WorldSnapshot::goals() const {
    std::vector<AgentState> g;
    g.reserve(paths.size());
    for (const auto* p : paths)
        g.push_back({p->goal().x, p->goal().y, p->goal().z, 0.0, 0.0});
    return g;
}

std::optional<std::size_t> nearest_agent(const WorldSnapshot& world, std::size_t ego) {
    std::optional<std::size_t> best;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < world.size(); ++j) {
        if (j == ego)
            continue;
        const double d = separation(world.state(ego), world.state(j));
        if (d < best_d) {
            best_d = d;
            best = j;
        }
    }
    return best;
}

AgentState phantom_state() { return {1.0e6, 1.0e6, 0.0, 0.0, 0.0}; }

double selection_score(const Edge& e, const PlannerConfig& cfg) { return e.q + cfg.c1 * e.p_soc + cfg.c2 * e.p_ref; }

std::optional<std::size_t> select(const TreeNode& node, const PlannerConfig& cfg) {
    std::optional<std::size_t> best;
    double best_u = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < node.edges.size(); ++i) {
        const Edge& e = node.edges[i];
        if (e.pruned)
            continue;
        const double u = selection_score(e, cfg);
        if (!best || u > best_u || (u == best_u && e.action < node.edges[*best].action)) {
            best = i;
            best_u = u;
        }
    }
    return best;
}

void refresh_social_terms(TreeNode& node) {
    const double root_n = std::sqrt(static_cast<double>(node.visits));
    for (Edge& e : node.edges)
        e.p_soc = root_n / (static_cast<double>(e.visits) + 1.0) * e.social_prior;
}

void backpropagate(Tree& tree, std::span<const PathStep> path, double v, std::array<double, 2> reference_scores) {
    for (auto it = path.rbegin(); it != path.rend(); ++it) {
        TreeNode& node = tree[static_cast<std::size_t>(it->node)];
        Edge& e = node.edges[static_cast<std::size_t>(it->edge)];
        const double n = static_cast<double>(e.visits);
        const double r = reference_scores[static_cast<std::size_t>(node.mover)];
        e.q = (n * e.q + v) / (n + 1.0);
        e.p_ref = (n * e.p_ref + r) / (n + 1.0);
        ++e.visits;
        ++node.visits;
        refresh_social_terms(node);
    }
}

nlohmann::json to_json(const Decision& d) {
    nlohmann::json root = nlohmann::json::array();
    for (const auto& s : d.root)
        root.push_back({{"action", s.action}, {"N", s.visits}, {"Q", s.q}, {"P_R", s.p_ref}, {"P_S", s.p_soc},
                        {"pruned", s.pruned}});
    nlohmann::json j{{"tick", d.tick},         {"agent", d.agent_id}, {"action", d.action},
                     {"forced", d.forced},     {"overrun", d.overrun}, {"iterations", d.iterations},
                     {"root", std::move(root)}};
    j["partner"] = d.partner_id ? nlohmann::json(*d.partner_id) : nlohmann::json(nullptr);
    return j;
}

Decision decision_from_json(const nlohmann::json& j) {
    Decision d;
    d.tick = j.at("tick").get<int>();
    d.agent_id = j.at("agent").get<int>();
    d.action = j.at("action").get<PrimitiveIndex>();
    d.forced = j.at("forced").get<bool>();
    d.overrun = j.at("overrun").get<bool>();
    d.iterations = j.at("iterations").get<int>();
    if (!j.at("partner").is_null())
        d.partner_id = j.at("partner").get<int>();
    for (const auto& s : j.at("root"))
        d.root.push_back({s.at("action").get<PrimitiveIndex>(), s.at("N").get<std::int32_t>(), s.at("Q").get<double>(),
                          s.at("P_R").get<double>(), s.at("P_S").get<double>(), s.at("pruned").get<bool>()});
    return d;
}

namespace {

double reach_km() { return 2.0 * std::hypot(kMaxAirspeed, 0.005) * kPrimitiveDuration; }

}  // namespace

SocialTreeSearch::SocialTreeSearch(const PlanRequest& request)
    : req_(request), world_(*request.world), ego_path_(request.world->paths.at(request.ego)) {
    req_.config.validate();
    if (world_.size() == 0 || req_.ego >= world_.size())
        throw InputError("plan: ego index outside the world snapshot");
    partner_ = nearest_agent(world_, req_.ego);
    const Vec3 g = ego_path_->goal();
    ego_goal_ = {g.x, g.y, g.z, 0.0, 0.0};

    TreeNode root;
    const auto& eh = world_.histories[req_.ego];
    root.ego = eh.back();
    root.ego_prev = eh.size() >= 2 ? eh[eh.size() - 2] : eh.back();
    if (partner_) {
        const auto& ph = world_.histories[*partner_];
        root.partner = ph.back();
        root.partner_prev = ph.size() >= 2 ? ph[ph.size() - 2] : ph.back();
        root.partner_active = true;
        partner_path_ = world_.paths[*partner_];
    } else {
        root.partner = root.partner_prev = phantom_state();
    }
    for (std::size_t j = 0; j < world_.size(); ++j) {
        if (j == req_.ego || separation(root.ego, world_.state(j)) >= reach_km() + req_.config.separation_d)
            continue;
        const auto tracks = kernels::rollout_substeps_serial(world_.state(j));
        root_fan_.insert(root_fan_.end(), tracks.begin(), tracks.end());
    }
    tree_.reserve(static_cast<std::size_t>(req_.config.expansions_per_plan * req_.config.branch_limit + 64));
    tree_.push_back(std::move(root));
}

ActionDistribution SocialTreeSearch::reference_prior_for(const TreeNode& node) const {
    const ReferencePath& path = node.mover == Mover::Ego ? *ego_path_ : *partner_path_;
    return reference_prior(node.mover_state(), path);
}

ActionDistribution SocialTreeSearch::social_prior(const TreeNode& node) const {
    // Tree agents take their in-tree states; everyone else is extrapolated at constant velocity
    // to the ego's tree time.
    JointHistory h;
    h.tick = world_.tick + node.ego_ticks;
    std::vector<const ReferencePath*> paths;
    std::vector<AgentState> goals;
    std::size_t mover_slot = 0;
    for (std::size_t j = 0; j < world_.size(); ++j) {
        std::vector<AgentState> window;
        if (j == req_.ego) {
            window = {node.ego_prev, node.ego};
            if (node.mover == Mover::Ego)
                mover_slot = h.windows.size();
        } else if (partner_ && j == *partner_) {
            if (!node.partner_active)
                continue;
            window = {node.partner_prev, node.partner};
            if (node.mover == Mover::Partner)
                mover_slot = h.windows.size();
        } else {
            const auto& hist = world_.histories[j];
            const AgentState& s = hist.back();
            const double vr = hist.size() >= 2 ? (s.z - hist[hist.size() - 2].z) / kPrimitiveDuration : 0.0;
            const auto at = [&](int ticks) {
                const double t = static_cast<double>(ticks) * kPrimitiveDuration;
                return AgentState{s.x + s.airspeed * std::cos(s.heading) * t, s.y + s.airspeed * std::sin(s.heading) * t,
                                  std::max(0.0, s.z + vr * t), s.heading, s.airspeed};
            };
            window = node.ego_ticks == 0 && hist.size() >= 2 ? std::vector<AgentState>{hist[hist.size() - 2], s}
                                                             : std::vector<AgentState>{at(node.ego_ticks - 1), at(node.ego_ticks)};
        }
        h.agent_ids.push_back(world_.ids[j]);
        h.windows.push_back(std::move(window));
        paths.push_back(world_.paths[j]);
        const Vec3 g = world_.paths[j]->goal();
        goals.push_back({g.x, g.y, g.z, 0.0, 0.0});
    }
    return req_.predictor->predict_agent(h, goals, paths, mover_slot, req_.seed);
}

const std::vector<SubSteps>& SocialTreeSearch::partner_fan(std::int32_t node_index) {
    if (fan_node_ != node_index) {
        fan_ = kernels::rollout_substeps_serial(tree_[static_cast<std::size_t>(node_index)].partner);
        fan_node_ = node_index;
    }
    return fan_;
}

bool SocialTreeSearch::collides(std::int32_t parent_index, const SubSteps& track) {
    const TreeNode& parent = tree_[static_cast<std::size_t>(parent_index)];
    const double d = req_.config.separation_d;
    // The executed first move is checked against everyone nearby, not only the partner.
    if (parent_index == 0) {
        for (const auto& other : root_fan_)
            if (min_substep_separation(track, other) < d)
                return true;
        return false;
    }
    if (!parent.partner_active)
        return false;
    if (parent.mover == Mover::Partner)
        return min_substep_separation(track, parent.last_track) < d;

    // Ego moves against every primitive the partner could fly over the same interval.
    const double reach = reach_km();
    if (separation(parent.ego, parent.partner) >= reach + d)
        return false;
    for (const auto& other : partner_fan(parent_index))
        if (min_substep_separation(track, other) < d)
            return true;
    return false;
}

std::int32_t SocialTreeSearch::make_child(std::int32_t parent_index, PrimitiveIndex action, double ps) {
    const TreeNode& parent = tree_[static_cast<std::size_t>(parent_index)];
    TreeNode child;
    child.ego = parent.ego;
    child.ego_prev = parent.ego_prev;
    child.partner = parent.partner;
    child.partner_prev = parent.partner_prev;
    child.partner_active = parent.partner_active;
    child.depth = parent.depth + 1;
    child.ego_ticks = parent.ego_ticks;
    child.last_track = intermediate_states(parent.mover_state(), action);

    const double r2 = req_.config.goal_radius;
    if (parent.mover == Mover::Ego) {
        child.ego_prev = parent.ego;
        child.ego = child.last_track.back();
        child.ego_ticks += 1;
        for (const auto& s : child.last_track)
            if (separation(s, ego_goal_) < r2) {
                child.ego_arrived = true;
                break;
            }
        child.mover = child.partner_active ? Mover::Partner : Mover::Ego;
    } else {
        child.partner_prev = parent.partner;
        child.partner = child.last_track.back();
        const Vec3 g = partner_path_->goal();
        const AgentState pg{g.x, g.y, g.z, 0.0, 0.0};
        for (const auto& s : child.last_track)
            if (separation(s, pg) < r2) {
                child.partner_active = false;
                break;
            }
        child.mover = Mover::Ego;
    }
    child.pruned = collides(parent_index, child.last_track);

    Edge e;
    e.action = action;
    e.social_prior = ps;
    e.pruned = child.pruned;
    e.p_ref = parent.mover == Mover::Ego ? reference_state_score(child.ego, *ego_path_)
                                         : reference_state_score(child.partner, *partner_path_);
    e.p_soc = std::sqrt(static_cast<double>(parent.visits)) * ps;

    const auto child_index = static_cast<std::int32_t>(tree_.size());
    e.child = child_index;
    tree_.push_back(std::move(child));
    tree_[static_cast<std::size_t>(parent_index)].edges.push_back(e);
    return child_index;
}

void SocialTreeSearch::expand(std::int32_t node_index, const ActionDistribution& ps, const ActionDistribution& pr) {
    std::array<PrimitiveIndex, kNumPrimitives> order{};
    std::iota(order.begin(), order.end(), PrimitiveIndex{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](PrimitiveIndex a, PrimitiveIndex b) { return ps[a] + pr[a] > ps[b] + pr[b]; });

    const auto k = static_cast<std::size_t>(req_.config.branch_limit);
    bool any_open = false;
    std::size_t r = 0;
    for (; r < k; ++r) {
        make_child(node_index, order[r], ps[order[r]]);
        any_open = any_open || !tree_[static_cast<std::size_t>(node_index)].edges.back().pruned;
    }
    // At the root keep widening down the ranking until one action is collision-free.
    if (node_index == 0) {
        for (; !any_open && r < kNumPrimitives; ++r) {
            make_child(node_index, order[r], ps[order[r]]);
            any_open = !tree_[0].edges.back().pruned;
        }
    }
    tree_[static_cast<std::size_t>(node_index)].expanded = true;
}

double SocialTreeSearch::evaluate_leaf(const TreeNode& node) const {
    if (node.pruned)
        return 0.0;
    if (node.ego_arrived)
        return 1.0;
    if (node.partner_active) {
        const std::array<AgentState, 2> joint{node.ego, node.partner};
        return joint_value(*req_.costmap, joint);
    }
    return joint_value(*req_.costmap, std::span<const AgentState>(&node.ego, 1));
}

void SocialTreeSearch::prune(std::int32_t node_index, std::span<const PathStep> path) {
    tree_[static_cast<std::size_t>(node_index)].pruned = true;
    if (!path.empty()) {
        const PathStep& last = path.back();
        tree_[static_cast<std::size_t>(last.node)].edges[static_cast<std::size_t>(last.edge)].pruned = true;
    }
}

bool SocialTreeSearch::iterate() {
    std::vector<PathStep> path;
    std::int32_t idx = 0;
    for (;;) {
        const TreeNode& node = tree_[static_cast<std::size_t>(idx)];
        if (node.terminal() || !node.expanded)
            break;
        const auto sel = select(node, req_.config);
        if (!sel) {
            prune(idx, path);
            return false;
        }
        path.push_back({idx, static_cast<std::int32_t>(*sel)});
        idx = node.edges[*sel].child;
    }

    {
        const TreeNode& leaf = tree_[static_cast<std::size_t>(idx)];
        if (!leaf.terminal() && leaf.depth < req_.config.max_tree_depth) {
            const ActionDistribution ps = social_prior(leaf);
            const ActionDistribution pr = reference_prior_for(leaf);
            expand(idx, ps, pr);
            const auto& edges = tree_[static_cast<std::size_t>(idx)].edges;
            if (std::none_of(edges.begin(), edges.end(), [](const Edge& e) { return !e.pruned; })) {
                prune(idx, path);
                return false;
            }
        }
    }

    const TreeNode& leaf = tree_[static_cast<std::size_t>(idx)];
    const double v = evaluate_leaf(leaf);
    const std::array<double, 2> refs{reference_state_score(leaf.ego, *ego_path_),
                                     leaf.partner_active ? reference_state_score(leaf.partner, *partner_path_) : 0.0};
    backpropagate(tree_, path, v, refs);
    return true;
}

PrimitiveIndex SocialTreeSearch::safest_action() {
    if (root_fan_.empty())
        return 0;
    const auto& fan = root_fan_;
    const AgentState& ego = tree_[0].ego;
    std::size_t best = 0;
    double best_sep = -1.0;
    for (std::size_t a = 0; a < kNumPrimitives; ++a) {
        const SubSteps track = intermediate_states(ego, a);
        double worst = std::numeric_limits<double>::infinity();
        for (const auto& other : fan)
            worst = std::min(worst, min_substep_separation(track, other));
        if (worst > best_sep) {
            best_sep = worst;
            best = a;
        }
    }
    return static_cast<PrimitiveIndex>(best);
}

Decision SocialTreeSearch::run() {
    Decision d;
    d.tick = world_.tick;
    d.agent_id = world_.ids.at(req_.ego);
    if (partner_)
        d.partner_id = world_.ids[*partner_];

    const auto overran = [&] { return req_.deadline && std::chrono::steady_clock::now() > *req_.deadline; };

    expand(0, social_prior(tree_[0]), reference_prior_for(tree_[0]));
    const auto open = [&] {
        return std::any_of(tree_[0].edges.begin(), tree_[0].edges.end(), [](const Edge& e) { return !e.pruned; });
    };

    // Each failed attempt prunes at least one node, so attempts are bounded by the tree size.
    const int max_attempts = req_.config.expansions_per_plan * (req_.config.branch_limit + 2) + 1000;
    int attempts = 0;
    while (iterations_ < req_.config.expansions_per_plan && open() && attempts++ < max_attempts) {
        if (overran()) {
            d.overrun = true;
            break;
        }
        if (iterate())
            ++iterations_;
    }
    d.iterations = iterations_;

    const auto& edges = tree_[0].edges;
    for (const auto& e : edges)
        d.root.push_back({e.action, e.visits, e.q, e.p_ref, e.p_soc, e.pruned});
    std::sort(d.root.begin(), d.root.end(), [](const auto& a, const auto& b) { return a.action < b.action; });

    if (d.overrun) {
        d.action = req_.fallback_action;
        d.forced = true;
        return d;
    }

    std::optional<RootActionStats> best;
    for (const auto& s : d.root)
        if (!s.pruned && (!best || s.visits > best->visits))
            best = s;
    if (best) {
        d.action = best->action;
    } else {
        d.action = safest_action();
        d.forced = true;
    }
    return d;
}

Decision plan(const PlanRequest& request) {
    SocialTreeSearch search(request);
    return search.run();
}

std::size_t ablation_choice(std::span<const double> p_ref, std::span<const double> p_soc, double lambda) {
    if (p_ref.size() != p_soc.size() || p_ref.empty())
        throw InputError("ablation: distributions must be non-empty and equal length");
    std::size_t best = 0;
    double best_s = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < p_ref.size(); ++a) {
        const double s = lambda * p_ref[a] + (1.0 - lambda) * p_soc[a];
        if (s > best_s) {
            best_s = s;
            best = a;
        }
    }
    return best;
}

Decision ablation_plan(const WorldSnapshot& world, std::size_t ego, const Predictor& predictor, double lambda,
                       std::uint64_t seed) {
    if (lambda < 0.0 || lambda > 1.0)
        throw ConfigError("ablation: lambda must lie in [0, 1]");
    const ActionDistribution pr = reference_prior(world.state(ego), *world.paths.at(ego));
    const auto goals = world.goals();
    const ActionDistribution ps = predictor.predict_agent(world.joint_history(), goals, world.paths, ego, seed);
    Decision d;
    d.tick = world.tick;
    d.agent_id = world.ids.at(ego);
    d.action = static_cast<PrimitiveIndex>(ablation_choice(pr, ps, lambda));
    d.iterations = 0;
    return d;
}

}  // namespace sorts
