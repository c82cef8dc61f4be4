#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "sorts/costmap.hpp"
#include "sorts/dynamics.hpp"
#include "sorts/reference.hpp"
#include "sorts/social.hpp"
#include "sorts/types.hpp"

namespace sorts {

struct PlannerConfig {
    int expansions_per_plan = 50;
    int max_episode_steps = 100;
    double c1 = 2.0;
    double c2 = 5.0;
    double separation_d = 0.2;  // km
    int branch_limit = 10;
    int max_tree_depth = 10;    // plies
    double goal_radius = 0.2;   // km

    void validate() const;
    friend bool operator==(const PlannerConfig&, const PlannerConfig&) = default;
};

/// What every agent sees at the start of a tick: recent motion, reference path and id.
struct WorldSnapshot {
    int tick = 0;
    std::vector<int> ids;
    std::vector<std::vector<AgentState>> histories;  // oldest first, ends at `tick`
    std::vector<const ReferencePath*> paths;

    std::size_t size() const { return histories.size(); }
    const AgentState& state(std::size_t i) const { return histories[i].back(); }
    JointHistory joint_history() const;
    std::vector<AgentState> goals() const;
};

/// Nearest other agent by separation, ties to the lower index; nullopt when alone.
std::optional<std::size_t> nearest_agent(const WorldSnapshot& world, std::size_t ego);

enum class Mover : std::uint8_t { Ego = 0, Partner = 1 };

/// Statistics of one expanded action at a node.
struct Edge {
    PrimitiveIndex action = 0;
    std::int32_t child = -1;
    std::int32_t visits = 0;    // N(s, a)
    double q = 0.5;             // Q(s, a)
    double p_ref = 0.0;         // P_R(s, a)
    double p_soc = 0.0;         // P_S(s, a)
    double social_prior = 0.0;  // p_s(s, a)
    bool pruned = false;
};

struct TreeNode {
    AgentState ego;
    AgentState partner;
    /// Previous states, for vertical-rate estimates inside the tree.
    AgentState ego_prev;
    AgentState partner_prev;
    Mover mover = Mover::Ego;
    int depth = 0;
    int ego_ticks = 0;
    std::int32_t visits = 0;  // N(s)
    bool partner_active = false;
    bool expanded = false;
    bool pruned = false;
    bool ego_arrived = false;
    /// Sub-step track of the move that produced this node.
    SubSteps last_track{};
    std::vector<Edge> edges;

    const AgentState& mover_state() const { return mover == Mover::Ego ? ego : partner; }
    bool terminal() const { return ego_arrived; }
};

using Tree = std::vector<TreeNode>;

/// One traversed edge: node index and position of the edge in node.edges.
struct PathStep {
    std::int32_t node = 0;
    std::int32_t edge = 0;
};

/// U(s, a) = Q + c1 P_S + c2 P_R.
double selection_score(const Edge& edge, const PlannerConfig& config);

/// Argmax over expanded unpruned edges of Q + c1 P_S + c2 P_R, ties to the lowest action index.
/// Returns the position in node.edges, or nullopt for a dead node.
std::optional<std::size_t> select(const TreeNode& node, const PlannerConfig& config);

/// Running-mean updates of Q and P_R using the pre-increment N(s,a), then N(s,a)++ and N(s)++,
/// then a P_S refresh for all edges of the node. `reference_scores` holds p_r of the leaf for the ego and partner; an
/// edge takes the score of the agent that moved along it.
void backpropagate(Tree& tree, std::span<const PathStep> path, double leaf_value,
                   std::array<double, 2> reference_scores);

/// Recomputes P_S(s, a) = sqrt(N(s)) / (N(s, a) + 1) * p_s(s, a) for every edge.
void refresh_social_terms(TreeNode& node);

struct RootActionStats {
    PrimitiveIndex action = 0;
    std::int32_t visits = 0;
    double q = 0.0;
    double p_ref = 0.0;
    double p_soc = 0.0;
    bool pruned = false;
};

struct Decision {
    int tick = 0;
    int agent_id = 0;
    PrimitiveIndex action = 0;
    bool forced = false;
    bool overrun = false;
    std::optional<int> partner_id;
    int iterations = 0;
    std::vector<RootActionStats> root;
};

nlohmann::json to_json(const Decision& d);
Decision decision_from_json(const nlohmann::json& j);

struct PlanRequest {
    const WorldSnapshot* world = nullptr;
    std::size_t ego = 0;
    const Predictor* predictor = nullptr;
    const CostMap* costmap = nullptr;
    PlannerConfig config;
    std::uint64_t seed = 0;
    /// Wall-clock budget; when exceeded the fallback action is returned flagged forced.
    std::optional<std::chrono::steady_clock::time_point> deadline;
    PrimitiveIndex fallback_action = 0;
};

/// Social Monte Carlo Tree Search over a two-agent joint tree (ego and nearest agent).
class SocialTreeSearch {
  public:
    explicit SocialTreeSearch(const PlanRequest& request);

    Decision run();

    const Tree& tree() const { return tree_; }

    /// Creates children for the top branch_limit actions by p_s + p_r; exposed for tests.
    void expand(std::int32_t node_index, const ActionDistribution& prior_social,
                const ActionDistribution& prior_reference);

    /// Leaf value: 0 when pruned, 1 when the ego reached its goal, otherwise the cost-map joint value.
    double evaluate_leaf(const TreeNode& node) const;

    std::optional<std::size_t> partner_index() const { return partner_; }

  private:
    ActionDistribution social_prior(const TreeNode& node) const;
    ActionDistribution reference_prior_for(const TreeNode& node) const;
    std::int32_t make_child(std::int32_t parent, PrimitiveIndex action, double social_prior);
    bool collides(std::int32_t parent, const SubSteps& track);
    const std::vector<SubSteps>& partner_fan(std::int32_t node_index);
    void prune(std::int32_t node_index, std::span<const PathStep> path);
    PrimitiveIndex safest_action();
    bool iterate();

    const PlanRequest& req_;
    const WorldSnapshot& world_;
    std::optional<std::size_t> partner_;
    AgentState ego_goal_;
    const ReferencePath* ego_path_;
    const ReferencePath* partner_path_ = nullptr;
    Tree tree_;
    std::int32_t fan_node_ = -1;
    std::vector<SubSteps> fan_;
    // Every primitive track of every agent that can reach the ego within one primitive.
    std::vector<SubSteps> root_fan_;
    int iterations_ = 0;
};

/// Runs one SoRTS planning call.
Decision plan(const PlanRequest& request);

/// Myopic baseline: argmax_a lambda * p_r(a) + (1 - lambda) * p_s(a), ties to the lowest index.
std::size_t ablation_choice(std::span<const double> p_ref, std::span<const double> p_soc, double lambda);

Decision ablation_plan(const WorldSnapshot& world, std::size_t ego, const Predictor& predictor, double lambda,
                       std::uint64_t seed = 0);

/// Far-away stand-in for a missing partner.
AgentState phantom_state();

}  // namespace sorts
