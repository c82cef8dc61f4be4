#pragma once

// OpenMP variants of the data-parallel hot loops. Each has a serial reference elsewhere
// (dynamics, reference, costmap) that the tests compare against bit for bit.

#include <span>
#include <vector>

#include "sorts/costmap.hpp"
#include "sorts/dynamics.hpp"
#include "sorts/reference.hpp"

namespace sorts::kernels {

/// End state of every primitive from one start state.
std::vector<AgentState> rollout_endpoints_serial(const AgentState& state);
std::vector<AgentState> rollout_endpoints_parallel(const AgentState& state);

/// Sub-step states of every primitive from one start state.
std::vector<SubSteps> rollout_substeps_serial(const AgentState& state);
std::vector<SubSteps> rollout_substeps_parallel(const AgentState& state);

ActionScores reference_scores_parallel(const AgentState& state, const ReferencePath& path,
                                       const ReferencePriorParams& params = {});

/// Histogram build; per-path RNG streams keep it identical to build_costmap.
CostMap build_costmap_parallel(const std::vector<ReferencePath>& paths, const CostMapBuildParams& params = {});

int max_threads();

}  // namespace sorts::kernels
