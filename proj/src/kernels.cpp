#include "sorts/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sorts::kernels {

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

std::vector<AgentState> rollout_endpoints_serial(const AgentState& state) {
    std::vector<AgentState> out(kNumPrimitives);
    for (std::size_t a = 0; a < kNumPrimitives; ++a)
        out[a] = step_dynamics(state, a);
    return out;
}

std::vector<AgentState> rollout_endpoints_parallel(const AgentState& state) {
    std::vector<AgentState> out(kNumPrimitives);
    const int n = static_cast<int>(kNumPrimitives);
#pragma omp parallel for schedule(static)
    for (int a = 0; a < n; ++a)
        out[static_cast<std::size_t>(a)] = step_dynamics(state, static_cast<std::size_t>(a));
    return out;
}

std::vector<SubSteps> rollout_substeps_serial(const AgentState& state) {
    std::vector<SubSteps> out(kNumPrimitives);
    for (std::size_t a = 0; a < kNumPrimitives; ++a)
        out[a] = intermediate_states(state, a);
    return out;
}

std::vector<SubSteps> rollout_substeps_parallel(const AgentState& state) {
    std::vector<SubSteps> out(kNumPrimitives);
    const int n = static_cast<int>(kNumPrimitives);
#pragma omp parallel for schedule(static)
    for (int a = 0; a < n; ++a)
        out[static_cast<std::size_t>(a)] = intermediate_states(state, static_cast<std::size_t>(a));
    return out;
}

ActionScores reference_scores_parallel(const AgentState& state, const ReferencePath& path,
                                       const ReferencePriorParams& prm) {
    const double here = path.project(state.position()).arc_length;
    ActionScores scores{};
    const int n = static_cast<int>(kNumPrimitives);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        const auto a = static_cast<std::size_t>(i);
        const AgentState next = step_dynamics(state, a);
        const Projection proj = path.project(next.position());
        const double backtrack = std::max(0.0, here - proj.arc_length);
        scores[a] = -prm.beta_cross_track * proj.distance - prm.beta_progress * backtrack -
                    prm.beta_speed * std::abs(primitive(a).commanded_airspeed - prm.cruise_airspeed);
    }
    return scores;
}

CostMap build_costmap_parallel(const std::vector<ReferencePath>& paths, const CostMapBuildParams& params) {
    CostMap map = empty_grid_for(paths);
    const std::size_t cells = map.cell_count();
    std::vector<std::uint32_t> counts(cells, 0);
    const int n_paths = static_cast<int>(paths.size());
#pragma omp parallel
    {
        std::vector<std::uint32_t> local(cells, 0);
#pragma omp for schedule(dynamic)
        for (int i = 0; i < n_paths; ++i) {
            const auto idx = static_cast<std::size_t>(i);
            for (const auto& s : synthetic_samples(paths[idx], idx, params)) {
                const auto c = map.cell_of(s);
                if (c >= 0)
                    ++local[static_cast<std::size_t>(c)];
            }
        }
#pragma omp critical
        for (std::size_t c = 0; c < cells; ++c)
            counts[c] += local[c];
    }
    map.set_from_counts(counts);
    return map;
}

}  // namespace sorts::kernels
