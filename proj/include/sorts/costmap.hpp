#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <json.hpp>

#include "sorts/reference.hpp"
#include "sorts/types.hpp"

namespace sorts {

struct CostMapBuildParams {
    std::size_t samples_per_path = 1000;
    double noise_sigma = 0.15;  // km
    std::uint64_t seed = 7;
    double sample_spacing = 0.1;  // km of arc length between samples
};

/// Visitation-frequency value grid v(.) over the terminal airspace. Values are in [0, 1];
/// positions outside the grid score 0.
class CostMap {
  public:
    static constexpr std::array<double, 3> kDefaultCellSize = {0.25, 0.25, 0.05};

    CostMap() = default;
    CostMap(Vec3 origin, std::array<double, 3> cell_size, std::array<std::size_t, 3> dims);

    Vec3 origin() const { return origin_; }
    std::array<double, 3> cell_size() const { return cell_size_; }
    std::array<std::size_t, 3> dims() const { return dims_; }
    std::size_t cell_count() const { return values_.size(); }
    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }

    /// Flat row-major index (x slowest, z fastest), or -1 outside the grid.
    std::ptrdiff_t cell_of(Vec3 p) const;
    double value_at(Vec3 p) const;
    double& at(std::size_t ix, std::size_t iy, std::size_t iz) { return values_[flat(ix, iy, iz)]; }
    double at(std::size_t ix, std::size_t iy, std::size_t iz) const { return values_[flat(ix, iy, iz)]; }
    Vec3 cell_center(std::size_t flat_index) const;

    /// Replaces values by log(1 + count) / log(1 + max_count); all zero when counts are empty.
    void set_from_counts(std::span<const std::uint32_t> counts);

    void save(std::ostream& out) const;
    static CostMap load(std::istream& in);
    nlohmann::json to_json() const;
    static CostMap from_json(const nlohmann::json& j);

    friend bool operator==(const CostMap&, const CostMap&) = default;

  private:
    std::size_t flat(std::size_t ix, std::size_t iy, std::size_t iz) const {
        return (ix * dims_[1] + iy) * dims_[2] + iz;
    }

    Vec3 origin_;
    std::array<double, 3> cell_size_ = kDefaultCellSize;
    std::array<std::size_t, 3> dims_ = {0, 0, 0};
    std::vector<double> values_;
};

/// Grid that covers every path with a margin on all sides.
CostMap empty_grid_for(const std::vector<ReferencePath>& paths, double margin = 1.0);

/// Noisy samples of one path: dense arc-length samples perturbed by isotropic Gaussian noise.
/// Sample i of path p draws from an RNG stream keyed by (seed, p), so the result does not
/// depend on the order in which paths are processed.
std::vector<Vec3> synthetic_samples(const ReferencePath& path, std::size_t path_index, const CostMapBuildParams& params);

/// Serial reference build.
CostMap build_costmap(const std::vector<ReferencePath>& paths, const CostMapBuildParams& params = {});

/// Mean over agents of the cell value at each position.
double joint_value(const CostMap& map, std::span<const AgentState> states);

}  // namespace sorts
