#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sorts/types.hpp"

namespace sorts {

/// Spawn sectors, one per reference path. Bearing is measured from the runway threshold,
/// counter-clockwise from East.
inline constexpr std::array<std::string_view, 8> kSectorLabels = {"E", "NE", "N", "NW", "W", "SW", "S", "SE"};

double sector_bearing(std::string_view label);
bool is_sector_label(std::string_view label);

/// Runway threshold position and landing direction.
struct RunwayPose {
    double x = 0.0;
    double y = 0.0;
    double heading = 0.0;

    Vec3 threshold() const { return {x, y, 0.0}; }
    friend bool operator==(const RunwayPose&, const RunwayPose&) = default;
};

struct Projection {
    double distance = 0.0;    // km from the query point to the polyline
    double arc_length = 0.0;  // km along the polyline to the foot point
    Vec3 foot;
};

/// Goal-terminated traffic-pattern polyline.
class ReferencePath {
  public:
    ReferencePath() = default;
    ReferencePath(std::vector<Vec3> waypoints, std::string entry_label);

    const std::vector<Vec3>& waypoints() const { return waypoints_; }
    const std::string& entry_label() const { return entry_label_; }
    const Vec3& goal() const { return waypoints_.back(); }
    double length() const { return cumulative_.back(); }
    /// Arc length at each waypoint.
    const std::vector<double>& cumulative() const { return cumulative_; }

    Projection project(Vec3 p) const;
    /// Point at the given arc length, clamped to the ends.
    Vec3 point_at(double arc_length) const;
    /// Unit tangent of the segment containing the given arc length.
    Vec3 tangent_at(double arc_length) const;

    ReferencePath translated(Vec3 offset) const;

    friend bool operator==(const ReferencePath& a, const ReferencePath& b) {
        return a.waypoints_ == b.waypoints_ && a.entry_label_ == b.entry_label_;
    }

  private:
    std::vector<Vec3> waypoints_;
    std::vector<double> cumulative_;
    std::string entry_label_;
};

/// Traffic-pattern geometry. Distances in km.
struct PatternGeometry {
    double spawn_radius = 10.0;
    double downwind_offset = 1.5;
    double final_length = 2.0;
    double runway_length = 1.5;
    double entry_length = 1.5;
};

/// One left-hand pattern path per sector: spawn point, 45-degree entry, downwind, base, final,
/// threshold. Altitude is held at pattern_altitude until the base turn, then descends linearly
/// to zero at the threshold.
std::vector<ReferencePath> build_pattern_library(const RunwayPose& runway, double pattern_altitude,
                                                 const PatternGeometry& geometry = {});

const ReferencePath& path_for_sector(const std::vector<ReferencePath>& library, std::string_view label);

double cross_track_error(const AgentState& state, const ReferencePath& path);

/// Weights of the reference kernel. Units: per km, per km, per km/s.
struct ReferencePriorParams {
    double beta_cross_track = 2.0;
    double beta_progress = 4.0;
    double beta_speed = 10.0;
    double cruise_airspeed = 0.040;
};

/// Log-scores of every primitive's successor against the path (unnormalized).
ActionScores reference_scores(const AgentState& state, const ReferencePath& path,
                              const ReferencePriorParams& params = {});

/// Normalized reference prior over the primitive library.
ActionDistribution reference_prior(const AgentState& state, const ReferencePath& path,
                                   const ReferencePriorParams& params = {});

/// State-only reference desirability, exp(-beta_x * cross-track error).
double reference_state_score(const AgentState& state, const ReferencePath& path,
                             const ReferencePriorParams& params = {});

nlohmann::json path_library_to_json(const std::vector<ReferencePath>& paths);
std::vector<ReferencePath> path_library_from_json(const nlohmann::json& j);

}  // namespace sorts
