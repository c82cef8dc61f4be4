#include "sorts/reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sorts/dynamics.hpp"

namespace sorts {

double sector_bearing(std::string_view label) {
    for (std::size_t i = 0; i < kSectorLabels.size(); ++i)
        if (kSectorLabels[i] == label)
            return static_cast<double>(i) * std::numbers::pi / 4.0;
    throw ConfigError("unknown sector label '" + std::string(label) + "'");
}

bool is_sector_label(std::string_view label) {
    return std::find(kSectorLabels.begin(), kSectorLabels.end(), label) != kSectorLabels.end();
}

ReferencePath::ReferencePath(std::vector<Vec3> waypoints, std::string entry_label)
    : waypoints_(std::move(waypoints)), entry_label_(std::move(entry_label)) {
    if (waypoints_.size() < 2)
        throw InputError("reference path needs at least two waypoints");
    cumulative_.assign(waypoints_.size(), 0.0);
    for (std::size_t i = 1; i < waypoints_.size(); ++i) {
        const double len = norm(waypoints_[i] - waypoints_[i - 1]);
        if (len <= 0.0)
            throw InputError("reference path has repeated consecutive waypoints");
        cumulative_[i] = cumulative_[i - 1] + len;
    }
}

Projection ReferencePath::project(Vec3 p) const {
    Projection best{std::numeric_limits<double>::infinity(), 0.0, {}};
    for (std::size_t i = 0; i + 1 < waypoints_.size(); ++i) {
        const Vec3 a = waypoints_[i];
        const Vec3 ab = waypoints_[i + 1] - a;
        const double len2 = dot(ab, ab);
        const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
        const Vec3 foot = a + t * ab;
        const double d = norm(p - foot);
        if (d < best.distance) {
            best.distance = d;
            best.arc_length = cumulative_[i] + t * (cumulative_[i + 1] - cumulative_[i]);
            best.foot = foot;
        }
    }
    return best;
}

Vec3 ReferencePath::point_at(double s) const {
    if (s <= 0.0)
        return waypoints_.front();
    for (std::size_t i = 0; i + 1 < waypoints_.size(); ++i) {
        if (s <= cumulative_[i + 1]) {
            const double t = (s - cumulative_[i]) / (cumulative_[i + 1] - cumulative_[i]);
            return waypoints_[i] + t * (waypoints_[i + 1] - waypoints_[i]);
        }
    }
    return waypoints_.back();
}

Vec3 ReferencePath::tangent_at(double s) const {
    std::size_t seg = waypoints_.size() - 2;
    for (std::size_t i = 0; i + 1 < waypoints_.size(); ++i) {
        if (s < cumulative_[i + 1]) {
            seg = i;
            break;
        }
    }
    const Vec3 d = waypoints_[seg + 1] - waypoints_[seg];
    return (1.0 / norm(d)) * d;
}

ReferencePath ReferencePath::translated(Vec3 offset) const {
    std::vector<Vec3> moved = waypoints_;
    for (auto& w : moved)
        w = w + offset;
    return ReferencePath(std::move(moved), entry_label_);
}

std::vector<ReferencePath> build_pattern_library(const RunwayPose& runway, double pattern_altitude,
                                                 const PatternGeometry& g) {
    const double ux = std::cos(runway.heading);
    const double uy = std::sin(runway.heading);
    // Left of the landing direction: downwind side of a left-hand pattern.
    const double nx = -uy;
    const double ny = ux;
    const auto at = [&](double along, double left, double z) {
        return Vec3{runway.x + along * ux + left * nx, runway.y + along * uy + left * ny, z};
    };

    const double base_len = g.downwind_offset;
    const double descent_len = base_len + g.final_length;
    const double alt_at_final_turn = pattern_altitude * g.final_length / descent_len;

    const Vec3 threshold = at(0.0, 0.0, 0.0);
    const Vec3 final_turn = at(-g.final_length, 0.0, alt_at_final_turn);
    const Vec3 base_turn = at(-g.final_length, g.downwind_offset, pattern_altitude);
    const double midfield = 0.5 * g.runway_length;
    const Vec3 join = at(midfield, g.downwind_offset, pattern_altitude);
    const double e = g.entry_length / std::numbers::sqrt2;
    const Vec3 entry = at(midfield + e, g.downwind_offset + e, pattern_altitude);

    std::vector<ReferencePath> library;
    library.reserve(kSectorLabels.size());
    for (auto label : kSectorLabels) {
        const double b = sector_bearing(label);
        const Vec3 spawn{runway.x + g.spawn_radius * std::cos(b), runway.y + g.spawn_radius * std::sin(b),
                         pattern_altitude};
        library.emplace_back(std::vector<Vec3>{spawn, entry, join, base_turn, final_turn, threshold},
                             std::string(label));
    }
    return library;
}

const ReferencePath& path_for_sector(const std::vector<ReferencePath>& library, std::string_view label) {
    for (const auto& p : library)
        if (p.entry_label() == label)
            return p;
    throw ConfigError("no reference path for sector '" + std::string(label) + "'");
}

double cross_track_error(const AgentState& state, const ReferencePath& path) {
    return path.project(state.position()).distance;
}

ActionScores reference_scores(const AgentState& state, const ReferencePath& path, const ReferencePriorParams& prm) {
    const double here = path.project(state.position()).arc_length;
    ActionScores scores{};
    for (std::size_t a = 0; a < kNumPrimitives; ++a) {
        const AgentState next = step_dynamics(state, a);
        const Projection proj = path.project(next.position());
        const double backtrack = std::max(0.0, here - proj.arc_length);
        scores[a] = -prm.beta_cross_track * proj.distance - prm.beta_progress * backtrack -
                    prm.beta_speed * std::abs(primitive(a).commanded_airspeed - prm.cruise_airspeed);
    }
    return scores;
}

ActionDistribution reference_prior(const AgentState& state, const ReferencePath& path,
                                   const ReferencePriorParams& params) {
    return softmax(reference_scores(state, path, params));
}

double reference_state_score(const AgentState& state, const ReferencePath& path, const ReferencePriorParams& params) {
    return std::exp(-params.beta_cross_track * cross_track_error(state, path));
}

nlohmann::json path_library_to_json(const std::vector<ReferencePath>& paths) {
    nlohmann::json out;
    out["version"] = "v1";
    out["paths"] = nlohmann::json::array();
    for (const auto& p : paths) {
        nlohmann::json wps = nlohmann::json::array();
        for (const auto& w : p.waypoints())
            wps.push_back({w.x, w.y, w.z});
        out["paths"].push_back({{"entry_label", p.entry_label()}, {"waypoints", wps}});
    }
    return out;
}

std::vector<ReferencePath> path_library_from_json(const nlohmann::json& j) {
    if (!j.is_object() || j.value("version", "") != "v1")
        throw SchemaError("path library: expected version \"v1\"");
    std::vector<ReferencePath> paths;
    for (const auto& p : j.at("paths")) {
        std::vector<Vec3> wps;
        for (const auto& w : p.at("waypoints")) {
            if (!w.is_array() || w.size() != 3)
                throw SchemaError("path library: waypoint must be [x, y, z]");
            wps.push_back({w[0].get<double>(), w[1].get<double>(), w[2].get<double>()});
        }
        const auto label = p.at("entry_label").get<std::string>();
        if (!is_sector_label(label))
            throw SchemaError("path library: unknown entry_label '" + label + "'");
        paths.emplace_back(std::move(wps), label);
    }
    return paths;
}

}  // namespace sorts
