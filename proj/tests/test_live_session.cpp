#include <doctest.h>

#include "sorts/live/session.hpp"
#include "support.hpp"

using namespace sorts;
using namespace sorts::live;

namespace {

std::shared_ptr<const Environment> shared_env() {
    static const auto env = std::make_shared<const Environment>(make_environment(testing::default_spec()));
    return env;
}

StartOptions ablation_opponent(std::string sector = "N") {
    StartOptions o;
    o.sector = std::move(sector);
    o.opponent = PlannerKind::Ablation;
    return o;
}

std::vector<double> heading_rates() {
    std::vector<double> g;
    for (double deg : kHeadingChangesDeg)
        g.push_back(deg * std::numbers::pi / 180.0 / 20.0);
    return g;
}

}  // namespace

TEST_CASE("controls on the grid quantize to themselves") {
    for (std::size_t p = 0; p < kNumPrimitives; ++p) {
        const Control c = control_for(static_cast<PrimitiveIndex>(p));
        const auto q = quantize(c);
        CHECK(q.primitive == p);
        CHECK(q.control == c);
        CHECK(primitive(p).commanded_airspeed == c.airspeed);
        CHECK(primitive(p).vertical_rate == c.vertical_rate);
        CHECK(c.heading_rate * 20.0 == doctest::Approx(primitive(p).heading_change).epsilon(1e-12));
    }
}

TEST_CASE("grid midpoints quantize toward zero, everything else to the nearest value") {
    const std::vector<double> speeds(kAirspeeds.begin(), kAirspeeds.end());
    const std::vector<double> climbs(kVerticalRates.begin(), kVerticalRates.end());
    for (const auto& grid : {speeds, climbs, heading_rates()}) {
        for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
            const double lo = grid[i], hi = grid[i + 1];
            const double mid = 0.5 * (lo + hi);
            const double toward_zero = std::abs(lo) < std::abs(hi) ? lo : hi;
            CHECK(quantize_axis(grid, mid) == toward_zero);
            const double eps = 1e-3 * (hi - lo);
            CHECK(quantize_axis(grid, mid - eps) == lo);
            CHECK(quantize_axis(grid, mid + eps) == hi);
        }
        CHECK(quantize_axis(grid, grid.front() - 1.0) == grid.front());
        CHECK(quantize_axis(grid, grid.back() + 1.0) == grid.back());
    }
    // A heading rate between 0 and the 15 degree step, on the exact midpoint.
    const auto q = quantize({0.040, 0.0, 7.5 * std::numbers::pi / 180.0 / 20.0});
    CHECK(q.control.heading_rate == 0.0);
    CHECK(q.primitive == cruise_primitive());
    CHECK_THROWS_AS(quantize({std::nan(""), 0.0, 0.0}), ProtocolError);
    CHECK_THROWS_AS(quantize_axis(std::span<const double>{}, 1.0), InputError);
}

TEST_CASE("start messages") {
    auto o = start_options_from_json({{"type", "start"}, {"sector", "W"}, {"opponent", "ablation"}, {"seed", 5}});
    CHECK(o.sector == "W");
    CHECK(o.opponent == PlannerKind::Ablation);
    CHECK(o.seed == 5u);
    CHECK_FALSE(o.opponent_sector.has_value());
    o = start_options_from_json({{"sector", "S"}});
    CHECK(o.opponent == PlannerKind::Sorts);
    CHECK_THROWS_AS(start_options_from_json({{"opponent", "sorts"}}), ProtocolError);
    CHECK_THROWS_AS(start_options_from_json({{"sector", "N"}, {"opponent", "human"}}), ProtocolError);
    CHECK_THROWS_AS(start_options_from_json({{"sector", "N"}, {"opponent", "robot"}}), ProtocolError);
    CHECK_THROWS_AS(start_options_from_json({{"sector", 3}}), ProtocolError);
}

TEST_CASE("session configs pair the human with a planner on a distinct sector") {
    const ExperimentSpec spec = testing::default_spec();
    const auto c = session_config(spec, ablation_opponent("N"), 11);
    CHECK(c.n_agents == 2);
    CHECK(c.seed == 11);
    CHECK(c.sectors == std::vector<std::string>{"N", "S"});
    CHECK(c.planners == std::vector<PlannerKind>{PlannerKind::Human, PlannerKind::Ablation});
    CHECK(session_config(spec, ablation_opponent("S"), 1).sectors[1] == "N");
    CHECK(session_config(spec, ablation_opponent("W"), 1).sectors[1] == "N");
    CHECK(session_config(spec, ablation_opponent("E"), 1).sectors[1] == "N");

    StartOptions o = ablation_opponent("N");
    o.opponent_sector = "N";
    CHECK_THROWS_AS(session_config(spec, o, 1), ProtocolError);
    o.opponent_sector = "Q";
    CHECK_THROWS_AS(session_config(spec, o, 1), ProtocolError);
    o = ablation_opponent("nowhere");
    CHECK_THROWS_AS(session_config(spec, o, 1), ProtocolError);
    o = ablation_opponent("N");
    o.seed = 99;
    CHECK(session_config(spec, o, 1).seed == 99);
}

TEST_CASE("controls apply at the next tick boundary; stale ones are rejected") {
    Session s("s1", shared_env(), testing::default_spec(), ablation_opponent(), 3);
    CHECK(s.tick() == 0);
    const AgentState start = s.result().agents[0].trajectory.back();

    const PrimitiveIndex left = primitive_index(2, 3, 5), right = primitive_index(2, 3, 1);
    CHECK(s.submit_control(0, control_for(left)).accepted);
    CHECK(s.submit_control(0, control_for(right)).accepted);  // latest for the tick wins
    const auto future = s.submit_control(2, control_for(primitive_index(0, 3, 3)));
    CHECK(future.accepted);
    CHECK(future.current_tick == 0);

    const auto snap = s.advance();
    CHECK(snap.at("type") == "snapshot");
    CHECK(snap.at("tick") == 1);
    CHECK(s.result().agents[0].trajectory.actions.back() == right);
    CHECK(s.result().agents[0].trajectory.back() == step_dynamics(start, right));

    const auto stale = s.submit_control(0, control_for(left));
    CHECK_FALSE(stale.accepted);
    CHECK(stale.current_tick == 1);
    const auto j = to_json(stale);
    CHECK(j.at("type") == "ack");
    CHECK(j.at("version") == "v1");
    CHECK(j.contains("error"));

    s.advance();  // no control for tick 1: the human repeats the last action
    CHECK(s.result().agents[0].trajectory.actions.back() == right);
    s.advance();
    CHECK(s.result().agents[0].trajectory.actions.back() == primitive_index(0, 3, 3));
}

TEST_CASE("acknowledgements carry quantized values") {
    Session s("s1", shared_env(), testing::default_spec(), ablation_opponent(), 3);
    const auto ack = s.submit_control(0, {0.0432, 0.0004, -0.02});
    REQUIRE(ack.accepted);
    const auto j = to_json(ack);
    CHECK(j.at("airspeed") == 0.045);
    CHECK(j.at("vertical_rate") == 0.0);
    CHECK(j.at("heading_rate").get<double>() == doctest::Approx(-15.0 * std::numbers::pi / 180.0 / 20.0));
    CHECK(j.at("primitive") == primitive_index(3, 3, 2));
    CHECK_FALSE(s.submit_control(0, {INFINITY, 0, 0}).accepted);
}

TEST_CASE("a full session produces gapless snapshots and a replayable record") {
    Session s("s7", shared_env(), testing::default_spec(), ablation_opponent("W"), 21);
    const auto first = s.snapshot_message();
    CHECK(first.at("tick") == 0);
    REQUIRE(first.at("agents").size() == 2);
    CHECK(first.at("agents")[0].at("role") == "human");
    CHECK(first.at("agents")[1].at("role") == "ablation");
    CHECK(first.at("agents")[0].at("status") == "active");

    int expected_tick = 0;
    std::size_t decisions = 0;
    while (!s.finished()) {
        // Fly the reference greedily, as an attentive human would.
        const auto& me = s.result().agents[0];
        if (me.outcome == Outcome::Active)
            s.submit_control(s.tick(), control_for(reference_tracking_action(me.trajectory.back(), me.reference)));
        const auto snap = s.advance();
        CHECK(snap.at("tick") == ++expected_tick);
        decisions += snap.at("decision_summary").size();
        for (const auto& d : snap.at("decision_summary"))
            CHECK(d.contains("pruned_actions"));
    }
    CHECK(s.log_lines().size() == decisions);
    CHECK(nlohmann::json::parse(s.log_lines().front()).contains("action"));
    CHECK(s.advance().at("tick") == expected_tick);  // finished sessions stay put
    CHECK_FALSE(s.submit_control(s.tick(), Control{}).accepted);

    const auto msg = s.result_message();
    CHECK(msg.at("type") == "result");
    const EpisodeRecord rec = episode_record_from_json(msg.at("record"));
    CHECK(rec.algorithm == "live");
    CHECK(rec.result.agents[0].planner == PlannerKind::Human);
    CHECK(replay_episode(*shared_env(), rec.result).match);
}

TEST_CASE("a SoRTS opponent reports its search in the decision summary") {
    Session s("s2", shared_env(), testing::default_spec(), StartOptions{}, 4);
    const auto snap = s.advance();
    const auto& summary = snap.at("decision_summary");
    REQUIRE(summary.size() == 2);
    CHECK(summary[1].at("agent") == 1);
    CHECK(summary[1].at("iterations") == 50);
    CHECK(summary[0].at("iterations") == 0);
}
