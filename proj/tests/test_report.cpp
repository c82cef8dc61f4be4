#include <doctest.h>

#include <regex>

#include "sorts/report.hpp"
#include "support.hpp"

using namespace sorts;

namespace {

EpisodeResult fake_result(int n, std::vector<Outcome> outcomes, std::vector<double> re) {
    EpisodeResult r;
    r.config.n_agents = n;
    r.config.seed = 42;
    for (int i = 0; i < n; ++i) {
        AgentResult a;
        a.id = i;
        a.outcome = outcomes[static_cast<std::size_t>(i)];
        a.reference_error = re[static_cast<std::size_t>(i)];
        r.agents.push_back(a);
    }
    return r;
}

std::size_t count(const std::string& text, const std::string& needle) {
    std::size_t n = 0;
    for (auto p = text.find(needle); p != std::string::npos; p = text.find(needle, p + 1))
        ++n;
    return n;
}

}  // namespace

TEST_CASE("summaries count outcomes per agent") {
    const auto r = fake_result(4, {Outcome::Success, Outcome::FailLS, Outcome::FailTimeout, Outcome::Success},
                               {0.1, 0.2, 0.3, 0.4});
    const SummaryRow s = summarize(r, 7, "sorts", "episodes/x.json");
    CHECK(s.episode == 7);
    CHECK(s.seed == 42);
    CHECK(s.n_agents == 4);
    CHECK(s.success_pct == 50.0);
    CHECK(s.ls_pct == 25.0);
    CHECK(s.timeout_pct == 25.0);
    CHECK(s.offtrack_pct == 0.0);
    CHECK(s.mean_re == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("aggregation groups by agent count and algorithm") {
    std::vector<SummaryRow> rows;
    rows.push_back(summarize(fake_result(2, {Outcome::Success, Outcome::Success}, {0.1, 0.1}), 0, "sorts", ""));
    rows.push_back(summarize(fake_result(2, {Outcome::Success, Outcome::FailLS}, {0.3, 0.1}), 1, "sorts", ""));
    rows.push_back(summarize(fake_result(2, {Outcome::FailLS, Outcome::FailLS}, {0.5, 0.5}), 0, "ablation", ""));
    rows.push_back(summarize(fake_result(3, {Outcome::Success, Outcome::Success, Outcome::Success}, {0, 0, 0}), 0,
                             "sorts", ""));
    const auto agg = aggregate(rows);
    REQUIRE(agg.size() == 3);
    CHECK(agg[0].n_agents == 2);
    CHECK(agg[0].algorithm == "ablation");
    CHECK(agg[0].ls_pct == 100.0);
    CHECK(agg[1].algorithm == "sorts");
    CHECK(agg[1].episodes == 2);
    CHECK(agg[1].success_pct == 75.0);
    CHECK(agg[1].mean_re == doctest::Approx(0.15));
    CHECK(agg[2].n_agents == 3);

    const std::string md = markdown_table(rows);
    CHECK(md.rfind("| Agents | Algorithm | Episodes | Success % | LS % | Timeout % | Offtrack % | RE (km) |", 0) == 0);
    CHECK(md.find("| 2 | sorts | 2 | 75.0 | 25.0 | 0.0 | 0.0 | 0.150 |") != std::string::npos);
    CHECK(count(md, "\n") == 5);
}

TEST_CASE("summary CSV is byte-stable and round trips") {
    std::vector<SummaryRow> rows;
    rows.push_back(summarize(fake_result(3, {Outcome::Success, Outcome::FailOfftrack, Outcome::Success}, {0.1, 2.5, 0.2}),
                             0, "sorts", "episodes/b00_n3_sorts_0000.json"));
    rows.push_back(summarize(fake_result(2, {Outcome::FailTimeout, Outcome::Success}, {0.0, 1.0 / 3.0}), 1, "ablation", ""));
    const std::string csv = summary_csv(rows);
    CHECK(csv.rfind("episode,seed,n_agents,algorithm,success_pct,ls_pct,timeout_pct,offtrack_pct,mean_re,episode_file\n", 0) ==
          0);
    CHECK(csv.find("0,42,3,sorts,66.6667,0.0000,0.0000,33.3333,0.933333,episodes/b00_n3_sorts_0000.json\n") !=
          std::string::npos);
    CHECK(summary_csv(rows) == csv);

    const auto back = parse_summary_csv(csv);
    REQUIRE(back.size() == 2);
    CHECK(back[1].algorithm == "ablation");
    CHECK(back[1].timeout_pct == 50.0);
    CHECK(back[1].episode_file.empty());
    CHECK(summary_csv(back) == csv);

    CHECK(parse_summary_csv(summary_csv({})).empty());
    CHECK_THROWS_AS(parse_summary_csv(""), SchemaError);
    CHECK_THROWS_AS(parse_summary_csv("episode,seed\n1,2\n"), SchemaError);
    std::string bad = csv;
    bad.replace(bad.find("66.6667"), 7, "lots");
    CHECK_THROWS_AS(parse_summary_csv(bad), SchemaError);
    rows[0].algorithm = "a,b";
    CHECK_THROWS_AS(summary_csv(rows), InputError);
}

TEST_CASE("trajectory plot draws solid references and dashed executions") {
    const auto& env = testing::default_environment();
    EpisodeConfig c;
    c.n_agents = 3;
    c.seed = 12;
    c.planners = {PlannerKind::Ablation};
    const auto r = run_episode(env, c);
    const std::string svg = trajectory_svg(r);
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(count(svg, "class=\"reference\"") == 3);
    CHECK(count(svg, "class=\"executed\"") == 3);
    CHECK(count(svg, "stroke-dasharray") == 3);
    // Every executed polyline has one vertex per trajectory point.
    const std::regex executed("class=\"executed\" data-agent=\"(\\d)\"[^>]*points=\"([^\"]*)\"");
    int seen = 0;
    for (std::sregex_iterator it(svg.begin(), svg.end(), executed), end; it != end; ++it) {
        const int id = std::stoi((*it)[1]);
        const std::string pts = (*it)[2];
        CHECK(static_cast<std::size_t>(count(pts, " ") + 1) == r.agents[static_cast<std::size_t>(id)].trajectory.size());
        ++seen;
    }
    CHECK(seen == 3);
}

TEST_CASE("success bar chart has one bar per group") {
    std::vector<SummaryRow> rows;
    for (int n : {2, 3})
        for (const char* alg : {"sorts", "ablation"})
            rows.push_back(summarize(fake_result(n, std::vector<Outcome>(static_cast<std::size_t>(n), Outcome::Success),
                                                 std::vector<double>(static_cast<std::size_t>(n), 0.0)),
                                     0, alg, ""));
    const std::string svg = success_bar_svg(rows);
    CHECK(count(svg, "class=\"bar\"") == 4);
    CHECK(svg.find("data-agents=\"3\" data-algorithm=\"sorts\"") != std::string::npos);
    CHECK(count(success_bar_svg({}), "class=\"bar\"") == 0);
}
