#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sorts/selfplay.hpp"

namespace sorts {

/// One line of the batch summary: one episode flown by one algorithm.
struct SummaryRow {
    int episode = 0;
    std::uint64_t seed = 0;
    int n_agents = 0;
    std::string algorithm;
    double success_pct = 0.0;
    double ls_pct = 0.0;
    double timeout_pct = 0.0;
    double offtrack_pct = 0.0;
    /// Mean reference error over all agents of the episode, km.
    double mean_re = 0.0;
    /// Episode JSON path relative to the summary file; may be empty.
    std::string episode_file;

    friend bool operator==(const SummaryRow&, const SummaryRow&) = default;
};

SummaryRow summarize(const EpisodeResult& result, int episode, std::string algorithm, std::string episode_file);

/// Outcome percentages aggregated over several episodes of one agent count and algorithm.
struct AggregateRow {
    int n_agents = 0;
    std::string algorithm;
    int episodes = 0;
    double success_pct = 0.0;
    double ls_pct = 0.0;
    double timeout_pct = 0.0;
    double offtrack_pct = 0.0;
    double mean_re = 0.0;
};

/// Groups by (n_agents, algorithm), ordered by agent count then algorithm name. Percentages are
/// per agent, pooled over episodes.
std::vector<AggregateRow> aggregate(const std::vector<SummaryRow>& rows);

std::string summary_csv(const std::vector<SummaryRow>& rows);
/// Throws SchemaError when a required column is missing or a value does not parse.
std::vector<SummaryRow> parse_summary_csv(const std::string& text);
std::vector<SummaryRow> read_summary_csv(const std::filesystem::path& path);

/// Markdown table in the layout of a self-play results table: agents, algorithm, success,
/// failure breakdown and RE.
std::string markdown_table(const std::vector<SummaryRow>& rows);

/// Top-down SVG with solid reference paths and dashed executed trajectories, coloured per agent.
std::string trajectory_svg(const EpisodeResult& result);

/// Grouped bar chart of success percentage per agent count and algorithm.
std::string success_bar_svg(const std::vector<SummaryRow>& rows);

}  // namespace sorts
