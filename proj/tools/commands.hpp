#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

namespace sorts::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kMismatch = 2, kInternal = 3 };

struct SelfplayOptions {
    std::filesystem::path spec;
    std::filesystem::path out;
    int jobs = 1;
};

/// Runs every batch of the experiment file with both planners on identical seeds. Writes one JSON file per
/// episode under out/episodes, plus out/summary.csv and out/summary.md after every batch so an
/// interrupted run keeps what it finished.
int selfplay(const SelfplayOptions& options, std::ostream& log);

struct ReplayOptions {
    std::filesystem::path episode;
    /// Print one line per logged decision.
    bool print_decisions = true;
};

/// Re-simulates a logged episode and compares it bit for bit.
int replay(const ReplayOptions& options, std::ostream& out);

/// SVG trajectory plots for every episode named in the summary, plus a success bar chart.
int plot(const std::filesystem::path& summary, const std::filesystem::path& out_dir, std::ostream& log);

/// Serves live sessions until SIGINT or SIGTERM.
int serve(std::uint16_t port, const std::filesystem::path& spec, std::ostream& log);

/// Applies SORTS_LOG_LEVEL (error, warn, info, debug) to the global logger.
void configure_logging();

}  // namespace sorts::cli
