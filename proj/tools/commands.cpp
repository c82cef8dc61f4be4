#include "commands.hpp"

#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <ostream>

#include <spdlog/spdlog.h>

#include "sorts/live/server.hpp"
#include "sorts/report.hpp"
#include "sorts/scenario.hpp"

namespace sorts::cli {

namespace {

namespace fs = std::filesystem;

// Maps the library's exception families onto the documented exit codes.
int guarded(std::ostream& err, const std::function<int()>& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const SchemaError& e) {
        err << "schema error: " << e.what() << '\n';
        return kUsage;
    } catch (const InputError& e) {
        err << "input error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kInternal;
    }
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ConfigError("cannot write " + path.string());
    out << text;
    if (!out)
        throw ConfigError("failed writing " + path.string());
}

std::string episode_name(std::size_t batch, int n_agents, const std::string& algorithm, int episode) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "b%02zu_n%d_%s_%04d.json", batch, n_agents, algorithm.c_str(), episode);
    return buf;
}

}  // namespace

void configure_logging() {
    spdlog::set_level(spdlog::level::warn);
    const char* v = std::getenv("SORTS_LOG_LEVEL");
    if (!v)
        return;
    const std::string level(v);
    if (level == "error")
        spdlog::set_level(spdlog::level::err);
    else if (level == "warn")
        spdlog::set_level(spdlog::level::warn);
    else if (level == "info")
        spdlog::set_level(spdlog::level::info);
    else if (level == "debug")
        spdlog::set_level(spdlog::level::debug);
    else
        spdlog::warn("ignoring SORTS_LOG_LEVEL='{}'; expected error, warn, info or debug", level);
}

int selfplay(const SelfplayOptions& options, std::ostream& log) {
    return guarded(log, [&] {
        if (options.jobs < 1)
            throw ConfigError("--jobs must be at least 1");
        const ExperimentSpec spec = load_spec(options.spec);
        const Environment env = make_environment(spec);
        fs::create_directories(options.out / "episodes");

        std::vector<SummaryRow> rows;
        for (std::size_t b = 0; b < spec.batches.size(); ++b) {
            const auto& batch = spec.batches[b];
            for (const PlannerKind kind : {PlannerKind::Sorts, PlannerKind::Ablation}) {
                const std::string algorithm = to_string(kind);
                spdlog::info("batch {}: {} agents, {} episodes, {}", b, batch.n_agents, batch.episodes, algorithm);
                const auto results = run_batch(env, episode_configs(spec, batch, kind), options.jobs);
                for (std::size_t i = 0; i < results.size(); ++i) {
                    const int episode = static_cast<int>(i);
                    const std::string rel = "episodes/" + episode_name(b, batch.n_agents, algorithm, episode);
                    const EpisodeRecord record{spec, algorithm, episode, results[i]};
                    write_file(options.out / rel, to_json(record).dump() + "\n");
                    rows.push_back(summarize(results[i], episode, algorithm, rel));
                }
                write_file(options.out / "summary.csv", summary_csv(rows));
                write_file(options.out / "summary.md", markdown_table(rows));
            }
        }
        if (spec.batches.empty()) {
            write_file(options.out / "summary.csv", summary_csv(rows));
            write_file(options.out / "summary.md", markdown_table(rows));
        }
        log << markdown_table(rows);
        return int{kOk};
    });
}

int replay(const ReplayOptions& options, std::ostream& out) {
    return guarded(out, [&] {
        const EpisodeRecord record = load_episode_record(options.episode);
        const Environment env = make_environment(record.spec);
        if (options.print_decisions)
            for (const auto& d : record.result.decisions)
                out << "tick " << d.tick << " agent " << d.agent_id << " action " << d.action
                    << (d.forced ? " forced" : "") << (d.overrun ? " overrun" : "") << " iterations " << d.iterations
                    << '\n';
        const ReplayReport report = replay_episode(env, record.result);
        if (!report.match) {
            out << "mismatch at tick " << report.first_divergent_tick << " agent " << report.agent_id << ": "
                << report.detail << '\n';
            return int{kMismatch};
        }
        out << "match: " << record.result.ticks << " ticks, " << record.result.agents.size() << " agents\n";
        return int{kOk};
    });
}

int plot(const fs::path& summary, const fs::path& out_dir, std::ostream& log) {
    return guarded(log, [&] {
        const auto rows = read_summary_csv(summary);
        if (rows.empty()) {
            log << "warning: " << summary.string() << " has no episodes; nothing to plot\n";
            return int{kOk};
        }
        fs::create_directories(out_dir / "trajectories");
        write_file(out_dir / "success.svg", success_bar_svg(rows));
        const fs::path base = summary.parent_path();
        std::size_t plotted = 0;
        for (const auto& r : rows) {
            if (r.episode_file.empty())
                continue;
            const EpisodeRecord record = load_episode_record(base / r.episode_file);
            const fs::path name = fs::path(r.episode_file).stem().string() + ".svg";
            write_file(out_dir / "trajectories" / name, trajectory_svg(record.result));
            ++plotted;
        }
        log << "wrote success.svg and " << plotted << " trajectory plots to " << out_dir.string() << '\n';
        return int{kOk};
    });
}

int serve(std::uint16_t port, const fs::path& spec_path, std::ostream& log) {
    return guarded(log, [&] {
        const ExperimentSpec spec = load_spec(spec_path);
        // Block the signals before any thread starts so only sigwait sees them.
        sigset_t set;
        sigemptyset(&set);
        sigaddset(&set, SIGINT);
        sigaddset(&set, SIGTERM);
        pthread_sigmask(SIG_BLOCK, &set, nullptr);

        live::ServerOptions opts;
        opts.address = "0.0.0.0";
        opts.port = port;
        live::Server server(spec, opts);
        server.start();
        log << "listening on port " << server.port() << std::endl;
        int sig = 0;
        sigwait(&set, &sig);
        log << "shutting down\n";
        server.stop();
        return int{kOk};
    });
}

}  // namespace sorts::cli
