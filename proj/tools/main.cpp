#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

int main(int argc, char** argv) {
    using namespace sorts::cli;
    configure_logging();

    CLI::App app{"Social tree search for multi-agent terminal airspace"};
    app.require_subcommand(1);

    SelfplayOptions sp;
    auto* selfplay_cmd = app.add_subcommand("selfplay", "Run paired self-play batches for SoRTS and the ablation");
    selfplay_cmd->add_option("--spec", sp.spec, "Experiment spec (JSON)")->required()->check(CLI::ExistingFile);
    selfplay_cmd->add_option("--out", sp.out, "Output directory")->required();
    selfplay_cmd->add_option("--jobs", sp.jobs, "Episodes run in parallel")->check(CLI::PositiveNumber);

    ReplayOptions rp;
    auto* replay_cmd = app.add_subcommand("replay", "Re-simulate a logged episode and compare it bit for bit");
    replay_cmd->add_option("file", rp.episode, "Episode JSON")->required()->check(CLI::ExistingFile);
    bool quiet = false;
    replay_cmd->add_flag("--quiet", quiet, "Do not print the decision records");

    std::filesystem::path summary, plot_out;
    auto* plot_cmd = app.add_subcommand("plot", "Render SVG plots from a self-play summary");
    plot_cmd->add_option("--summary", summary, "summary.csv")->required()->check(CLI::ExistingFile);
    plot_cmd->add_option("--out", plot_out, "Output directory")->required();

    std::uint16_t port = 8080;
    std::filesystem::path serve_spec;
    auto* serve_cmd = app.add_subcommand("serve", "Serve live sessions over WebSocket");
    serve_cmd->add_option("--port", port, "TCP port; 0 picks a free one");
    serve_cmd->add_option("--spec", serve_spec, "Experiment spec (JSON)")->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    if (*selfplay_cmd)
        return selfplay(sp, std::cerr);
    if (*replay_cmd) {
        rp.print_decisions = !quiet;
        return replay(rp, std::cout);
    }
    if (*plot_cmd)
        return plot(summary, plot_out, std::cerr);
    if (*serve_cmd)
        return serve(port, serve_spec, std::cout);
    return kUsage;
}
