#include "sorts/report.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <limits>
#include <map>
#include <sstream>

namespace sorts {

namespace {

constexpr std::array<const char*, 10> kColumns = {"episode",      "seed",    "n_agents", "algorithm", "success_pct",
                                                  "ls_pct",       "timeout_pct", "offtrack_pct", "mean_re",
                                                  "episode_file"};

// Fixed formatting keeps summaries byte-stable across runs and platforms.
std::string fmt(double v, int digits = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

template <class T>
T parse_number(const std::string& s, const std::string& column, std::size_t line) {
    std::istringstream in(s);
    T v{};
    in >> v;
    if (!in || !(in >> std::ws).eof())
        throw SchemaError("summary line " + std::to_string(line) + ": bad value '" + s + "' in column " + column);
    return v;
}

const std::array<const char*, 8> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                             "#ff7f0e", "#17becf", "#8c564b", "#e377c2"};

struct Bounds {
    double x0 = std::numeric_limits<double>::infinity(), y0 = x0;
    double x1 = -std::numeric_limits<double>::infinity(), y1 = x1;
    void add(double x, double y) {
        x0 = std::min(x0, x);
        y0 = std::min(y0, y);
        x1 = std::max(x1, x);
        y1 = std::max(y1, y);
    }
};

}  // namespace

SummaryRow summarize(const EpisodeResult& result, int episode, std::string algorithm, std::string episode_file) {
    SummaryRow r;
    r.episode = episode;
    r.seed = result.config.seed;
    r.n_agents = result.config.n_agents;
    r.algorithm = std::move(algorithm);
    r.episode_file = std::move(episode_file);
    const double n = static_cast<double>(result.agents.size());
    if (n > 0) {
        r.success_pct = 100.0 * static_cast<double>(result.count(Outcome::Success)) / n;
        r.ls_pct = 100.0 * static_cast<double>(result.count(Outcome::FailLS)) / n;
        r.timeout_pct = 100.0 * static_cast<double>(result.count(Outcome::FailTimeout)) / n;
        r.offtrack_pct = 100.0 * static_cast<double>(result.count(Outcome::FailOfftrack)) / n;
        double re = 0.0;
        for (const auto& a : result.agents)
            re += a.reference_error;
        r.mean_re = re / n;
    }
    return r;
}

std::vector<AggregateRow> aggregate(const std::vector<SummaryRow>& rows) {
    std::map<std::pair<int, std::string>, std::vector<const SummaryRow*>> groups;
    for (const auto& r : rows)
        groups[{r.n_agents, r.algorithm}].push_back(&r);
    std::vector<AggregateRow> out;
    for (const auto& [key, members] : groups) {
        AggregateRow a;
        a.n_agents = key.first;
        a.algorithm = key.second;
        a.episodes = static_cast<int>(members.size());
        for (const auto* m : members) {
            a.success_pct += m->success_pct;
            a.ls_pct += m->ls_pct;
            a.timeout_pct += m->timeout_pct;
            a.offtrack_pct += m->offtrack_pct;
            a.mean_re += m->mean_re;
        }
        const double k = static_cast<double>(members.size());
        a.success_pct /= k;
        a.ls_pct /= k;
        a.timeout_pct /= k;
        a.offtrack_pct /= k;
        a.mean_re /= k;
        out.push_back(std::move(a));
    }
    return out;
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
    std::ostringstream out;
    for (std::size_t i = 0; i < kColumns.size(); ++i)
        out << (i ? "," : "") << kColumns[i];
    out << '\n';
    for (const auto& r : rows) {
        if (r.algorithm.find(',') != std::string::npos || r.episode_file.find(',') != std::string::npos)
            throw InputError("summary: commas are not allowed in algorithm names or file paths");
        out << r.episode << ',' << r.seed << ',' << r.n_agents << ',' << r.algorithm << ',' << fmt(r.success_pct, 4) << ','
            << fmt(r.ls_pct, 4) << ',' << fmt(r.timeout_pct, 4) << ',' << fmt(r.offtrack_pct, 4) << ','
            << fmt(r.mean_re) << ',' << r.episode_file << '\n';
    }
    return out.str();
}

std::vector<SummaryRow> parse_summary_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line.empty())
        throw SchemaError("summary: missing header");
    const auto header = split(line, ',');
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i)
        col[header[i]] = i;
    for (const char* c : kColumns)
        if (!col.count(c))
            throw SchemaError(std::string("summary: missing column ") + c);

    std::vector<SummaryRow> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r")
            continue;
        const auto f = split(line, ',');
        if (f.size() != header.size())
            throw SchemaError("summary line " + std::to_string(lineno) + ": expected " + std::to_string(header.size()) +
                              " fields");
        const auto at = [&](const char* c) -> const std::string& { return f[col.at(c)]; };
        SummaryRow r;
        r.episode = parse_number<int>(at("episode"), "episode", lineno);
        r.seed = parse_number<std::uint64_t>(at("seed"), "seed", lineno);
        r.n_agents = parse_number<int>(at("n_agents"), "n_agents", lineno);
        r.algorithm = at("algorithm");
        r.success_pct = parse_number<double>(at("success_pct"), "success_pct", lineno);
        r.ls_pct = parse_number<double>(at("ls_pct"), "ls_pct", lineno);
        r.timeout_pct = parse_number<double>(at("timeout_pct"), "timeout_pct", lineno);
        r.offtrack_pct = parse_number<double>(at("offtrack_pct"), "offtrack_pct", lineno);
        r.mean_re = parse_number<double>(at("mean_re"), "mean_re", lineno);
        r.episode_file = at("episode_file");
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<SummaryRow> read_summary_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open summary " + path.string());
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_summary_csv(text);
}

std::string markdown_table(const std::vector<SummaryRow>& rows) {
    std::ostringstream out;
    out << "| Agents | Algorithm | Episodes | Success % | LS % | Timeout % | Offtrack % | RE (km) |\n";
    out << "|---:|---|---:|---:|---:|---:|---:|---:|\n";
    for (const auto& a : aggregate(rows))
        out << "| " << a.n_agents << " | " << a.algorithm << " | " << a.episodes << " | " << fmt(a.success_pct, 1) << " | "
            << fmt(a.ls_pct, 1) << " | " << fmt(a.timeout_pct, 1) << " | " << fmt(a.offtrack_pct, 1) << " | "
            << fmt(a.mean_re, 3) << " |\n";
    return out.str();
}

std::string trajectory_svg(const EpisodeResult& result) {
    Bounds b;
    for (const auto& a : result.agents) {
        for (const auto& w : a.reference.waypoints())
            b.add(w.x, w.y);
        for (const auto& p : a.trajectory.points)
            b.add(p.state.x, p.state.y);
    }
    if (result.agents.empty())
        b = Bounds{-1.0, -1.0, 1.0, 1.0};
    const double margin = 0.5;
    const double scale = 40.0;  // pixels per km
    const double w = (b.x1 - b.x0 + 2 * margin) * scale;
    const double h = (b.y1 - b.y0 + 2 * margin) * scale;
    // SVG y grows downward; north must point up.
    const auto px = [&](double x) { return fmt((x - b.x0 + margin) * scale, 2); };
    const auto py = [&](double y) { return fmt((b.y1 - y + margin) * scale, 2); };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(w, 0) << "\" height=\"" << fmt(h, 0)
        << "\" viewBox=\"0 0 " << fmt(w, 2) << ' ' << fmt(h, 2) << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<title>episode seed " << result.config.seed << ", " << result.agents.size() << " agents</title>\n";
    for (std::size_t i = 0; i < result.agents.size(); ++i) {
        const auto& a = result.agents[i];
        const char* colour = kPalette[i % kPalette.size()];
        out << "<polyline class=\"reference\" data-agent=\"" << a.id << "\" fill=\"none\" stroke=\"" << colour
            << "\" stroke-width=\"2\" points=\"";
        for (std::size_t k = 0; k < a.reference.waypoints().size(); ++k) {
            const auto& p = a.reference.waypoints()[k];
            out << (k ? " " : "") << px(p.x) << ',' << py(p.y);
        }
        out << "\"/>\n";
        out << "<polyline class=\"executed\" data-agent=\"" << a.id << "\" fill=\"none\" stroke=\"" << colour
            << "\" stroke-width=\"1.5\" stroke-dasharray=\"6 4\" points=\"";
        for (std::size_t k = 0; k < a.trajectory.points.size(); ++k) {
            const auto& s = a.trajectory.points[k].state;
            out << (k ? " " : "") << px(s.x) << ',' << py(s.y);
        }
        out << "\"/>\n";
        if (!a.trajectory.points.empty()) {
            const auto& s = a.trajectory.points.front().state;
            out << "<text x=\"" << px(s.x) << "\" y=\"" << py(s.y) << "\" font-size=\"12\" fill=\"" << colour << "\">"
                << a.id << ' ' << a.sector << ' ' << to_string(a.outcome) << "</text>\n";
        }
    }
    out << "</svg>\n";
    return out.str();
}

std::string success_bar_svg(const std::vector<SummaryRow>& rows) {
    const auto groups = aggregate(rows);
    std::vector<int> counts;
    std::vector<std::string> algorithms;
    for (const auto& g : groups) {
        if (std::find(counts.begin(), counts.end(), g.n_agents) == counts.end())
            counts.push_back(g.n_agents);
        if (std::find(algorithms.begin(), algorithms.end(), g.algorithm) == algorithms.end())
            algorithms.push_back(g.algorithm);
    }
    std::sort(algorithms.begin(), algorithms.end());

    const double bar = 28.0, gap = 24.0, plot_h = 200.0, left = 50.0, top = 20.0;
    const double group_w = bar * static_cast<double>(std::max<std::size_t>(1, algorithms.size())) + gap;
    const double width = left + group_w * static_cast<double>(std::max<std::size_t>(1, counts.size())) + 140.0;
    const double height = top + plot_h + 50.0;

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width, 0) << "\" height=\"" << fmt(height, 0)
        << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<line x1=\"" << fmt(left, 1) << "\" y1=\"" << fmt(top + plot_h, 1) << "\" x2=\"" << fmt(width - 130, 1)
        << "\" y2=\"" << fmt(top + plot_h, 1) << "\" stroke=\"black\"/>\n";
    for (int pct = 0; pct <= 100; pct += 25) {
        const double y = top + plot_h * (1.0 - pct / 100.0);
        out << "<text x=\"" << fmt(left - 8, 1) << "\" y=\"" << fmt(y + 4, 1) << "\" font-size=\"11\" text-anchor=\"end\">"
            << pct << "</text>\n";
    }
    for (std::size_t c = 0; c < counts.size(); ++c) {
        const double gx = left + gap / 2 + group_w * static_cast<double>(c);
        for (std::size_t k = 0; k < algorithms.size(); ++k) {
            const auto it = std::find_if(groups.begin(), groups.end(), [&](const AggregateRow& g) {
                return g.n_agents == counts[c] && g.algorithm == algorithms[k];
            });
            if (it == groups.end())
                continue;
            const double hbar = plot_h * it->success_pct / 100.0;
            out << "<rect class=\"bar\" data-agents=\"" << counts[c] << "\" data-algorithm=\"" << algorithms[k]
                << "\" x=\"" << fmt(gx + bar * static_cast<double>(k), 1) << "\" y=\"" << fmt(top + plot_h - hbar, 1)
                << "\" width=\"" << fmt(bar - 2, 1) << "\" height=\"" << fmt(hbar, 1) << "\" fill=\""
                << kPalette[k % kPalette.size()] << "\"><title>" << fmt(it->success_pct, 1) << "%</title></rect>\n";
        }
        out << "<text x=\"" << fmt(gx + bar * static_cast<double>(algorithms.size()) / 2, 1) << "\" y=\""
            << fmt(top + plot_h + 18, 1) << "\" font-size=\"12\" text-anchor=\"middle\">" << counts[c]
            << " agents</text>\n";
    }
    for (std::size_t k = 0; k < algorithms.size(); ++k) {
        const double y = top + 16.0 * static_cast<double>(k);
        out << "<rect x=\"" << fmt(width - 120, 1) << "\" y=\"" << fmt(y, 1) << "\" width=\"10\" height=\"10\" fill=\""
            << kPalette[k % kPalette.size()] << "\"/><text x=\"" << fmt(width - 105, 1) << "\" y=\"" << fmt(y + 9, 1)
            << "\" font-size=\"11\">" << algorithms[k] << "</text>\n";
    }
    out << "<text x=\"" << fmt(left, 1) << "\" y=\"" << fmt(height - 8, 1) << "\" font-size=\"11\">success %</text>\n";
    out << "</svg>\n";
    return out.str();
}

}  // namespace sorts
