#include "sorts/costmap.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <random>

namespace sorts {

namespace {

constexpr char kMagic[4] = {'S', 'C', 'M', 'P'};
constexpr std::uint16_t kBinaryVersion = 1;

static_assert(std::endian::native == std::endian::little, "binary costmap I/O assumes a little-endian host");

template <class T>
void put(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in)
        throw SchemaError("costmap: truncated binary stream");
    return v;
}

std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 finalizer
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

CostMap::CostMap(Vec3 origin, std::array<double, 3> cell_size, std::array<std::size_t, 3> dims)
    : origin_(origin), cell_size_(cell_size), dims_(dims), values_(dims[0] * dims[1] * dims[2], 0.0) {
    for (double c : cell_size)
        if (!(c > 0.0))
            throw ConfigError("costmap: cell size must be positive");
}

std::ptrdiff_t CostMap::cell_of(Vec3 p) const {
    const double fx = std::floor((p.x - origin_.x) / cell_size_[0]);
    const double fy = std::floor((p.y - origin_.y) / cell_size_[1]);
    const double fz = std::floor((p.z - origin_.z) / cell_size_[2]);
    if (fx < 0 || fy < 0 || fz < 0 || fx >= static_cast<double>(dims_[0]) || fy >= static_cast<double>(dims_[1]) ||
        fz >= static_cast<double>(dims_[2]))
        return -1;
    return static_cast<std::ptrdiff_t>(
        flat(static_cast<std::size_t>(fx), static_cast<std::size_t>(fy), static_cast<std::size_t>(fz)));
}

double CostMap::value_at(Vec3 p) const {
    const auto c = cell_of(p);
    return c < 0 ? 0.0 : values_[static_cast<std::size_t>(c)];
}

Vec3 CostMap::cell_center(std::size_t i) const {
    const std::size_t iz = i % dims_[2];
    const std::size_t iy = (i / dims_[2]) % dims_[1];
    const std::size_t ix = i / (dims_[2] * dims_[1]);
    return {origin_.x + (static_cast<double>(ix) + 0.5) * cell_size_[0],
            origin_.y + (static_cast<double>(iy) + 0.5) * cell_size_[1],
            origin_.z + (static_cast<double>(iz) + 0.5) * cell_size_[2]};
}

void CostMap::set_from_counts(std::span<const std::uint32_t> counts) {
    if (counts.size() != values_.size())
        throw InputError("costmap: count grid size mismatch");
    const std::uint32_t max_count = counts.empty() ? 0 : *std::max_element(counts.begin(), counts.end());
    if (max_count == 0) {
        std::fill(values_.begin(), values_.end(), 0.0);
        return;
    }
    const double denom = std::log1p(static_cast<double>(max_count));
    for (std::size_t i = 0; i < counts.size(); ++i)
        values_[i] = counts[i] == max_count ? 1.0 : std::log1p(static_cast<double>(counts[i])) / denom;
}

void CostMap::save(std::ostream& out) const {
    out.write(kMagic, 4);
    put<std::uint16_t>(out, kBinaryVersion);
    for (auto d : dims_)
        put<std::uint64_t>(out, d);
    put<double>(out, origin_.x);
    put<double>(out, origin_.y);
    put<double>(out, origin_.z);
    for (double c : cell_size_)
        put<double>(out, c);
    out.write(reinterpret_cast<const char*>(values_.data()), static_cast<std::streamsize>(values_.size() * sizeof(double)));
}

CostMap CostMap::load(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw SchemaError("costmap: bad magic");
    if (get<std::uint16_t>(in) != kBinaryVersion)
        throw SchemaError("costmap: unsupported version");
    std::array<std::size_t, 3> dims{};
    for (auto& d : dims)
        d = static_cast<std::size_t>(get<std::uint64_t>(in));
    Vec3 origin{get<double>(in), get<double>(in), get<double>(in)};
    std::array<double, 3> cell{};
    for (auto& c : cell)
        c = get<double>(in);
    CostMap map(origin, cell, dims);
    in.read(reinterpret_cast<char*>(map.values_.data()), static_cast<std::streamsize>(map.values_.size() * sizeof(double)));
    if (!in)
        throw SchemaError("costmap: truncated value block");
    return map;
}

nlohmann::json CostMap::to_json() const {
    return {{"version", "v1"},
            {"origin", {origin_.x, origin_.y, origin_.z}},
            {"cell_size", cell_size_},
            {"dims", dims_},
            {"values", values_}};
}

CostMap CostMap::from_json(const nlohmann::json& j) {
    if (j.value("version", "") != "v1")
        throw SchemaError("costmap json: expected version \"v1\"");
    const auto o = j.at("origin").get<std::array<double, 3>>();
    CostMap map({o[0], o[1], o[2]}, j.at("cell_size").get<std::array<double, 3>>(),
                j.at("dims").get<std::array<std::size_t, 3>>());
    auto values = j.at("values").get<std::vector<double>>();
    if (values.size() != map.values_.size())
        throw SchemaError("costmap json: value count does not match dims");
    map.values_ = std::move(values);
    return map;
}

CostMap empty_grid_for(const std::vector<ReferencePath>& paths, double margin) {
    if (paths.empty())
        throw InputError("costmap: empty path library");
    Vec3 lo{1e300, 1e300, 0.0};
    Vec3 hi{-1e300, -1e300, 0.0};
    for (const auto& p : paths) {
        for (const auto& w : p.waypoints()) {
            lo = {std::min(lo.x, w.x), std::min(lo.y, w.y), 0.0};
            hi = {std::max(hi.x, w.x), std::max(hi.y, w.y), std::max(hi.z, w.z)};
        }
    }
    const auto cell = CostMap::kDefaultCellSize;
    const Vec3 origin{std::floor((lo.x - margin) / cell[0]) * cell[0], std::floor((lo.y - margin) / cell[1]) * cell[1],
                      0.0};
    const auto span = [](double a, double b, double c) { return static_cast<std::size_t>(std::ceil((b - a) / c)); };
    return CostMap(origin, cell,
                   {span(origin.x, hi.x + margin, cell[0]), span(origin.y, hi.y + margin, cell[1]),
                    span(0.0, hi.z + margin, cell[2])});
}

std::vector<Vec3> synthetic_samples(const ReferencePath& path, std::size_t path_index, const CostMapBuildParams& prm) {
    std::mt19937_64 rng(mix(prm.seed, path_index));
    std::normal_distribution<double> noise(0.0, prm.noise_sigma);
    const auto n_along = static_cast<std::size_t>(std::floor(path.length() / prm.sample_spacing)) + 1;
    std::vector<Vec3> along(n_along);
    for (std::size_t i = 0; i < n_along; ++i)
        along[i] = path.point_at(static_cast<double>(i) * prm.sample_spacing);

    std::vector<Vec3> out;
    out.reserve(prm.samples_per_path * n_along);
    for (std::size_t t = 0; t < prm.samples_per_path; ++t) {
        for (const auto& p : along) {
            const double dx = noise(rng);
            const double dy = noise(rng);
            const double dz = noise(rng);
            out.push_back({p.x + dx, p.y + dy, p.z + dz});
        }
    }
    return out;
}

CostMap build_costmap(const std::vector<ReferencePath>& paths, const CostMapBuildParams& params) {
    CostMap map = empty_grid_for(paths);
    std::vector<std::uint32_t> counts(map.cell_count(), 0);
    for (std::size_t i = 0; i < paths.size(); ++i) {
        for (const auto& s : synthetic_samples(paths[i], i, params)) {
            const auto c = map.cell_of(s);
            if (c >= 0)
                ++counts[static_cast<std::size_t>(c)];
        }
    }
    map.set_from_counts(counts);
    return map;
}

double joint_value(const CostMap& map, std::span<const AgentState> states) {
    if (states.empty())
        return 0.0;
    double total = 0.0;
    for (const auto& s : states)
        total += map.value_at(s.position());
    return total / static_cast<double>(states.size());
}

}  // namespace sorts
