#ifndef SHUTTLEFLOW_CITYGEN_HPP
#define SHUTTLEFLOW_CITYGEN_HPP

#include "demand.hpp"
#include "io.hpp"
#include "netgraph.hpp"
#include "rng.hpp"
#include "types.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

namespace shuttleflow {

struct CityParams {
    int grid = 8;           // nodes per side
    double spacing = 700.0; // m
    std::size_t agents = 2000;
    double urban_speed = 13.9;
    double rural_speed = 22.2;
    double urban_capacity = 90.0; // veh/h
    double rural_capacity = 180.0;

    static CityParams for_size(const std::string& size) {
        CityParams p;
        if (size == "mini") return p;
        if (size == "small") {
            p.grid = 12;
            p.agents = 4000;
            return p;
        }
        throw Error("unknown city size '" + size + "' (expected mini or small)");
    }
};

struct City {
    Network network; // road classes assigned from the "city" zone
    std::vector<Zone> zones;
    std::vector<Agent> population;
    AgeGroupTable low2050;
    AgeGroupTable high2050;
};

namespace detail {

inline Zone square_zone(const std::string& id, double cx, double cy, double half) {
    return make_zone(id, {{cx - half, cy - half}, {cx + half, cy - half}, {cx + half, cy + half}, {cx - half, cy + half}},
                     ModeSet{Mode::Car});
}

inline Seconds clamp_time(double t) { return std::clamp(t, 0.0, kHorizon - 1.0); }

/// Approximate normal draw from the sum of uniforms (Irwin-Hall, n = 12).
inline double normal(RandomEngine& rng, double mean, double sd) {
    double s = 0.0;
    for (int i = 0; i < 12; ++i) s += uniform01(rng);
    return mean + sd * (s - 6.0);
}

inline Mode choose_mode(RandomEngine& rng, double dist) {
    const double u = uniform01(rng);
    if (dist < 1000.0) return u < 0.6 ? Mode::Walk : (u < 0.85 ? Mode::Bike : Mode::Car);
    if (dist < 3000.0) return u < 0.3 ? Mode::Bike : (u < 0.7 ? Mode::Car : Mode::Pt);
    return u < 0.6 ? Mode::Car : Mode::Pt;
}

inline Coord random_point(RandomEngine& rng, double lo, double hi) {
    return {uniform_real(rng, lo, hi), uniform_real(rng, lo, hi)};
}

} // namespace detail

/// Seeded grid city: bidirectional links between grid neighbours, three
/// nested car-ban zones (center, city, metro), and home-work(-shop)-home
/// trip chains.
inline City generate_city(const CityParams& p, std::uint64_t seed) {
    City city;
    const int n = p.grid;
    const double extent = (n - 1) * p.spacing;
    const double mid = extent / 2.0;
    const double scale = n / 8.0;
    city.zones.push_back(detail::square_zone("center", mid, mid, p.spacing * scale));
    city.zones.push_back(detail::square_zone("city", mid, mid, 2.0 * p.spacing * scale));
    city.zones.push_back(detail::square_zone("metro", mid, mid, mid + p.spacing / 2.0));
    const Zone& urban = city.zones[1];

    std::vector<Node> nodes;
    const auto node_id = [n](int r, int c) { return static_cast<NodeId>(r * n + c + 1); };
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) nodes.push_back({node_id(r, c), {c * p.spacing, r * p.spacing}});
    }
    std::vector<Link> links;
    const auto add = [&](int r1, int c1, int r2, int c2) {
        for (int dir = 0; dir < 2; ++dir) {
            Link l;
            l.id = static_cast<LinkId>(links.size() + 1);
            l.from = dir == 0 ? node_id(r1, c1) : node_id(r2, c2);
            l.to = dir == 0 ? node_id(r2, c2) : node_id(r1, c1);
            l.length = p.spacing;
            const Coord m = midpoint({c1 * p.spacing, r1 * p.spacing}, {c2 * p.spacing, r2 * p.spacing});
            const bool inner = point_in_zone(urban, m);
            l.free_speed = inner ? p.urban_speed : p.rural_speed;
            l.outflow_capacity = inner ? p.urban_capacity : p.rural_capacity;
            l.allowed_modes = ModeSet::all();
            links.push_back(l);
        }
    };
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            if (c + 1 < n) add(r, c, r, c + 1);
            if (r + 1 < n) add(r, c, r + 1, c);
        }
    }
    city.network = classify_road_types(build_network(std::move(nodes), std::move(links)), urban);

    RandomEngine rng(hash_seed(seed, "population"));
    const char* groups[] = {"young", "adult", "senior"};
    for (std::size_t i = 0; i < p.agents; ++i) {
        Agent a;
        a.id = static_cast<AgentId>(i + 1);
        const double g = uniform01(rng);
        a.age_group = groups[g < 0.17 ? 0 : (g < 0.8 ? 1 : 2)];
        a.home = detail::random_point(rng, 0.0, extent);
        // Half of all activity locations fall inside the urban core.
        const auto activity = [&]() {
            return uniform01(rng) < 0.5 ? detail::random_point(rng, mid - 2.0 * p.spacing * scale, mid + 2.0 * p.spacing * scale)
                                        : detail::random_point(rng, 0.0, extent);
        };
        const Coord work = activity();
        const Mode mode = detail::choose_mode(rng, distance(a.home, work));
        const Seconds leave = detail::clamp_time(detail::normal(rng, 7.75 * 3600.0, 3600.0));
        const Seconds back = detail::clamp_time(leave + detail::normal(rng, 8.5 * 3600.0, 1800.0));
        a.trips.push_back({mode, a.home, work, leave});
        if (uniform01(rng) < 0.3) {
            const Coord shop = activity();
            a.trips.push_back({mode, work, shop, back});
            a.trips.push_back({mode, shop, a.home, detail::clamp_time(back + uniform_real(rng, 1800.0, 5400.0))});
        } else {
            a.trips.push_back({mode, work, a.home, back});
        }
        validate_agent(a);
        city.population.push_back(std::move(a));
    }

    // base vs. 2050 populations (millions) and trips per person per day
    city.low2050 = {{"young", 0.17, 0.175, 2.8}, {"adult", 0.63, 0.64, 3.4}, {"senior", 0.20, 0.25, 2.4}};
    city.high2050 = {{"young", 0.17, 0.19, 2.8}, {"adult", 0.63, 0.674, 3.4}, {"senior", 0.20, 0.31, 2.4}};
    return city;
}

/// Matrix config for a generated city: 3 demand levels x 4 areas, plus a
/// 20 % fixed-fleet variant of the metro scenario.
inline std::string city_matrix_toml(std::uint64_t seed) {
    std::string s;
    s += "seed = " + std::to_string(seed) + "\n";
    s += "urban_zone = \"city\"\n";
    s += "zones = \"zones.json\"\n";
    s += "population = \"population.jsonl\"\n";
    s += "areas = [\"None\", \"Center\", \"City\", \"Metro\"]\n";
    s += "area.Center.zone = \"center\"\n";
    s += "area.City.zone = \"city\"\n";
    s += "area.Metro.zone = \"metro\"\n\n";
    s += "[network]\nnodes = \"nodes.csv\"\nlinks = \"links.csv\"\n\n";
    s += "[demand]\nlevels = [\"Base2011\", \"Low2050\", \"High2050\"]\n";
    s += "Base2011.multiplier = 1.0\n";
    s += "Low2050.age_table = \"age_low2050.csv\"\n";
    s += "High2050.age_table = \"age_high2050.csv\"\n\n";
    s += "[sav]\ncapacity = 4\nmax_pickup_delay_s = 600\n\n";
    s += "[fleet_reduction]\nfractions = [0.2]\nscenarios = [\"SC1.3\"]\n\n";
    s += "[events]\ngzip = true\n";
    return s;
}

/// Writes nodes.csv, links.csv, zones.json, population.jsonl, the age tables
/// and matrix.toml into `dir`.
inline void write_city(const City& city, const std::filesystem::path& dir, std::uint64_t seed) {
    std::filesystem::create_directories(dir);
    io::write_file((dir / "nodes.csv").string(), io::format_nodes(city.network));
    io::write_file((dir / "links.csv").string(), io::format_links(city.network));
    io::write_file((dir / "zones.json").string(), io::format_zones(city.zones));
    io::write_file((dir / "population.jsonl").string(), io::format_population(city.population));
    io::write_file((dir / "age_low2050.csv").string(), io::format_age_table(city.low2050));
    io::write_file((dir / "age_high2050.csv").string(), io::format_age_table(city.high2050));
    io::write_file((dir / "matrix.toml").string(), city_matrix_toml(seed));
}

} // namespace shuttleflow

#endif // SHUTTLEFLOW_CITYGEN_HPP
