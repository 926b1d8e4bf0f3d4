#ifndef SHUTTLEFLOW_TEST_FIXTURES_HPP
#define SHUTTLEFLOW_TEST_FIXTURES_HPP

#include <shuttleflow/citygen.hpp>
#include <shuttleflow/engine.hpp>
#include <shuttleflow/netgraph.hpp>

#include <vector>

namespace fixtures {

using namespace shuttleflow;

inline Link make_link(LinkId id, NodeId from, NodeId to, double length, double speed = 10.0, double cap = 3600.0,
                      ModeSet modes = ModeSet::all()) {
    Link l;
    l.id = id;
    l.from = from;
    l.to = to;
    l.length = length;
    l.free_speed = speed;
    l.outflow_capacity = cap;
    l.allowed_modes = modes;
    return l;
}

/// Nodes 1..n on the x axis, `spacing` apart, links both ways.
inline Network line(int n, double spacing = 1000.0, double speed = 10.0, double cap = 3600.0) {
    std::vector<Node> nodes;
    std::vector<Link> links;
    for (int i = 1; i <= n; ++i) nodes.push_back({i, {(i - 1) * spacing, 0.0}});
    LinkId id = 1;
    for (int i = 1; i < n; ++i) {
        links.push_back(make_link(id++, i, i + 1, spacing, speed, cap));
        links.push_back(make_link(id++, i + 1, i, spacing, speed, cap));
    }
    return build_network(nodes, links);
}

/// Five nodes: a square 1-2-3-4 (1 km sides) around center node 5, with
/// spokes into 5. A zone around node 5 bans cars.
///
///   4 ---- 3
///   |  5   |
///   1 ---- 2
inline Network five_node() {
    std::vector<Node> nodes{{1, {0, 0}}, {2, {1000, 0}}, {3, {1000, 1000}}, {4, {0, 1000}}, {5, {500, 500}}};
    std::vector<Link> links;
    LinkId id = 1;
    const auto both = [&](NodeId a, NodeId b, double len) {
        links.push_back(make_link(id++, a, b, len));
        links.push_back(make_link(id++, b, a, len));
    };
    both(1, 2, 1000);
    both(2, 3, 1000);
    both(3, 4, 1000);
    both(4, 1, 1000);
    for (NodeId n : {1, 2, 3, 4}) both(n, 5, 707.1);
    return build_network(nodes, links);
}

inline Zone center_ban() { return make_zone("core", {{200, 200}, {800, 200}, {800, 800}, {200, 800}}, ModeSet{Mode::Car}); }

inline Trip trip(Mode m, Coord o, Coord d, Seconds t) { return Trip{m, o, d, t}; }

inline Agent agent(AgentId id, std::vector<Trip> trips) {
    Agent a;
    a.id = id;
    a.home = trips.empty() ? Coord{} : trips.front().origin;
    a.trips = std::move(trips);
    return a;
}

inline SimulationInput sim_input(const Network& net, const std::vector<Agent>& agents, std::span<const Zone> zones = {},
                                 std::uint64_t seed = 1) {
    SimulationInput in;
    in.network = &net;
    in.zones = zones;
    in.agents = agents;
    in.seed = seed;
    return in;
}

/// The generated mini city, built once per process.
inline const City& mini_city() {
    static const City city = generate_city(CityParams::for_size("mini"), 1);
    return city;
}

} // namespace fixtures

#endif // SHUTTLEFLOW_TEST_FIXTURES_HPP
