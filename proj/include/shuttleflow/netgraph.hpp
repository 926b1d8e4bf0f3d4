#ifndef SHUTTLEFLOW_NETGRAPH_HPP
#define SHUTTLEFLOW_NETGRAPH_HPP

#include "types.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace shuttleflow {

using NodeId = std::int64_t;
using LinkId = std::int64_t;

struct Node {
    NodeId id = 0;
    Coord coord;
};

struct Link {
    LinkId id = 0;
    NodeId from = 0;
    NodeId to = 0;
    double length = 0.0;           // m
    double free_speed = 0.0;       // m/s
    double outflow_capacity = 0.0; // veh/h
    RoadClass road_class = RoadClass::Rural;
    ModeSet allowed_modes = ModeSet::all();

    [[nodiscard]] Seconds free_flow_time() const { return length / free_speed; }
    [[nodiscard]] Seconds headway() const { return 3600.0 / outflow_capacity; }
};

/// Policy area. The boundary is stored open (last vertex != first).
struct Zone {
    std::string id;
    std::vector<Coord> boundary;
    ModeSet banned_modes;
};

namespace detail {

inline double cross(Coord o, Coord a, Coord b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

inline bool on_segment(Coord p, Coord a, Coord b, double eps) {
    const double len = distance(a, b);
    if (std::abs(cross(a, b, p)) > eps * std::max(1.0, len)) return false;
    return p.x >= std::min(a.x, b.x) - eps && p.x <= std::max(a.x, b.x) + eps &&
           p.y >= std::min(a.y, b.y) - eps && p.y <= std::max(a.y, b.y) + eps;
}

inline int sign(double v) { return (v > 0) - (v < 0); }

inline bool segments_intersect(Coord p1, Coord p2, Coord q1, Coord q2) {
    const int d1 = sign(cross(q1, q2, p1));
    const int d2 = sign(cross(q1, q2, p2));
    const int d3 = sign(cross(p1, p2, q1));
    const int d4 = sign(cross(p1, p2, q2));
    if (d1 != d2 && d3 != d4 && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0) return true;
    return (d1 == 0 && on_segment(p1, q1, q2, 0.0)) || (d2 == 0 && on_segment(p2, q1, q2, 0.0)) ||
           (d3 == 0 && on_segment(q1, p1, p2, 0.0)) || (d4 == 0 && on_segment(q2, p1, p2, 0.0));
}

} // namespace detail

/// Drops a repeated closing vertex and checks the polygon is simple with at
/// least three vertices.
inline Zone make_zone(std::string id, std::vector<Coord> boundary, ModeSet banned_modes) {
    if (boundary.size() >= 2 && boundary.front() == boundary.back()) boundary.pop_back();
    if (boundary.size() < 3) throw Error("zone '" + id + "': polygon needs at least 3 vertices");
    for (const auto& c : boundary) {
        if (!std::isfinite(c.x) || !std::isfinite(c.y)) throw Error("zone '" + id + "': non-finite vertex");
    }
    const std::size_t n = boundary.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Coord a1 = boundary[i];
        const Coord a2 = boundary[(i + 1) % n];
        if (a1 == a2) throw Error("zone '" + id + "': repeated vertex");
        for (std::size_t j = i + 1; j < n; ++j) {
            const Coord b1 = boundary[j];
            const Coord b2 = boundary[(j + 1) % n];
            const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
            if (adjacent) {
                // Adjacent edges share one vertex; they may only overlap if they fold back.
                const Coord shared = (j == i + 1) ? a2 : a1;
                const Coord other_a = (j == i + 1) ? a1 : a2;
                const Coord other_b = (j == i + 1) ? b2 : b1;
                if (detail::cross(shared, other_a, other_b) == 0.0) {
                    const double dot = (other_a.x - shared.x) * (other_b.x - shared.x) +
                                       (other_a.y - shared.y) * (other_b.y - shared.y);
                    if (dot > 0.0) throw Error("zone '" + id + "': polygon is self-intersecting");
                }
                continue;
            }
            if (detail::segments_intersect(a1, a2, b1, b2)) {
                throw Error("zone '" + id + "': polygon is self-intersecting");
            }
        }
    }
    return Zone{std::move(id), std::move(boundary), banned_modes};
}

/// Boundary points count as inside.
inline bool point_in_zone(const Zone& zone, Coord p) {
    const auto& poly = zone.boundary;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (detail::on_segment(p, poly[i], poly[(i + 1) % n], 1e-9)) return true;
    }
    bool inside = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Coord a = poly[i];
        const Coord b = poly[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            const double x_cross = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x;
            if (p.x < x_cross) inside = !inside;
        }
    }
    return inside;
}

/// Immutable directed road graph. Links are addressed internally by index;
/// outgoing/incoming adjacency lists are sorted by link id.
class Network {
public:
    Network() = default;

    static Network build(std::vector<Node> nodes, std::vector<Link> links) {
        Network net;
        net.nodes_ = std::move(nodes);
        net.links_ = std::move(links);
        for (std::size_t i = 0; i < net.nodes_.size(); ++i) {
            const auto& n = net.nodes_[i];
            if (!std::isfinite(n.coord.x) || !std::isfinite(n.coord.y)) {
                throw Error("node " + std::to_string(n.id) + ": non-finite coordinate");
            }
            if (!net.node_index_.emplace(n.id, i).second) throw Error("duplicate node id " + std::to_string(n.id));
        }
        net.out_.assign(net.nodes_.size(), {});
        net.in_.assign(net.nodes_.size(), {});
        net.from_idx_.resize(net.links_.size());
        net.to_idx_.resize(net.links_.size());
        for (std::size_t i = 0; i < net.links_.size(); ++i) {
            const auto& l = net.links_[i];
            const auto tag = "link " + std::to_string(l.id);
            if (!net.link_index_.emplace(l.id, i).second) throw Error("duplicate link id " + std::to_string(l.id));
            const auto f = net.node_index_.find(l.from);
            const auto t = net.node_index_.find(l.to);
            if (f == net.node_index_.end() || t == net.node_index_.end()) {
                throw Error(tag + ": dangling endpoint " + std::to_string(f == net.node_index_.end() ? l.from : l.to));
            }
            if (!(l.length > 0.0)) throw Error(tag + ": nonpositive length");
            if (!(l.free_speed > 0.0)) throw Error(tag + ": nonpositive speed");
            if (!(l.outflow_capacity > 0.0)) throw Error(tag + ": nonpositive capacity");
            net.from_idx_[i] = f->second;
            net.to_idx_[i] = t->second;
            net.out_[f->second].push_back(i);
            net.in_[t->second].push_back(i);
        }
        const auto by_id = [&net](std::size_t a, std::size_t b) { return net.links_[a].id < net.links_[b].id; };
        for (auto& v : net.out_) std::sort(v.begin(), v.end(), by_id);
        for (auto& v : net.in_) std::sort(v.begin(), v.end(), by_id);
        return net;
    }

    [[nodiscard]] const std::vector<Node>& nodes() const { return nodes_; }
    [[nodiscard]] const std::vector<Link>& links() const { return links_; }
    [[nodiscard]] std::size_t node_count() const { return nodes_.size(); }
    [[nodiscard]] std::size_t link_count() const { return links_.size(); }

    [[nodiscard]] std::optional<std::size_t> find_node(NodeId id) const {
        const auto it = node_index_.find(id);
        if (it == node_index_.end()) return std::nullopt;
        return it->second;
    }
    [[nodiscard]] std::size_t node_index(NodeId id) const {
        if (auto i = find_node(id)) return *i;
        throw Error("unknown node " + std::to_string(id));
    }
    [[nodiscard]] std::optional<std::size_t> find_link(LinkId id) const {
        const auto it = link_index_.find(id);
        if (it == link_index_.end()) return std::nullopt;
        return it->second;
    }
    [[nodiscard]] std::size_t link_index(LinkId id) const {
        if (auto i = find_link(id)) return *i;
        throw Error("unknown link " + std::to_string(id));
    }

    [[nodiscard]] const Link& link(std::size_t index) const { return links_[index]; }
    [[nodiscard]] const Node& node(std::size_t index) const { return nodes_[index]; }
    [[nodiscard]] std::size_t from_index(std::size_t link) const { return from_idx_[link]; }
    [[nodiscard]] std::size_t to_index(std::size_t link) const { return to_idx_[link]; }
    [[nodiscard]] std::span<const std::size_t> out_links(std::size_t node) const { return out_[node]; }
    [[nodiscard]] std::span<const std::size_t> in_links(std::size_t node) const { return in_[node]; }

    [[nodiscard]] Coord link_midpoint(std::size_t link) const {
        return midpoint(nodes_[from_idx_[link]].coord, nodes_[to_idx_[link]].coord);
    }

    /// Copy with one road class per link (in link order).
    [[nodiscard]] Network with_road_classes(std::span<const RoadClass> classes) const {
        if (classes.size() != links_.size()) throw Error("road class count does not match link count");
        Network copy = *this;
        for (std::size_t i = 0; i < links_.size(); ++i) copy.links_[i].road_class = classes[i];
        return copy;
    }

private:
    std::vector<Node> nodes_;
    std::vector<Link> links_;
    std::unordered_map<NodeId, std::size_t> node_index_;
    std::unordered_map<LinkId, std::size_t> link_index_;
    std::vector<std::size_t> from_idx_;
    std::vector<std::size_t> to_idx_;
    std::vector<std::vector<std::size_t>> out_;
    std::vector<std::vector<std::size_t>> in_;
};

inline Network build_network(std::vector<Node> nodes, std::vector<Link> links) {
    return Network::build(std::move(nodes), std::move(links));
}

/// Links whose midpoint lies in `urban_zone` become Urban, all others Rural.
inline Network classify_road_types(const Network& network, const Zone& urban_zone) {
    std::vector<RoadClass> classes(network.link_count());
    for (std::size_t i = 0; i < network.link_count(); ++i) {
        classes[i] = point_in_zone(urban_zone, network.link_midpoint(i)) ? RoadClass::Urban : RoadClass::Rural;
    }
    return network.with_road_classes(classes);
}

/// Subset of a network's links usable by one mode. Does not own the network.
class NetworkView {
public:
    NetworkView(const Network& network, Mode mode, std::vector<char> allowed)
        : network_(&network), mode_(mode), allowed_(std::move(allowed)) {}

    [[nodiscard]] const Network& network() const { return *network_; }
    [[nodiscard]] Mode mode() const { return mode_; }
    [[nodiscard]] bool contains(std::size_t link) const { return allowed_[link] != 0; }
    [[nodiscard]] std::size_t link_count() const {
        return static_cast<std::size_t>(std::count(allowed_.begin(), allowed_.end(), char{1}));
    }
    [[nodiscard]] std::vector<LinkId> link_ids() const {
        std::vector<LinkId> ids;
        for (std::size_t i = 0; i < allowed_.size(); ++i) {
            if (allowed_[i]) ids.push_back(network_->link(i).id);
        }
        std::sort(ids.begin(), ids.end());
        return ids;
    }

private:
    const Network* network_;
    Mode mode_;
    std::vector<char> allowed_;
};

/// Links that allow `mode` and whose midpoint is outside every zone banning it.
inline NetworkView restrict_for_mode(const Network& network, std::span<const Zone> zones, Mode mode) {
    std::vector<char> allowed(network.link_count(), 0);
    for (std::size_t i = 0; i < network.link_count(); ++i) {
        if (!network.link(i).allowed_modes.contains(mode)) continue;
        const Coord mid = network.link_midpoint(i);
        const bool banned = std::any_of(zones.begin(), zones.end(), [&](const Zone& z) {
            return z.banned_modes.contains(mode) && point_in_zone(z, mid);
        });
        allowed[i] = banned ? 0 : 1;
    }
    return NetworkView(network, mode, std::move(allowed));
}

struct Route {
    std::vector<LinkId> links;
    Seconds depart_time = 0.0;
    std::vector<Seconds> leg_times; // free-flow entry time of each link
    Seconds travel_time = 0.0;
};

/// Free-flow travel times to destinations, computed lazily by reverse
/// Dijkstra and cached per destination node.
class TravelTimeTable {
public:
    explicit TravelTimeTable(const NetworkView& view) : view_(&view), rows_(view.network().node_count()) {}

    [[nodiscard]] const NetworkView& view() const { return *view_; }

    /// Free-flow time from node index `from` to `to`; +inf when unreachable.
    Seconds time(std::size_t from, std::size_t to) {
        if (from == to) return 0.0;
        return row(to)[from];
    }

    /// Next link (index) to take from `at` towards `dest`. Among links on a
    /// shortest path, the one with the smallest id wins.
    std::optional<std::size_t> next_link(std::size_t at, std::size_t dest) {
        if (at == dest) return std::nullopt;
        const auto& dist = row(dest);
        if (!std::isfinite(dist[at])) return std::nullopt;
        const auto& net = view_->network();
        double best = std::numeric_limits<double>::infinity();
        for (auto l : net.out_links(at)) {
            if (!view_->contains(l)) continue;
            best = std::min(best, net.link(l).free_flow_time() + dist[net.to_index(l)]);
        }
        const double tol = 1e-9 * std::max(1.0, best);
        for (auto l : net.out_links(at)) { // sorted by link id
            if (!view_->contains(l)) continue;
            if (net.link(l).free_flow_time() + dist[net.to_index(l)] <= best + tol) return l;
        }
        return std::nullopt;
    }

    const std::vector<Seconds>& row(std::size_t dest) {
        auto& r = rows_[dest];
        if (r.empty()) r = reverse_dijkstra(dest);
        return r;
    }

private:
    std::vector<Seconds> reverse_dijkstra(std::size_t dest) const {
        const auto& net = view_->network();
        std::vector<Seconds> dist(net.node_count(), std::numeric_limits<double>::infinity());
        using Item = std::pair<double, std::size_t>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
        dist[dest] = 0.0;
        heap.emplace(0.0, dest);
        while (!heap.empty()) {
            const auto [d, u] = heap.top();
            heap.pop();
            if (d > dist[u]) continue;
            for (auto l : net.in_links(u)) {
                if (!view_->contains(l)) continue;
                const auto v = net.from_index(l);
                const double nd = d + net.link(l).free_flow_time();
                if (nd < dist[v]) {
                    dist[v] = nd;
                    heap.emplace(nd, v);
                }
            }
        }
        return dist;
    }

    const NetworkView* view_;
    std::vector<std::vector<Seconds>> rows_; // by destination; empty until first use
};

/// Route by node index, using a shared cache.
inline std::optional<Route> shortest_path(TravelTimeTable& table, std::size_t origin, std::size_t dest, Seconds depart) {
    const auto& net = table.view().network();
    Route route;
    route.depart_time = depart;
    if (origin == dest) return route;
    if (!std::isfinite(table.time(origin, dest))) return std::nullopt;
    std::size_t at = origin;
    Seconds t = depart;
    while (at != dest) {
        const auto l = table.next_link(at, dest);
        if (!l || route.links.size() > net.link_count()) return std::nullopt;
        route.links.push_back(net.link(*l).id);
        route.leg_times.push_back(t);
        t += net.link(*l).free_flow_time();
        at = net.to_index(*l);
    }
    route.travel_time = t - depart;
    return route;
}

/// Minimum free-flow-time route; std::nullopt when `dest` is unreachable.
inline std::optional<Route> shortest_path(const NetworkView& view, NodeId origin, NodeId dest, Seconds depart) {
    const auto& net = view.network();
    TravelTimeTable table(view);
    return shortest_path(table, net.node_index(origin), net.node_index(dest), depart);
}

/// Nearest node (by index) that touches at least one link of the view.
/// Ties go to the smaller node id.
class NodeLocator {
public:
    explicit NodeLocator(const NetworkView& view) : net_(&view.network()) {
        std::vector<char> touched(net_->node_count(), 0);
        for (std::size_t l = 0; l < net_->link_count(); ++l) {
            if (!view.contains(l)) continue;
            touched[net_->from_index(l)] = 1;
            touched[net_->to_index(l)] = 1;
        }
        for (std::size_t i = 0; i < touched.size(); ++i) {
            if (touched[i]) candidates_.push_back(i);
        }
    }

    [[nodiscard]] std::optional<std::size_t> nearest(Coord c) const {
        std::optional<std::size_t> best;
        double best_d = std::numeric_limits<double>::infinity();
        for (auto i : candidates_) {
            const double d = distance(net_->node(i).coord, c);
            if (d < best_d || (d == best_d && best && net_->node(i).id < net_->node(*best).id)) {
                best_d = d;
                best = i;
            }
        }
        return best;
    }

private:
    const Network* net_;
    std::vector<std::size_t> candidates_;
};

} // namespace shuttleflow

#endif // SHUTTLEFLOW_NETGRAPH_HPP
