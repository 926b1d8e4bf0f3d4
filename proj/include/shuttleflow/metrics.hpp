#ifndef SHUTTLEFLOW_METRICS_HPP
#define SHUTTLEFLOW_METRICS_HPP

#include "events.hpp"
#include "netgraph.hpp"
#include "powertrain.hpp"
#include "types.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

namespace shuttleflow {

/// Vehicle-kilometers by (mode, road class), optionally split by powertrain.
struct VktTable {
    std::map<std::pair<Mode, RoadClass>, double> cells;
    std::map<std::tuple<Mode, RoadClass, Powertrain>, double> by_powertrain;
    std::map<RoadClass, double> passenger_km;

    [[nodiscard]] double km(Mode m, RoadClass c) const {
        const auto it = cells.find({m, c});
        return it == cells.end() ? 0.0 : it->second;
    }
    [[nodiscard]] double km(Mode m) const { return km(m, RoadClass::Urban) + km(m, RoadClass::Rural); }
    [[nodiscard]] double total() const {
        double t = 0.0;
        for (const auto& [k, v] : cells) t += v;
        return t;
    }
    [[nodiscard]] double total_passenger_km() const {
        double t = 0.0;
        for (const auto& [k, v] : passenger_km) t += v;
        return t;
    }

    void add(Mode m, RoadClass c, double km_value) { cells[{m, c}] += km_value; }
    void add(Mode m, RoadClass c, Powertrain p, double km_value) {
        cells[{m, c}] += km_value;
        by_powertrain[{m, c, p}] += km_value;
    }

    VktTable& operator+=(const VktTable& o) {
        for (const auto& [k, v] : o.cells) cells[k] += v;
        for (const auto& [k, v] : o.by_powertrain) by_powertrain[k] += v;
        for (const auto& [k, v] : o.passenger_km) passenger_km[k] += v;
        return *this;
    }
};

/// Mode of the vehicle behind a LinkEnter: agents drive cars, vehicles are shuttles.
inline Mode vehicle_mode(const Subject& s) { return s.kind == SubjectKind::Vehicle ? Mode::Sav : Mode::Car; }

/// Replays LinkEnter events into vehicle-km. With an assignment, each
/// vehicle's km are also booked under its powertrain.
inline VktTable vkt_by_class(const EventLog& log, const Network& network,
                             const PowertrainAssignment* assignment = nullptr) {
    VktTable t;
    for (const auto& e : log) {
        if (e.kind != EventKind::LinkEnter || !e.link) continue;
        const auto& link = network.link(network.link_index(*e.link));
        const double km = link.length / 1000.0;
        const Mode mode = vehicle_mode(e.subject);
        if (assignment) {
            t.add(mode, link.road_class, assignment->of(e.subject), km);
        } else {
            t.add(mode, link.road_class, km);
        }
        const int pax = mode == Mode::Car ? 1 : std::max(e.load, 0);
        t.passenger_km[link.road_class] += pax * km;
    }
    return t;
}

struct OccupancyProfile {
    std::vector<double> km_by_load; // index = passengers on board

    [[nodiscard]] double total_km() const {
        double t = 0.0;
        for (double v : km_by_load) t += v;
        return t;
    }
    [[nodiscard]] double passenger_km() const {
        double t = 0.0;
        for (std::size_t i = 0; i < km_by_load.size(); ++i) t += static_cast<double>(i) * km_by_load[i];
        return t;
    }
    /// Passenger-km per vehicle-km, empty km included.
    [[nodiscard]] double rate() const {
        const double km = total_km();
        return km > 0.0 ? passenger_km() / km : 0.0;
    }
    /// Passenger-km per occupied vehicle-km.
    [[nodiscard]] double rate_occupied() const {
        const double km = total_km() - (km_by_load.empty() ? 0.0 : km_by_load[0]);
        return km > 0.0 ? passenger_km() / km : 0.0;
    }
};

/// Shuttle km by on-board load, from the load annotation on LinkEnter.
inline OccupancyProfile occupancy_profile(const EventLog& log, const Network& network, int capacity = 4) {
    OccupancyProfile p;
    p.km_by_load.assign(static_cast<std::size_t>(capacity) + 1, 0.0);
    for (const auto& e : log) {
        if (e.kind != EventKind::LinkEnter || !e.link || e.subject.kind != SubjectKind::Vehicle) continue;
        if (e.load < 0 || e.load > capacity) throw Error("shuttle load " + std::to_string(e.load) + " outside [0, capacity]");
        p.km_by_load[static_cast<std::size_t>(e.load)] += network.link(network.link_index(*e.link)).length / 1000.0;
    }
    return p;
}

/// Same profile, but the load is rebuilt by counting Pickup/Dropoff events.
inline OccupancyProfile occupancy_profile_replayed(const EventLog& log, const Network& network, int capacity = 4) {
    OccupancyProfile p;
    p.km_by_load.assign(static_cast<std::size_t>(capacity) + 1, 0.0);
    std::unordered_map<std::int64_t, int> load;
    for (const auto& e : log) {
        if (e.subject.kind != SubjectKind::Vehicle) continue;
        if (e.kind == EventKind::Pickup) ++load[e.subject.id];
        if (e.kind == EventKind::Dropoff) --load[e.subject.id];
        if (e.kind == EventKind::LinkEnter && e.link) {
            const int l = load[e.subject.id];
            if (l < 0 || l > capacity) throw Error("replayed load outside [0, capacity]");
            p.km_by_load[static_cast<std::size_t>(l)] += network.link(network.link_index(*e.link)).length / 1000.0;
        }
    }
    return p;
}

/// Share of shuttle km driven empty; 0 without shuttle km.
inline double empty_share(const OccupancyProfile& p) {
    const double km = p.total_km();
    return km > 0.0 && !p.km_by_load.empty() ? p.km_by_load[0] / km : 0.0;
}

/// Nearest-rank percentile of an ascending range; p in (0, 100].
inline double percentile_nearest_rank(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) return 0.0;
    auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(sorted.size())));
    rank = std::clamp<std::size_t>(rank, 1, sorted.size());
    return sorted[rank - 1];
}

struct WaitingRow {
    int hour = 0;
    double mean_min = 0.0;
    double median_min = 0.0;
    double p95_min = 0.0;
    std::size_t n = 0;
};

struct WaitingStats {
    std::vector<WaitingRow> hours; // only hours with served requests
    WaitingRow overall;            // hour = -1
    std::size_t unserved = 0;
};

namespace detail {

inline WaitingRow summarize_waits(int hour, std::vector<double> minutes) {
    WaitingRow row;
    row.hour = hour;
    row.n = minutes.size();
    if (minutes.empty()) return row;
    std::sort(minutes.begin(), minutes.end());
    double sum = 0.0;
    for (double m : minutes) sum += m;
    row.mean_min = sum / static_cast<double>(minutes.size());
    row.median_min = percentile_nearest_rank(minutes, 50.0);
    row.p95_min = percentile_nearest_rank(minutes, 95.0);
    return row;
}

} // namespace detail

/// Waiting time (pickup - call) in minutes, binned by the hour of the call.
inline WaitingStats waiting_stats(const EventLog& log) {
    std::map<std::int64_t, Seconds> call;
    std::map<std::int64_t, Seconds> pickup;
    for (const auto& e : log) {
        if (e.kind == EventKind::RequestSubmitted) call[e.subject.id] = e.time;
        if (e.kind == EventKind::Pickup && e.ref) pickup.emplace(e.ref->id, e.time);
    }
    std::map<int, std::vector<double>> by_hour;
    std::vector<double> all;
    WaitingStats stats;
    for (const auto& [rid, t_call] : call) {
        const auto it = pickup.find(rid);
        if (it == pickup.end()) {
            ++stats.unserved;
            continue;
        }
        const double minutes = (it->second - t_call) / 60.0;
        by_hour[static_cast<int>(std::floor(t_call / 3600.0))].push_back(minutes);
        all.push_back(minutes);
    }
    for (auto& [hour, waits] : by_hour) stats.hours.push_back(detail::summarize_waits(hour, std::move(waits)));
    stats.overall = detail::summarize_waits(-1, std::move(all));
    return stats;
}

/// Sum of (Arrive - Depart) over completed trips, in seconds.
inline Seconds total_travel_time(const EventLog& log) {
    std::unordered_map<std::int64_t, Seconds> departed;
    Seconds total = 0.0;
    for (const auto& e : log) {
        if (e.subject.kind != SubjectKind::Agent) continue;
        if (e.kind == EventKind::Depart) departed[e.subject.id] = e.time;
        if (e.kind == EventKind::Arrive) total += e.time - departed.at(e.subject.id);
    }
    return total;
}

/// Counts of Depart, Arrive and StuckAgent events.
struct TripCounts {
    std::size_t depart = 0;
    std::size_t arrive = 0;
    std::size_t stuck = 0;
};

inline TripCounts trip_counts(const EventLog& log) {
    TripCounts c;
    for (const auto& e : log) {
        if (e.kind == EventKind::Depart) ++c.depart;
        if (e.kind == EventKind::Arrive) ++c.arrive;
        if (e.kind == EventKind::StuckAgent) ++c.stuck;
    }
    return c;
}

} // namespace shuttleflow

#endif // SHUTTLEFLOW_METRICS_HPP
