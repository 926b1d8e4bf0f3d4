#ifndef SHUTTLEFLOW_DEMAND_HPP
#define SHUTTLEFLOW_DEMAND_HPP

#include "netgraph.hpp"
#include "rng.hpp"
#include "types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace shuttleflow {

using AgentId = std::int64_t;

struct AgeGroup {
    std::string label;
    double base_population = 0.0;
    double future_population = 0.0;
    double trip_weight = 0.0; // trips / person / day
};

using AgeGroupTable = std::vector<AgeGroup>;

struct Trip {
    Mode mode = Mode::Walk;
    Coord origin;
    Coord dest;
    Seconds depart = 0.0;
    bool operator==(const Trip&) const = default;
};

struct Agent {
    AgentId id = 0;
    std::string age_group;
    Coord home;
    std::vector<Trip> trips;
    bool operator==(const Agent&) const = default;
};

/// Checks sorted departures, the 48 h window, and trip chaining.
inline void validate_agent(const Agent& a) {
    const auto tag = "agent " + std::to_string(a.id);
    for (std::size_t k = 0; k < a.trips.size(); ++k) {
        const auto& t = a.trips[k];
        if (!(t.depart >= 0.0 && t.depart < kHorizon)) throw Error(tag + ": departure outside [0, 172800)");
        if (k == 0) continue;
        if (t.depart < a.trips[k - 1].depart) throw Error(tag + ": trips not sorted by departure");
        if (!(t.origin == a.trips[k - 1].dest)) throw Error(tag + ": trip chain broken at trip " + std::to_string(k));
    }
}

/// Ratio of age-weighted future demand to age-weighted base demand.
inline double demand_multiplier(std::span<const AgeGroup> table) {
    double base = 0.0;
    double future = 0.0;
    for (const auto& g : table) {
        if (g.base_population < 0.0 || g.future_population < 0.0 || g.trip_weight < 0.0) {
            throw Error("age group '" + g.label + "': negative population or weight");
        }
        base += g.base_population * g.trip_weight;
        future += g.future_population * g.trip_weight;
    }
    if (!(base > 0.0)) throw Error("age table has zero base weighted demand");
    return future / base;
}

/// Plain population ratio, for comparison with the weighted multiplier.
inline double population_growth(std::span<const AgeGroup> table) {
    double base = 0.0;
    double future = 0.0;
    for (const auto& g : table) {
        base += g.base_population;
        future += g.future_population;
    }
    if (!(base > 0.0)) throw Error("age table has zero base population");
    return future / base;
}

/// Grows the population to round(n * multiplier) agents by cloning randomly
/// chosen agents. Each clone gets a fresh id, a home drawn from the existing
/// homes (trip endpoints at the old home move with it), and departure times
/// drawn from the pool of departures at the same trip index.
inline std::vector<Agent> expand_population(std::span<const Agent> agents, double multiplier, std::uint64_t seed) {
    if (!(multiplier >= 1.0)) throw Error("population multiplier must be >= 1");
    std::vector<Agent> out(agents.begin(), agents.end());
    if (agents.empty()) return out;
    const auto target = static_cast<std::size_t>(std::floor(static_cast<double>(agents.size()) * multiplier + 0.5));
    if (target <= agents.size()) return out;

    std::size_t max_trips = 0;
    AgentId next_id = 0;
    for (const auto& a : agents) {
        max_trips = std::max(max_trips, a.trips.size());
        next_id = std::max(next_id, a.id);
    }
    ++next_id;
    std::vector<std::vector<Seconds>> pool(max_trips);
    for (const auto& a : agents) {
        for (std::size_t k = 0; k < a.trips.size(); ++k) pool[k].push_back(a.trips[k].depart);
    }
    for (auto& p : pool) std::sort(p.begin(), p.end());

    RandomEngine rng(seed);
    out.reserve(target);
    while (out.size() < target) {
        const auto& tmpl = agents[uniform_index(rng, agents.size())];
        const Coord home = agents[uniform_index(rng, agents.size())].home;
        Agent clone = tmpl;
        clone.id = next_id++;
        clone.home = home;
        std::vector<Seconds> departs;
        for (std::size_t k = 0; k < clone.trips.size(); ++k) {
            auto& t = clone.trips[k];
            if (t.origin == tmpl.home) t.origin = home;
            if (t.dest == tmpl.home) t.dest = home;
            departs.push_back(pool[k][uniform_index(rng, pool[k].size())]);
        }
        // Keep the plan ordered: the k-th smallest draw goes to the k-th trip.
        std::sort(departs.begin(), departs.end());
        for (std::size_t k = 0; k < clone.trips.size(); ++k) clone.trips[k].depart = departs[k];
        out.push_back(std::move(clone));
    }
    return out;
}

/// Car trips with an endpoint in a car-banning zone become shuttle trips.
inline std::vector<Agent> apply_ban_to_plans(std::span<const Agent> agents, std::span<const Zone> zones) {
    for (const auto& z : zones) {
        for (auto m : {Mode::Sav, Mode::Bike, Mode::Walk, Mode::Pt}) {
            if (z.banned_modes.contains(m)) {
                throw Error("zone '" + z.id + "' bans " + std::string(to_string(m)) + "; only car bans are supported");
            }
        }
    }
    std::vector<Agent> out(agents.begin(), agents.end());
    for (auto& a : out) {
        for (auto& t : a.trips) {
            if (t.mode != Mode::Car) continue;
            const bool touches = std::any_of(zones.begin(), zones.end(), [&](const Zone& z) {
                return z.banned_modes.contains(Mode::Car) && (point_in_zone(z, t.origin) || point_in_zone(z, t.dest));
            });
            if (touches) t.mode = Mode::Sav;
        }
    }
    return out;
}

} // namespace shuttleflow

#endif // SHUTTLEFLOW_DEMAND_HPP
