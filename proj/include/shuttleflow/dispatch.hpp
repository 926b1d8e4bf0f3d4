#ifndef SHUTTLEFLOW_DISPATCH_HPP
#define SHUTTLEFLOW_DISPATCH_HPP

#include "demand.hpp"
#include "events.hpp"
#include "netgraph.hpp"
#include "types.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace shuttleflow {

using VehicleId = std::int64_t;
using RequestId = std::int64_t;

enum class TaskKind : std::uint8_t { Pickup, Dropoff };

struct Task {
    TaskKind kind = TaskKind::Pickup;
    RequestId request = 0;
    std::size_t node = 0; // node index
    Seconds planned_time = 0.0;
    Seconds deadline = std::numeric_limits<double>::infinity(); // latest allowed arrival at the stop
};

/// On-demand shuttle. Planning starts from the anchor: the current node when
/// stopped, or the end node of the link being driven (reached at anchor_time).
struct Shuttle {
    VehicleId id = 0;
    int capacity = 4;
    std::vector<Task> schedule;
    std::size_t position = 0;
    std::vector<RequestId> onboard;
    bool driving = false;
    std::size_t current_link = 0; // valid while driving
    std::size_t anchor_node = 0;
    Seconds anchor_time = 0.0;

    [[nodiscard]] bool idle() const { return schedule.empty() && !driving; }
};

struct Request {
    RequestId id = 0;
    AgentId agent = 0;
    std::size_t origin = 0; // node index
    std::size_t dest = 0;
    Seconds call_time = 0.0;
    std::optional<Seconds> pickup_time;
    std::optional<Seconds> dropoff_time;
    std::optional<VehicleId> vehicle;
};

struct FleetConfig {
    int capacity = 4;
    std::int64_t max_fleet = 100000;
    std::optional<std::int64_t> fixed_fleet;
    bool spawn_enabled = true;
    /// A busy shuttle may take a request only if it can reach the pickup
    /// within this delay; otherwise a new shuttle is spawned (when allowed).
    Seconds max_pickup_delay = 600.0;
    /// Ride time bound: factor * direct time + extra.
    double max_detour_factor = 1.7;
    Seconds max_detour_extra = 120.0;
    /// Period of the pending-request sweep.
    Seconds retry_interval = 60.0;

    void validate() const {
        if (capacity < 1) throw Error("sav.capacity must be >= 1");
        if (max_fleet < 0) throw Error("sav.max_fleet must be >= 0");
        if (fixed_fleet && (*fixed_fleet < 0 || *fixed_fleet > max_fleet)) {
            throw Error("sav.fixed_fleet must lie in [0, sav.max_fleet]");
        }
        if (!(max_pickup_delay >= 0.0)) throw Error("sav.max_pickup_delay_s must be >= 0");
        if (!(retry_interval > 0.0)) throw Error("sav.retry_interval_s must be > 0");
        if (!(max_detour_factor >= 1.0)) throw Error("sav.max_detour_factor must be >= 1");
        if (!(max_detour_extra >= 0.0)) throw Error("sav.max_detour_extra_s must be >= 0");
    }

    [[nodiscard]] Seconds max_ride(Seconds direct) const { return max_detour_factor * direct + max_detour_extra; }

    [[nodiscard]] bool can_spawn(std::size_t fleet_size) const {
        return spawn_enabled && !fixed_fleet && static_cast<std::int64_t>(fleet_size) < max_fleet;
    }
};

struct Insertion {
    bool feasible = false;
    Seconds marginal_time = std::numeric_limits<double>::infinity();
    std::size_t pickup_pos = 0;  // index of the pickup in the new schedule
    std::size_t dropoff_pos = 0; // index of the dropoff in the new schedule
    Seconds pickup_eta = std::numeric_limits<double>::infinity();
    Seconds pickup_deadline = std::numeric_limits<double>::infinity();
    Seconds dropoff_deadline = std::numeric_limits<double>::infinity();
};

/// Costs closer than this count as equal, so rounding noise never decides a tie.
inline Seconds tie_tolerance(Seconds v) { return 1e-9 * std::max(1.0, std::abs(v)); }

/// Cheapest way to insert the request's pickup and dropoff into the
/// shuttle's schedule. Every (pickup, dropoff) position pair that keeps the
/// pickup first is considered; a pair is feasible when the load never
/// exceeds the capacity and every stop, old or new, is reached by its
/// deadline. The new pickup is due within `max_pickup_delay` of `now`, its
/// dropoff at most `max_ride` after the planned pickup. marginal_time is the
/// increase in total scheduled drive time; ties keep the earliest pair.
///
/// Inserting a stop delays every later stop by the same amount, so each pair
/// is checked in O(1) against suffix minima of the per-stop slack.
inline Insertion insertion_cost(const Shuttle& shuttle, const Request& request, Seconds now, TravelTimeTable& tt,
                                Seconds max_pickup_delay = std::numeric_limits<double>::infinity(),
                                Seconds max_ride = std::numeric_limits<double>::infinity()) {
    constexpr Seconds inf = std::numeric_limits<double>::infinity();
    const auto& sched = shuttle.schedule;
    const std::size_t n = sched.size();
    const Seconds start = std::max(shuttle.anchor_time, now);
    const Seconds pickup_deadline = now + max_pickup_delay;
    const auto node_before = [&](std::size_t k) { return k == 0 ? shuttle.anchor_node : sched[k - 1].node; };

    std::vector<Seconds> arrival(n);
    std::vector<int> load_after(n);
    std::vector<Seconds> slack(n);
    std::vector<Seconds> suffix_slack(n + 1, inf);
    Seconds t = start;
    int load = static_cast<int>(shuttle.onboard.size());
    for (std::size_t k = 0; k < n; ++k) {
        t += tt.time(node_before(k), sched[k].node);
        arrival[k] = t;
        load += sched[k].kind == TaskKind::Pickup ? 1 : -1;
        load_after[k] = load;
        slack[k] = sched[k].deadline - t;
    }
    for (std::size_t k = n; k-- > 0;) suffix_slack[k] = std::min(suffix_slack[k + 1], slack[k]);

    Insertion best;
    const auto consider = [&](std::size_t i, std::size_t j, Seconds marginal, Seconds eta) {
        if (!std::isfinite(marginal) || (best.feasible && !(marginal < best.marginal_time - tie_tolerance(best.marginal_time)))) {
            return;
        }
        best = {true, marginal, i, j + 1, eta, pickup_deadline, eta + max_ride};
    };

    int load_before = static_cast<int>(shuttle.onboard.size());
    for (std::size_t i = 0; i <= n; ++i) {
        if (i > 0) {
            if (!(slack[i - 1] >= 0.0)) break; // stops before i keep their times
            load_before = load_after[i - 1];
        }
        const Seconds t_prev = i == 0 ? start : arrival[i - 1];
        const Seconds eta = t_prev + tt.time(node_before(i), request.origin);
        // By the triangle inequality later pickup positions are no earlier.
        if (!(eta <= pickup_deadline)) break;
        if (load_before + 1 > shuttle.capacity) continue;

        const Seconds drop_direct = eta + tt.time(request.origin, request.dest);
        if (drop_direct <= eta + max_ride) {
            if (i == n) {
                consider(i, i, drop_direct - t_prev, eta);
            } else {
                const Seconds delay = drop_direct + tt.time(request.dest, sched[i].node) - arrival[i];
                if (delay <= suffix_slack[i]) consider(i, i, delay, eta);
            }
        }
        if (i == n) break;

        const Seconds d1 = eta + tt.time(request.origin, sched[i].node) - arrival[i];
        Seconds carried_slack = inf;
        for (std::size_t j = i + 1; j <= n; ++j) {
            if (load_after[j - 1] + 1 > shuttle.capacity) break;
            carried_slack = std::min(carried_slack, slack[j - 1]);
            if (!(d1 <= carried_slack)) break;
            const Seconds drop = arrival[j - 1] + d1 + tt.time(sched[j - 1].node, request.dest);
            if (!(drop <= eta + max_ride)) break;
            if (j == n) {
                consider(i, j, drop - arrival[n - 1], eta);
            } else {
                const Seconds delay = drop + tt.time(request.dest, sched[j].node) - arrival[j];
                if (delay <= suffix_slack[j]) consider(i, j, delay, eta);
            }
        }
    }
    return best;
}

enum class AssignOutcome : std::uint8_t { Existing, Spawn, Wait };

struct AssignDecision {
    AssignOutcome outcome = AssignOutcome::Wait;
    VehicleId vehicle = 0;
    Insertion insertion;
};

/// Least-workload assignment.
///  1. Among shuttles with a feasible insertion, the smallest marginal drive
///     time wins; ties go to the lowest shuttle id.
///  2. Otherwise a new shuttle is spawned at the request origin if the
///     fleet may still grow.
///  3. Otherwise an idle shuttle is sent regardless of its distance.
///  4. Otherwise the request waits.
inline AssignDecision assign(const Request& request, std::span<const Shuttle> fleet, Seconds now,
                             const FleetConfig& config, TravelTimeTable& tt) {
    AssignDecision best;
    // Visiting shuttles by id makes the result independent of the fleet order.
    std::vector<const Shuttle*> by_id;
    by_id.reserve(fleet.size());
    for (const auto& s : fleet) by_id.push_back(&s);
    std::sort(by_id.begin(), by_id.end(), [](const Shuttle* a, const Shuttle* b) { return a->id < b->id; });
    const auto better = [&](const Insertion& ins) {
        return best.outcome == AssignOutcome::Wait ||
               ins.marginal_time < best.insertion.marginal_time - tie_tolerance(best.insertion.marginal_time);
    };
    const Seconds max_ride = config.max_ride(tt.time(request.origin, request.dest));
    for (const Shuttle* sp : by_id) {
        const auto& s = *sp;
        const auto ins = insertion_cost(s, request, now, tt, config.max_pickup_delay, max_ride);
        if (ins.feasible && better(ins)) best = {AssignOutcome::Existing, s.id, ins};
    }
    if (best.outcome != AssignOutcome::Wait) return best;

    if (config.can_spawn(fleet.size())) {
        best.outcome = AssignOutcome::Spawn;
        const Seconds pickup_deadline = now + config.max_pickup_delay;
        best.insertion = {true, tt.time(request.origin, request.dest), 0, 1, now, pickup_deadline, now + max_ride};
        return best;
    }

    for (const Shuttle* sp : by_id) {
        const auto& s = *sp;
        if (!s.idle()) continue;
        auto ins = insertion_cost(s, request, now, tt);
        if (!ins.feasible || !better(ins)) continue;
        // Late by construction: the deadlines start from the actual pickup.
        ins.pickup_deadline = std::max(now + config.max_pickup_delay, ins.pickup_eta);
        ins.dropoff_deadline = ins.pickup_eta + max_ride;
        best = {AssignOutcome::Existing, s.id, ins};
    }
    return best;
}

/// Puts the request's stops into the schedule at the chosen positions and
/// refreshes the planned times.
inline void commit_insertion(Shuttle& shuttle, const Request& request, const Insertion& ins, Seconds now,
                             TravelTimeTable& tt) {
    shuttle.schedule.insert(shuttle.schedule.begin() + static_cast<std::ptrdiff_t>(ins.pickup_pos),
                            Task{TaskKind::Pickup, request.id, request.origin, 0.0, ins.pickup_deadline});
    shuttle.schedule.insert(shuttle.schedule.begin() + static_cast<std::ptrdiff_t>(ins.dropoff_pos),
                            Task{TaskKind::Dropoff, request.id, request.dest, 0.0, ins.dropoff_deadline});
    Seconds t = std::max(shuttle.anchor_time, now);
    std::size_t at = shuttle.anchor_node;
    for (auto& task : shuttle.schedule) {
        t += tt.time(at, task.node);
        task.planned_time = t;
        at = task.node;
    }
}

/// Number of shuttles ever put into service.
inline std::size_t required_fleet(const EventLog& log) {
    std::int64_t max_id = 0;
    for (const auto& e : log) {
        if (e.kind == EventKind::VehicleSpawn) max_id = std::max(max_id, e.subject.id);
    }
    return static_cast<std::size_t>(max_id);
}

} // namespace shuttleflow

#endif // SHUTTLEFLOW_DISPATCH_HPP
