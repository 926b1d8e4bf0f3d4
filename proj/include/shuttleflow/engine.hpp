#ifndef SHUTTLEFLOW_ENGINE_HPP
#define SHUTTLEFLOW_ENGINE_HPP

#include "demand.hpp"
#include "dispatch.hpp"
#include "events.hpp"
#include "netgraph.hpp"
#include "rng.hpp"
#include "types.hpp"

#include <algorithm>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <span>
#include <utility>
#include <vector>

namespace shuttleflow {

/// Point-queue state of one link.
struct LinkState {
    Seconds last_release = -std::numeric_limits<double>::infinity();
};

/// Exit time of a vehicle entering at `enter_time`: free-flow time, but no
/// earlier than one capacity headway after the previous vehicle. Updates the
/// state, so calls must come in entry order.
inline Seconds link_exit_time(const Link& link, Seconds enter_time, LinkState& state) {
    const Seconds exit = std::max(enter_time + link.free_flow_time(), state.last_release + link.headway());
    state.last_release = exit;
    return exit;
}

struct EngineConfig {
    double walk_speed = 1.4; // m/s
    double bike_speed = 4.2; // m/s
    /// Public transport: explicit travel times between node ids, falling back
    /// to straight-line distance at pt_speed plus a fixed wait.
    double pt_speed = 6.0;
    Seconds pt_wait = 300.0;
    std::map<std::pair<NodeId, NodeId>, Seconds> pt_table;
    Seconds horizon = kHorizon;
};

struct SimulationInput {
    const Network* network = nullptr;
    std::span<const Zone> zones;
    std::span<const Agent> agents;
    FleetConfig fleet;
    EngineConfig engine;
    std::uint64_t seed = 0;
};

struct SimulationResult {
    EventLog log;
    std::vector<Request> requests;
    std::size_t fleet_size = 0;
};

/// Single-threaded discrete-event run of one scenario.
class Simulation {
public:
    explicit Simulation(const SimulationInput& in)
        : in_(in), net_(*in.network), car_view_(restrict_for_mode(net_, in.zones, Mode::Car)),
          sav_view_(restrict_for_mode(net_, in.zones, Mode::Sav)), car_tt_(car_view_), sav_tt_(sav_view_),
          car_nodes_(car_view_), sav_nodes_(sav_view_), all_view_(restrict_for_mode(net_, {}, Mode::Pt)),
          all_nodes_(all_view_), link_state_(net_.link_count()) {
        in.fleet.validate();
        for (const auto& a : in.agents) validate_agent(a);
        agents_.resize(in.agents.size());
    }

    SimulationResult run() {
        place_fixed_fleet();
        for (std::size_t i = 0; i < in_.agents.size(); ++i) {
            if (!in_.agents[i].trips.empty()) push(in_.agents[i].trips[0].depart, Action::AgentDepart, i, 0);
        }
        Seconds now = 0.0;
        bool truncated = false;
        while (!queue_.empty()) {
            const auto item = queue_.top();
            if (item.time > in_.engine.horizon) {
                truncated = true;
                break;
            }
            queue_.pop();
            now = item.time;
            dispatch_action(item);
        }
        finish(truncated ? in_.engine.horizon : now);
        SimulationResult result;
        result.log = std::move(log_);
        result.requests = std::move(requests_);
        result.fleet_size = fleet_.size();
        return result;
    }

private:
    enum class Action : std::uint8_t { AgentDepart, AgentArrive, CarLinkLeave, SavLinkLeave, Sweep };

    struct Item {
        Seconds time;
        std::uint64_t seq;
        Action action;
        std::size_t a;
        std::size_t b;
        bool operator>(const Item& o) const { return time != o.time ? time > o.time : seq > o.seq; }
    };

    struct AgentState {
        bool in_trip = false;
        std::size_t trip = 0;
        Mode mode = Mode::Walk;
        std::vector<std::size_t> route; // link indices
        std::size_t step = 0;
    };

    void push(Seconds t, Action action, std::size_t a, std::size_t b = 0) {
        queue_.push(Item{t, seq_++, action, a, b});
    }

    void emit(Event e) { log_.push_back(std::move(e)); }

    const Agent& agent(std::size_t i) const { return in_.agents[i]; }

    void dispatch_action(const Item& item) {
        switch (item.action) {
        case Action::AgentDepart: depart(item.a, item.b, item.time); break;
        case Action::AgentArrive: arrive(item.a, item.time); break;
        case Action::CarLinkLeave: car_link_leave(item.a, item.time); break;
        case Action::SavLinkLeave: sav_link_leave(item.a, item.time); break;
        case Action::Sweep:
            sweep_scheduled_ = false;
            retry_pending(item.time);
            break;
        }
    }

    void depart(std::size_t ai, std::size_t k, Seconds now) {
        const auto& a = agent(ai);
        const auto& trip = a.trips[k];
        auto& st = agents_[ai];
        st.in_trip = true;
        st.trip = k;
        st.mode = trip.mode;
        emit({now, EventKind::Depart, agent_subject(a.id), std::nullopt, trip.origin, trip.mode});
        switch (trip.mode) {
        case Mode::Walk: push(now + distance(trip.origin, trip.dest) / in_.engine.walk_speed, Action::AgentArrive, ai); break;
        case Mode::Bike: push(now + distance(trip.origin, trip.dest) / in_.engine.bike_speed, Action::AgentArrive, ai); break;
        case Mode::Pt: push(now + pt_time(trip), Action::AgentArrive, ai); break;
        case Mode::Car: start_car(ai, now); break;
        case Mode::Sav: submit_request(ai, now); break;
        }
    }

    Seconds pt_time(const Trip& trip) const {
        const auto o = all_nodes_.nearest(trip.origin);
        const auto d = all_nodes_.nearest(trip.dest);
        if (o && d) {
            const auto it = in_.engine.pt_table.find({net_.node(*o).id, net_.node(*d).id});
            if (it != in_.engine.pt_table.end()) return it->second;
        }
        return in_.engine.pt_wait + distance(trip.origin, trip.dest) / in_.engine.pt_speed;
    }

    void arrive(std::size_t ai, Seconds now) {
        const auto& a = agent(ai);
        auto& st = agents_[ai];
        emit({now, EventKind::Arrive, agent_subject(a.id), std::nullopt, a.trips[st.trip].dest, st.mode});
        end_trip(ai, now);
    }

    void end_trip(std::size_t ai, Seconds now) {
        auto& st = agents_[ai];
        st.in_trip = false;
        const auto next = st.trip + 1;
        const auto& a = agent(ai);
        if (next < a.trips.size()) push(std::max(now, a.trips[next].depart), Action::AgentDepart, ai, next);
    }

    void stuck(std::size_t ai, Seconds now) {
        const auto& a = agent(ai);
        auto& st = agents_[ai];
        emit({now, EventKind::StuckAgent, agent_subject(a.id), std::nullopt, a.trips[st.trip].origin, st.mode});
        end_trip(ai, now);
    }

    // Cars

    void start_car(std::size_t ai, Seconds now) {
        const auto& trip = agent(ai).trips[agents_[ai].trip];
        const auto o = car_nodes_.nearest(trip.origin);
        const auto d = car_nodes_.nearest(trip.dest);
        std::optional<Route> route;
        if (o && d) route = shortest_path(car_tt_, *o, *d, now);
        if (!route) {
            stuck(ai, now);
            return;
        }
        auto& st = agents_[ai];
        st.route.clear();
        for (auto id : route->links) st.route.push_back(net_.link_index(id));
        st.step = 0;
        if (st.route.empty()) {
            arrive(ai, now);
            return;
        }
        car_enter(ai, now);
    }

    void car_enter(std::size_t ai, Seconds now) {
        auto& st = agents_[ai];
        const auto li = st.route[st.step];
        const auto& link = net_.link(li);
        emit({now, EventKind::LinkEnter, agent_subject(agent(ai).id), link.id, net_.node(net_.from_index(li)).coord,
              Mode::Car});
        push(link_exit_time(link, now, link_state_[li]), Action::CarLinkLeave, ai);
    }

    void car_link_leave(std::size_t ai, Seconds now) {
        auto& st = agents_[ai];
        const auto li = st.route[st.step];
        emit({now, EventKind::LinkLeave, agent_subject(agent(ai).id), net_.link(li).id,
              net_.node(net_.to_index(li)).coord, Mode::Car});
        if (++st.step < st.route.size()) {
            car_enter(ai, now);
        } else {
            arrive(ai, now);
        }
    }

    // Shuttles

    void place_fixed_fleet() {
        if (!in_.fleet.fixed_fleet || *in_.fleet.fixed_fleet == 0) return;
        // Demand-weighted start positions: origins of shuttle trips.
        std::vector<std::size_t> candidates;
        for (const auto& a : in_.agents) {
            for (const auto& t : a.trips) {
                if (t.mode != Mode::Sav) continue;
                if (auto n = sav_nodes_.nearest(t.origin)) candidates.push_back(*n);
            }
        }
        if (candidates.empty()) {
            for (std::size_t i = 0; i < net_.node_count(); ++i) {
                if (sav_nodes_.nearest(net_.node(i).coord) == i) candidates.push_back(i);
            }
        }
        if (candidates.empty()) return;
        RandomEngine rng(hash_seed(in_.seed, 0x666c656574ULL));
        for (std::int64_t k = 0; k < *in_.fleet.fixed_fleet; ++k) {
            spawn(candidates[uniform_index(rng, candidates.size())], 0.0);
        }
    }

    VehicleId spawn(std::size_t node, Seconds now) {
        Shuttle s;
        s.id = static_cast<VehicleId>(fleet_.size()) + 1;
        s.capacity = in_.fleet.capacity;
        s.position = node;
        s.anchor_node = node;
        s.anchor_time = now;
        fleet_.push_back(s);
        emit({now, EventKind::VehicleSpawn, vehicle_subject(s.id), std::nullopt, net_.node(node).coord});
        return s.id;
    }

    Shuttle& shuttle(VehicleId id) { return fleet_[static_cast<std::size_t>(id - 1)]; }

    void submit_request(std::size_t ai, Seconds now) {
        const auto& a = agent(ai);
        const auto& trip = a.trips[agents_[ai].trip];
        const auto o = sav_nodes_.nearest(trip.origin);
        const auto d = sav_nodes_.nearest(trip.dest);
        Request r;
        r.id = static_cast<RequestId>(requests_.size()) + 1;
        r.agent = a.id;
        r.call_time = now;
        emit({now, EventKind::RequestSubmitted, request_subject(r.id), std::nullopt, trip.origin, Mode::Sav, -1,
              agent_subject(a.id)});
        const bool routable = o && d && std::isfinite(sav_tt_.time(*o, *d));
        if (routable) {
            r.origin = *o;
            r.dest = *d;
        }
        requests_.push_back(r);
        request_agent_.push_back(ai);
        if (!routable) {
            stuck(ai, now);
            return;
        }
        if (!try_assign(r.id, now)) {
            pending_.push_back(r.id);
            schedule_sweep(now);
        }
    }

    Request& request(RequestId id) { return requests_[static_cast<std::size_t>(id - 1)]; }

    bool try_assign(RequestId rid, Seconds now) {
        const auto& r = request(rid);
        auto decision = assign(r, fleet_, now, in_.fleet, sav_tt_);
        if (decision.outcome == AssignOutcome::Wait) return false;
        if (decision.outcome == AssignOutcome::Spawn) decision.vehicle = spawn(r.origin, now);
        auto& s = shuttle(decision.vehicle);
        request(rid).vehicle = s.id;
        commit_insertion(s, r, decision.insertion, now, sav_tt_);
        if (!s.driving) {
            s.anchor_time = now;
            advance_shuttle(s.id, now);
        }
        return true;
    }

    void schedule_sweep(Seconds now) {
        if (sweep_scheduled_ || pending_.empty()) return;
        sweep_scheduled_ = true;
        push(now + in_.fleet.retry_interval, Action::Sweep, 0);
    }

    void retry_pending(Seconds now) {
        if (retrying_) {
            retry_again_ = true;
            return;
        }
        retrying_ = true;
        do {
            retry_again_ = false;
            std::deque<RequestId> still;
            while (!pending_.empty()) {
                const auto rid = pending_.front();
                pending_.pop_front();
                if (!try_assign(rid, now)) still.push_back(rid);
            }
            // Requests queued by nested calls keep their place behind older ones.
            still.insert(still.end(), pending_.begin(), pending_.end());
            pending_ = std::move(still);
        } while (retry_again_);
        retrying_ = false;
        schedule_sweep(now);
    }

    /// Serves every task at the shuttle's current node, then either starts
    /// the next link or leaves the shuttle idle where it is.
    void advance_shuttle(VehicleId vid, Seconds now) {
        bool dropped = false;
        {
            auto& s = shuttle(vid);
            while (!s.schedule.empty() && s.schedule.front().node == s.position) {
                const Task task = s.schedule.front();
                s.schedule.erase(s.schedule.begin());
                auto& r = request(task.request);
                const Coord at = net_.node(s.position).coord;
                if (task.kind == TaskKind::Pickup) {
                    s.onboard.push_back(r.id);
                    r.pickup_time = now;
                    emit({now, EventKind::Pickup, vehicle_subject(s.id), std::nullopt, at, Mode::Sav,
                          static_cast<int>(s.onboard.size()), request_subject(r.id)});
                } else {
                    s.onboard.erase(std::find(s.onboard.begin(), s.onboard.end(), r.id));
                    r.dropoff_time = now;
                    emit({now, EventKind::Dropoff, vehicle_subject(s.id), std::nullopt, at, Mode::Sav,
                          static_cast<int>(s.onboard.size()), request_subject(r.id)});
                    const auto ai = request_agent_[static_cast<std::size_t>(r.id - 1)];
                    emit({now, EventKind::Arrive, agent_subject(r.agent), std::nullopt, agent(ai).trips[agents_[ai].trip].dest,
                          Mode::Sav});
                    end_trip(ai, now);
                    dropped = true;
                }
            }
            if (!s.schedule.empty()) {
                const auto next = sav_tt_.next_link(s.position, s.schedule.front().node);
                if (!next) throw Error("shuttle " + std::to_string(s.id) + " cannot reach its next stop");
                const auto& link = net_.link(*next);
                emit({now, EventKind::LinkEnter, vehicle_subject(s.id), link.id, net_.node(s.position).coord, Mode::Sav,
                      static_cast<int>(s.onboard.size())});
                const Seconds exit = link_exit_time(link, now, link_state_[*next]);
                s.driving = true;
                s.current_link = *next;
                s.anchor_node = net_.to_index(*next);
                s.anchor_time = exit;
                push(exit, Action::SavLinkLeave, static_cast<std::size_t>(s.id));
            } else {
                s.driving = false;
                s.anchor_node = s.position;
                s.anchor_time = now;
            }
        }
        if (dropped) on_dropoff(now);
    }

    void sav_link_leave(std::size_t vid, Seconds now) {
        auto& s = shuttle(static_cast<VehicleId>(vid));
        const auto li = s.current_link;
        emit({now, EventKind::LinkLeave, vehicle_subject(s.id), net_.link(li).id, net_.node(net_.to_index(li)).coord,
              Mode::Sav, static_cast<int>(s.onboard.size())});
        s.position = net_.to_index(li);
        s.driving = false;
        s.anchor_node = s.position;
        s.anchor_time = now;
        advance_shuttle(s.id, now);
    }

    /// A finished dropoff may free capacity or leave the shuttle idle at the
    /// dropoff node; waiting requests get another chance.
    void on_dropoff(Seconds now) {
        if (!pending_.empty()) retry_pending(now);
    }

    void finish(Seconds end) {
        // Agents still travelling, including unserved requests, are stuck.
        for (std::size_t i = 0; i < agents_.size(); ++i) {
            if (agents_[i].in_trip) stuck(i, end);
        }
    }

    const SimulationInput& in_;
    const Network& net_;
    NetworkView car_view_;
    NetworkView sav_view_;
    TravelTimeTable car_tt_;
    TravelTimeTable sav_tt_;
    NodeLocator car_nodes_;
    NodeLocator sav_nodes_;
    NetworkView all_view_;
    NodeLocator all_nodes_;
    std::vector<LinkState> link_state_;
    std::vector<AgentState> agents_;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue_;
    std::uint64_t seq_ = 0;
    EventLog log_;
    std::vector<Shuttle> fleet_;
    std::vector<Request> requests_;
    std::vector<std::size_t> request_agent_;
    std::deque<RequestId> pending_;
    bool sweep_scheduled_ = false;
    bool retrying_ = false;
    bool retry_again_ = false;
};

/// Runs one scenario and returns its event log.
inline EventLog run(const SimulationInput& input) { return Simulation(input).run().log; }

/// LinkEnter counts per (link id, hour).
inline std::map<std::pair<LinkId, int>, std::size_t> hourly_link_volumes(const EventLog& log) {
    std::map<std::pair<LinkId, int>, std::size_t> table;
    for (const auto& e : log) {
        if (e.kind != EventKind::LinkEnter || !e.link) continue;
        ++table[{*e.link, static_cast<int>(std::floor(e.time / 3600.0))}];
    }
    return table;
}

} // namespace shuttleflow

#endif // SHUTTLEFLOW_ENGINE_HPP
