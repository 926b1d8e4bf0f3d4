#ifndef SHUTTLEFLOW_SCENARIO_HPP
#define SHUTTLEFLOW_SCENARIO_HPP

#include "config.hpp"
#include "demand.hpp"
#include "dispatch.hpp"
#include "engine.hpp"
#include "events.hpp"
#include "io.hpp"
#include "metrics.hpp"
#include "netgraph.hpp"
#include "powertrain.hpp"
#include "rng.hpp"
#include "sustain.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace shuttleflow {

struct DemandSpec {
    std::string name;
    double multiplier = 1.0;
    std::optional<AgeGroupTable> age_table; // when set, the multiplier is derived from it
};

struct AreaSpec {
    std::string name;
    std::optional<std::string> zone; // nullopt: no ban, the baseline column
};

/// Everything a matrix run needs, resolved from the config file.
struct MatrixConfig {
    std::uint64_t seed = 42;
    std::string nodes_path = "nodes.csv";
    std::string links_path = "links.csv";
    std::string zones_path = "zones.json";
    std::string population_path = "population.jsonl";
    std::string urban_zone = "city";
    std::vector<DemandSpec> demands{{"Base2011", 1.0, std::nullopt}};
    std::vector<AreaSpec> areas{{"None", std::nullopt}};
    FleetConfig fleet;
    EngineConfig engine;
    FactorSet factors = default_factors();
    PowertrainMix car_mix = PowertrainMix::registered_2011();
    Accounting accounting = Accounting::Sampled;
    std::vector<double> reduction_fractions;
    std::vector<std::string> reduction_scenarios;
    bool write_events = true;
    bool gzip_events = false;

    /// Reference driving factors plus placeholder non-driving coefficients.
    static FactorSet default_factors() {
        auto f = FactorSet::reference_factors();
        f.nondriving = default_nondriving();
        return f;
    }

    /// Placeholder amortization inputs; replace with sourced values.
    static std::map<std::string, NondrivingCoefficient> default_nondriving() {
        return {
            {"car_ice", {6.5e6, 200000.0, 30.0}},
            {"car_bev", {10.5e6, 200000.0, 30.0}},
            {"sav_ice", {7.0e6, 300000.0, 200.0}},
            {"sav_bev", {12.0e6, 300000.0, 200.0}},
        };
    }

    static MatrixConfig from_config(const Config& c, const std::filesystem::path& base_dir = {}) {
        MatrixConfig m;
        const auto path = [&](const std::string& key, const std::string& fallback) {
            const auto v = c.string(key, fallback);
            if (v.empty()) return v;
            const std::filesystem::path p(v);
            return (p.is_absolute() || base_dir.empty() ? p : base_dir / p).string();
        };
        m.seed = static_cast<std::uint64_t>(c.integer("seed", 42));
        m.nodes_path = path("network.nodes", m.nodes_path);
        m.links_path = path("network.links", m.links_path);
        m.zones_path = path("zones", m.zones_path);
        m.population_path = path("population", m.population_path);
        m.urban_zone = c.string("urban_zone", m.urban_zone);

        m.demands.clear();
        for (const auto& name : c.list("demand.levels", {"Base2011"})) {
            DemandSpec d{name, c.number("demand." + name + ".multiplier", 1.0), std::nullopt};
            const auto table = path("demand." + name + ".age_table", "");
            if (!table.empty()) {
                d.age_table = io::load_age_table(table);
                d.multiplier = demand_multiplier(*d.age_table);
            }
            m.demands.push_back(std::move(d));
        }
        m.areas.clear();
        for (const auto& name : c.list("areas", {"None"})) {
            const auto zone = c.string("area." + name + ".zone", "");
            m.areas.push_back({name, zone.empty() ? std::nullopt : std::optional<std::string>(zone)});
        }

        m.fleet.capacity = static_cast<int>(c.integer("sav.capacity", m.fleet.capacity));
        m.fleet.max_fleet = c.integer("sav.max_fleet", m.fleet.max_fleet);
        if (c.has("sav.fixed_fleet")) m.fleet.fixed_fleet = c.integer("sav.fixed_fleet", 0);
        m.fleet.spawn_enabled = c.boolean("sav.spawn_enabled", m.fleet.spawn_enabled);
        m.fleet.max_pickup_delay = c.number("sav.max_pickup_delay_s", m.fleet.max_pickup_delay);
        m.fleet.retry_interval = c.number("sav.retry_interval_s", m.fleet.retry_interval);
        m.fleet.max_detour_factor = c.number("sav.max_detour_factor", m.fleet.max_detour_factor);
        m.fleet.max_detour_extra = c.number("sav.max_detour_extra_s", m.fleet.max_detour_extra);
        m.fleet.validate();

        m.engine.walk_speed = c.number("sim.walk_speed", m.engine.walk_speed);
        m.engine.bike_speed = c.number("sim.bike_speed", m.engine.bike_speed);
        m.engine.pt_speed = c.number("sim.pt_speed", m.engine.pt_speed);
        m.engine.pt_wait = c.number("sim.pt_wait_s", m.engine.pt_wait);
        const auto pt_table = path("sim.pt_table", "");
        if (!pt_table.empty()) {
            const auto t = io::CsvTable::load(pt_table);
            for (std::size_t i = 0; i < t.size(); ++i) {
                m.engine.pt_table[{t.integer(i, "origin"), t.integer(i, "dest")}] = t.number(i, "time_s");
            }
        }

        const auto factors = path("sustain.factors", "");
        if (!factors.empty()) io::parse_factors_into(m.factors, io::read_file(factors), factors);
        const auto nondriving = path("sustain.nondriving", "");
        if (!nondriving.empty()) {
            auto coeffs = io::parse_nondriving(io::read_file(nondriving), nondriving);
            for (auto& [type, coef] : coeffs) {
                const auto fallback = m.factors.nondriving.count(type) ? m.factors.nondriving.at(type).daily_km : 0.0;
                coef.daily_km = fallback;
            }
            m.factors.nondriving = std::move(coeffs);
        }
        for (auto& [type, coef] : m.factors.nondriving) {
            coef.daily_km = c.number("sustain.daily_km." + type, coef.daily_km);
        }
        m.factors.av_efficiency = c.number("sustain.av_efficiency", m.factors.av_efficiency);
        m.factors.av_efficiency_on_emissions =
            c.boolean("sustain.av_efficiency_on_emissions", m.factors.av_efficiency_on_emissions);
        m.factors.av_efficiency_on_energy = c.boolean("sustain.av_efficiency_on_energy", m.factors.av_efficiency_on_energy);
        m.factors.renewable_grid = c.boolean("sustain.renewable_grid", m.factors.renewable_grid);
        m.factors.validate();
        for (auto p : kPowertrains) {
            m.car_mix.share(p) = c.number("sustain.car_mix." + std::string(to_string(p)), m.car_mix.share(p));
        }
        m.car_mix.validate();
        const auto accounting = c.string("sustain.accounting", "sampled");
        if (accounting == "sampled") {
            m.accounting = Accounting::Sampled;
        } else if (accounting == "analytic") {
            m.accounting = Accounting::Analytic;
        } else {
            throw Error("sustain.accounting must be 'sampled' or 'analytic'");
        }

        m.reduction_fractions = c.numbers("fleet_reduction.fractions");
        m.reduction_scenarios = c.list("fleet_reduction.scenarios");
        m.write_events = c.boolean("events.write", m.write_events);
        m.gzip_events = c.boolean("events.gzip", m.gzip_events);
        return m;
    }
};

/// The full configuration with every default, in config-file syntax.
inline std::string default_config_text() {
    const MatrixConfig m;
    const auto& f = m.factors;
    std::string s;
    s += "# shuttleflow scenario matrix (all keys shown with defaults)\n";
    s += "# Relative paths resolve against the directory of this file.\n";
    s += "seed = 42\n";
    s += "urban_zone = \"city\"          # zone whose links count as urban roads\n";
    s += "zones = \"zones.json\"\n";
    s += "population = \"population.jsonl\"\n";
    s += "areas = [\"None\"]              # area columns; None is the no-ban baseline\n";
    s += "# area.<name>.zone = \"<zone id>\"\n\n";
    s += "[network]\nnodes = \"nodes.csv\"\nlinks = \"links.csv\"\n\n";
    s += "[demand]\nlevels = [\"Base2011\"]\n";
    s += "# <level>.multiplier = 1.0\n";
    s += "# <level>.age_table = \"age.csv\"   # overrides the multiplier: sum(future*w)/sum(base*w)\n\n";
    s += "[sav]\n";
    s += "capacity = " + std::to_string(m.fleet.capacity) + "\n";
    s += "max_fleet = " + std::to_string(m.fleet.max_fleet) + "\n";
    s += "# fixed_fleet = 0             # pre-placed fleet of this size; disables spawning\n";
    s += "spawn_enabled = true\n";
    s += "max_pickup_delay_s = " + io::num(m.fleet.max_pickup_delay) + "\n";
    s += "retry_interval_s = " + io::num(m.fleet.retry_interval) + "\n";
    s += "max_detour_factor = " + io::num(m.fleet.max_detour_factor) + "   # ride time <= factor * direct + extra\n";
    s += "max_detour_extra_s = " + io::num(m.fleet.max_detour_extra) + "\n\n";
    s += "[sim]\n";
    s += "walk_speed = " + io::num(m.engine.walk_speed) + "\n";
    s += "bike_speed = " + io::num(m.engine.bike_speed) + "\n";
    s += "pt_speed = " + io::num(m.engine.pt_speed) + "\n";
    s += "pt_wait_s = " + io::num(m.engine.pt_wait) + "\n";
    s += "# pt_table = \"pt.csv\"         # origin,dest,time_s by node id\n\n";
    s += "[sustain]\n";
    s += "# factors = \"factors.csv\"     # powertrain,road_class,emis_g_per_km,energy_gge_per_km\n";
    s += "# nondriving = \"nondriving.csv\"  # vehicle_type,lifetime_g,lifetime_km\n";
    s += "renewable_grid = true\n";
    s += "av_efficiency = " + io::num(f.av_efficiency) + "        # placeholder; scales shuttle km\n";
    s += "av_efficiency_on_emissions = true\n";
    s += "av_efficiency_on_energy = true\n";
    s += "accounting = \"sampled\"        # sampled | analytic\n";
    for (auto p : kPowertrains) {
        s += "car_mix." + std::string(to_string(p)) + " = " + io::num(m.car_mix.share(p)) + "\n";
    }
    s += "# per-day non-driving emissions = lifetime_g * daily_km / lifetime_km\n";
    for (const auto& [type, c] : f.nondriving) s += "daily_km." + type + " = " + io::num(c.daily_km) + "\n";
    s += "\n[fleet_reduction]\n";
    s += "fractions = []                # e.g. [0.2, 0.4, 0.6]\n";
    s += "scenarios = []                # e.g. [\"SC1.3\"]\n\n";
    s += "[events]\nwrite = true\ngzip = false\n\n";
    s += "# built-in driving factors:\n";
    for (const auto& [key, e] : f.emis) {
        s += "#   " + std::string(to_string(key.first)) + "," + std::string(to_string(key.second)) + "," + io::num(e) + "," +
             io::num(f.energy.at(key)) + "\n";
    }
    s += "# built-in non-driving placeholders (vehicle_type,lifetime_g,lifetime_km):\n";
    for (const auto& [type, c] : f.nondriving) {
        s += "#   " + type + "," + io::num(c.lifetime_g) + "," + io::num(c.lifetime_km) + "\n";
    }
    return s;
}

struct Scenario {
    std::string name; // "SC<demand>.<area>"
    std::string demand;
    double multiplier = 1.0;
    std::string area;
    std::optional<std::string> zone;
    FleetConfig fleet;
    std::uint64_t seed = 0;            // simulation and fleet placement
    std::uint64_t population_seed = 0; // shared by every scenario of one demand level
    std::string baseline;              // same-demand scenario without a ban
    std::optional<double> fleet_fraction;
    std::optional<std::string> parent;
};

/// Demand-major cartesian product of demand levels and areas.
inline std::vector<Scenario> build_matrix(const MatrixConfig& cfg) {
    std::set<std::string> seen;
    for (const auto& d : cfg.demands) {
        if (!seen.insert("d:" + d.name).second) throw Error("duplicate demand level '" + d.name + "'");
    }
    for (const auto& a : cfg.areas) {
        if (!seen.insert("a:" + a.name).second) throw Error("duplicate area label '" + a.name + "'");
    }
    const bool needs_zones = std::any_of(cfg.areas.begin(), cfg.areas.end(), [](const AreaSpec& a) { return a.zone; });
    if (needs_zones && !std::filesystem::exists(cfg.zones_path)) throw Error("zone file not found: " + cfg.zones_path);
    std::optional<std::size_t> baseline_area;
    for (std::size_t a = 0; a < cfg.areas.size(); ++a) {
        if (!cfg.areas[a].zone) {
            baseline_area = a;
            break;
        }
    }
    std::vector<Scenario> out;
    std::set<std::string> names;
    for (std::size_t d = 0; d < cfg.demands.size(); ++d) {
        const auto& demand = cfg.demands[d];
        const auto prefix = "SC" + std::to_string(d + 1) + ".";
        for (std::size_t a = 0; a < cfg.areas.size(); ++a) {
            Scenario s;
            s.name = prefix + std::to_string(a);
            s.demand = demand.name;
            s.multiplier = demand.multiplier;
            s.area = cfg.areas[a].name;
            s.zone = cfg.areas[a].zone;
            s.fleet = cfg.fleet;
            s.seed = hash_seed(cfg.seed, s.name);
            s.population_seed = hash_seed(cfg.seed, "demand:" + demand.name);
            s.baseline = baseline_area ? prefix + std::to_string(*baseline_area) : std::string{};
            if (!names.insert(s.name).second) throw Error("duplicate scenario name " + s.name);
            out.push_back(std::move(s));
        }
    }
    return out;
}

/// Immutable inputs shared by every scenario of a matrix.
struct ScenarioInputs {
    Network network; // road classes assigned
    std::vector<Zone> zones;
    std::vector<Agent> population;
};

inline ScenarioInputs load_inputs(const MatrixConfig& cfg) {
    ScenarioInputs in;
    const auto raw = io::load_network(cfg.nodes_path, cfg.links_path);
    if (std::filesystem::exists(cfg.zones_path)) in.zones = io::load_zones(cfg.zones_path);
    const auto urban = std::find_if(in.zones.begin(), in.zones.end(), [&](const Zone& z) { return z.id == cfg.urban_zone; });
    if (urban == in.zones.end()) throw Error("urban zone '" + cfg.urban_zone + "' not found in " + cfg.zones_path);
    in.network = classify_road_types(raw, *urban);
    in.population = io::load_population(cfg.population_path);
    return in;
}

/// One sustainability perspective (shuttle powertrain assumption).
struct PerspectiveResult {
    std::string name;
    PowertrainMix sav_mix;
    VktTable vkt; // split by sampled powertrain
    double energy_gge = 0.0;
    std::map<std::string, double> vehicle_counts;
    LifecycleReport lifecycle;
};

struct ScenarioOutcome {
    Scenario scenario;
    bool ok = false;
    std::string error;
    std::size_t agents = 0;
    TripCounts trips;
    std::map<Mode, std::size_t> trips_by_mode;
    Seconds total_travel_time = 0.0;
    std::size_t required_fleet = 0;
    WaitingStats waiting;
    OccupancyProfile occupancy;
    VktTable vkt;
    std::vector<PerspectiveResult> perspectives; // "inherit", "electric"
    EventLog log;
};

inline PerspectiveResult evaluate_perspective(const std::string& name, const PowertrainMix& sav_mix, const EventLog& log,
                                              const Network& network, const MatrixConfig& cfg, std::uint64_t seed) {
    PerspectiveResult p;
    p.name = name;
    p.sav_mix = sav_mix;
    const PowertrainAssignment assignment(cfg.car_mix, sav_mix, seed);
    p.vkt = vkt_by_class(log, network, &assignment);
    const FleetMixes mixes{cfg.car_mix, sav_mix};
    const double driving = driving_emissions(p.vkt, mixes, cfg.factors, cfg.accounting);
    p.energy_gge = driving_energy(p.vkt, mixes, cfg.factors, cfg.accounting);
    p.vehicle_counts = active_vehicle_counts(log, assignment, cfg.accounting);
    const double nondriving = nondriving_emissions(p.vehicle_counts, cfg.factors);
    p.lifecycle = lifecycle(driving, nondriving, p.energy_gge);
    return p;
}

/// demand -> ban -> simulation -> metrics -> sustainability for one scenario.
inline ScenarioOutcome run_scenario(const Scenario& sc, const ScenarioInputs& in, const MatrixConfig& cfg,
                                    bool keep_log = true) {
    ScenarioOutcome out;
    out.scenario = sc;
    auto agents = expand_population(in.population, sc.multiplier, sc.population_seed);
    std::vector<Zone> zones;
    if (sc.zone) {
        const auto it = std::find_if(in.zones.begin(), in.zones.end(), [&](const Zone& z) { return z.id == *sc.zone; });
        if (it == in.zones.end()) throw Error(sc.name + ": zone '" + *sc.zone + "' not defined");
        zones.push_back(*it);
    }
    agents = apply_ban_to_plans(agents, zones);
    out.agents = agents.size();
    for (const auto& a : agents) {
        for (const auto& t : a.trips) ++out.trips_by_mode[t.mode];
    }

    SimulationInput sim;
    sim.network = &in.network;
    sim.zones = zones;
    sim.agents = agents;
    sim.fleet = sc.fleet;
    sim.engine = cfg.engine;
    sim.seed = sc.seed;
    auto result = Simulation(sim).run();
    const auto& log = result.log;

    out.trips = trip_counts(log);
    out.total_travel_time = total_travel_time(log);
    out.required_fleet = required_fleet(log);
    out.waiting = waiting_stats(log);
    out.occupancy = occupancy_profile(log, in.network, sc.fleet.capacity);
    out.vkt = vkt_by_class(log, in.network);

    // Car labels depend only on the demand level, so all columns of a row share them.
    const auto pt_seed = hash_seed(sc.population_seed, "powertrain");
    out.perspectives.push_back(evaluate_perspective("inherit", cfg.car_mix, log, in.network, cfg, pt_seed));
    out.perspectives.push_back(
        evaluate_perspective("electric", PowertrainMix::single(Powertrain::Bev), log, in.network, cfg, pt_seed));
    if (keep_log) out.log = std::move(result.log);
    out.ok = true;
    return out;
}

namespace detail {

inline nlohmann::json lifecycle_json(const LifecycleReport& r) {
    nlohmann::json j{{"driving_kg", round1(r.driving_kg)},
                     {"nondriving_kg", round1(r.nondriving_kg)},
                     {"total_kg", round1(r.total_kg)},
                     {"energy_gge", r.energy_gge},
                     {"driving_share_pct", r.driving_share_pct}};
    if (r.deltas) {
        j["delta_pct"] = {{"driving", r.deltas->driving_pct},
                          {"nondriving", r.deltas->nondriving_pct},
                          {"total", r.deltas->total_pct},
                          {"energy", r.deltas->energy_pct}};
    }
    return j;
}

} // namespace detail

/// summary.json content for one outcome.
inline nlohmann::json summary_json(const ScenarioOutcome& o, const MatrixConfig& cfg) {
    using nlohmann::json;
    const auto& sc = o.scenario;
    json j;
    j["scenario"] = sc.name;
    j["demand"] = sc.demand;
    j["area"] = sc.area;
    j["zone"] = sc.zone ? json(*sc.zone) : json(nullptr);
    j["baseline"] = sc.baseline;
    j["multiplier"] = sc.multiplier;
    if (sc.parent) j["parent"] = *sc.parent;
    if (sc.fleet_fraction) j["fleet_fraction"] = *sc.fleet_fraction;
    if (!o.ok) {
        j["error"] = o.error;
        return j;
    }
    j["agents"] = o.agents;
    json modes;
    for (const auto& [m, n] : o.trips_by_mode) modes[std::string(to_string(m))] = n;
    j["trips_by_mode"] = modes;
    j["events"] = {{"depart", o.trips.depart}, {"arrive", o.trips.arrive}, {"stuck", o.trips.stuck}};
    j["total_travel_time_s"] = o.total_travel_time;
    j["fleet"] = {{"mode", sc.fleet.fixed_fleet ? "fixed" : "spawn"},
                  {"capacity", sc.fleet.capacity},
                  {"required", o.required_fleet},
                  {"spawn_at_request_origin", !sc.fleet.fixed_fleet}};
    j["waiting"] = {{"mean_min", o.waiting.overall.mean_min},
                    {"median_min", o.waiting.overall.median_min},
                    {"p95_min", o.waiting.overall.p95_min},
                    {"served", o.waiting.overall.n},
                    {"unserved", o.waiting.unserved}};
    j["occupancy"] = {{"rate", o.occupancy.rate()},
                      {"rate_occupied_km", o.occupancy.rate_occupied()},
                      {"empty_share", empty_share(o.occupancy)},
                      {"sav_km", o.occupancy.total_km()},
                      {"note", "rate includes empty km in the denominator"}};
    j["vkt_km"] = {{"car_urban", o.vkt.km(Mode::Car, RoadClass::Urban)},
                   {"car_rural", o.vkt.km(Mode::Car, RoadClass::Rural)},
                   {"sav_urban", o.vkt.km(Mode::Sav, RoadClass::Urban)},
                   {"sav_rural", o.vkt.km(Mode::Sav, RoadClass::Rural)},
                   {"total", o.vkt.total()},
                   {"passenger_km", o.vkt.total_passenger_km()}};
    json persp;
    for (const auto& p : o.perspectives) {
        auto pj = detail::lifecycle_json(p.lifecycle);
        json counts;
        for (const auto& [type, n] : p.vehicle_counts) counts[type] = n;
        pj["vehicles"] = counts;
        persp[p.name] = pj;
    }
    j["lifecycle"] = persp;
    j["assumptions"] = {{"av_efficiency", cfg.factors.av_efficiency},
                        {"av_efficiency_on_emissions", cfg.factors.av_efficiency_on_emissions},
                        {"av_efficiency_on_energy", cfg.factors.av_efficiency_on_energy},
                        {"renewable_grid", cfg.factors.renewable_grid},
                        {"accounting", cfg.accounting == Accounting::Sampled ? "sampled" : "analytic"},
                        {"other_share_booked_as", "lpg"},
                        {"hev_share", "urban electric, rural gasoline"}};
    j["warnings"] = nondriving_warnings(cfg.factors);
    return j;
}

struct MatrixResult {
    std::vector<ScenarioOutcome> outcomes;
    std::vector<nlohmann::json> summaries;
};

namespace detail {

inline void run_parallel(std::vector<ScenarioOutcome>& outcomes, const std::vector<Scenario>& scenarios,
                         const ScenarioInputs& in, const MatrixConfig& cfg, unsigned parallelism, bool keep_logs) {
    const std::size_t first = outcomes.size();
    outcomes.resize(first + scenarios.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&]() {
        for (std::size_t i = next++; i < scenarios.size(); i = next++) {
            auto& slot = outcomes[first + i];
            try {
                slot = run_scenario(scenarios[i], in, cfg, keep_logs);
            } catch (const std::exception& e) {
                slot = ScenarioOutcome{};
                slot.scenario = scenarios[i];
                slot.error = e.what();
            }
        }
    };
    const unsigned threads = std::max(1u, std::min<unsigned>(parallelism, static_cast<unsigned>(scenarios.size())));
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
}

} // namespace detail

/// Fixed-fleet variants of a spawn-mode scenario sized at a fraction of its
/// required fleet.
inline std::vector<Scenario> reduction_scenarios(const ScenarioOutcome& parent, const std::vector<double>& fractions) {
    std::vector<Scenario> out;
    for (double f : fractions) {
        Scenario s = parent.scenario;
        const auto pct = static_cast<int>(std::lround(f * 100.0));
        s.name = parent.scenario.name + "-F" + std::to_string(pct);
        s.parent = parent.scenario.name;
        s.fleet_fraction = f;
        s.fleet.fixed_fleet =
            std::max<std::int64_t>(1, std::llround(f * static_cast<double>(parent.required_fleet)));
        s.fleet.spawn_enabled = false;
        s.seed = hash_seed(parent.scenario.seed, s.name);
        out.push_back(std::move(s));
    }
    return out;
}

/// Runs all scenarios (then any fleet-reduction variants), joins, and
/// computes deltas against each scenario's baseline. Results do not depend
/// on `parallelism`.
inline MatrixResult run_matrix(const std::vector<Scenario>& scenarios, const ScenarioInputs& in, const MatrixConfig& cfg,
                               unsigned parallelism = 1, bool keep_logs = true) {
    MatrixResult r;
    detail::run_parallel(r.outcomes, scenarios, in, cfg, parallelism, keep_logs);

    std::vector<Scenario> variants;
    for (const auto& name : cfg.reduction_scenarios) {
        const auto it = std::find_if(r.outcomes.begin(), r.outcomes.end(),
                                     [&](const ScenarioOutcome& o) { return o.scenario.name == name; });
        if (it == r.outcomes.end() || !it->ok || it->scenario.fleet.fixed_fleet) continue;
        for (auto& v : reduction_scenarios(*it, cfg.reduction_fractions)) variants.push_back(std::move(v));
    }
    if (!variants.empty()) detail::run_parallel(r.outcomes, variants, in, cfg, parallelism, keep_logs);

    std::map<std::string, const ScenarioOutcome*> by_name;
    for (const auto& o : r.outcomes) by_name[o.scenario.name] = &o;
    for (auto& o : r.outcomes) {
        if (!o.ok) continue;
        const auto it = by_name.find(o.scenario.baseline);
        const ScenarioOutcome* base = it != by_name.end() && it->second->ok ? it->second : nullptr;
        for (std::size_t k = 0; k < o.perspectives.size(); ++k) {
            try {
                o.perspectives[k].lifecycle =
                    compare_to_baseline(o.perspectives[k].lifecycle, base ? &base->perspectives[k].lifecycle : nullptr);
            } catch (const Error&) {
                // no baseline: deltas stay empty and the comparison row says so
            }
        }
    }
    for (const auto& o : r.outcomes) r.summaries.push_back(summary_json(o, cfg));
    return r;
}

struct Comparison {
    std::string csv;
    std::string long_csv;
};

/// comparison.csv (one row per scenario) and a long-format table for plotting.
/// Rows are ordered by scenario name.
inline Comparison build_comparison(std::vector<nlohmann::json> summaries) {
    using nlohmann::json;
    std::sort(summaries.begin(), summaries.end(), [](const json& a, const json& b) {
        return a.at("scenario").get<std::string>() < b.at("scenario").get<std::string>();
    });
    std::map<std::string, const json*> by_name;
    for (const auto& s : summaries) by_name[s.at("scenario").get<std::string>()] = &s;
    const auto f3 = [](double v) { return std::isfinite(v) ? format_fixed(v, 3) : std::string("nan"); };

    Comparison c;
    c.csv = "scenario,baseline,required_fleet,vkt_km,vkt_delta_pct,car_km,sav_km,occupancy_rate,empty_share,"
            "mean_wait_min,p95_wait_min,driving_kg,driving_delta_pct,energy_gge,energy_delta_pct,nondriving_kg,"
            "nondriving_delta_pct,lifecycle_kg,lifecycle_delta_pct,electric_lifecycle_kg,electric_lifecycle_delta_pct,"
            "status\n";
    c.long_csv = "scenario,metric,value\n";
    for (const auto& s : summaries) {
        const auto name = s.at("scenario").get<std::string>();
        const auto baseline = s.value("baseline", std::string{});
        if (s.contains("error")) {
            c.csv += name + "," + baseline + std::string(20, ',') + "error\n";
            continue;
        }
        const auto bit = by_name.find(baseline);
        const json* base = bit != by_name.end() && !bit->second->contains("error") ? bit->second : nullptr;
        const auto& inherit = s.at("lifecycle").at("inherit");
        const auto& electric = s.at("lifecycle").at("electric");
        const auto delta = [&](const json& lc, const char* key) -> std::string {
            return lc.contains("delta_pct") ? f3(lc.at("delta_pct").at(key).get<double>()) : std::string();
        };
        const double vkt = s.at("vkt_km").at("total").get<double>();
        const std::string vkt_delta =
            base ? f3(percent_delta(vkt, base->at("vkt_km").at("total").get<double>())) : std::string();
        const double car_km = s.at("vkt_km").at("car_urban").get<double>() + s.at("vkt_km").at("car_rural").get<double>();
        const double sav_km = s.at("vkt_km").at("sav_urban").get<double>() + s.at("vkt_km").at("sav_rural").get<double>();
        const std::vector<std::pair<std::string, std::string>> fields{
            {"required_fleet", std::to_string(s.at("fleet").at("required").get<std::size_t>())},
            {"vkt_km", f3(vkt)},
            {"vkt_delta_pct", vkt_delta},
            {"car_km", f3(car_km)},
            {"sav_km", f3(sav_km)},
            {"occupancy_rate", f3(s.at("occupancy").at("rate").get<double>())},
            {"empty_share", f3(s.at("occupancy").at("empty_share").get<double>())},
            {"mean_wait_min", f3(s.at("waiting").at("mean_min").get<double>())},
            {"p95_wait_min", f3(s.at("waiting").at("p95_min").get<double>())},
            {"driving_kg", f3(inherit.at("driving_kg").get<double>())},
            {"driving_delta_pct", delta(inherit, "driving")},
            {"energy_gge", f3(inherit.at("energy_gge").get<double>())},
            {"energy_delta_pct", delta(inherit, "energy")},
            {"nondriving_kg", f3(inherit.at("nondriving_kg").get<double>())},
            {"nondriving_delta_pct", delta(inherit, "nondriving")},
            {"lifecycle_kg", f3(inherit.at("total_kg").get<double>())},
            {"lifecycle_delta_pct", delta(inherit, "total")},
            {"electric_lifecycle_kg", f3(electric.at("total_kg").get<double>())},
            {"electric_lifecycle_delta_pct", delta(electric, "total")},
        };
        c.csv += name + "," + baseline;
        for (const auto& [key, value] : fields) {
            c.csv += "," + value;
            if (!value.empty()) c.long_csv += name + "," + key + "," + value + "\n";
        }
        c.csv += base ? ",ok\n" : ",baseline run missing\n";
    }
    return c;
}

/// Writes per-scenario reports and the comparison tables under `dir`.
inline void write_reports(const std::filesystem::path& dir, const MatrixResult& result, const MatrixConfig& cfg) {
    std::filesystem::create_directories(dir);
    for (std::size_t i = 0; i < result.outcomes.size(); ++i) {
        const auto& o = result.outcomes[i];
        const auto sdir = dir / o.scenario.name;
        std::filesystem::create_directories(sdir);
        io::write_file((sdir / "summary.json").string(), result.summaries[i].dump(2) + "\n");
        if (!o.ok) continue;
        if (cfg.write_events && !o.log.empty()) {
            write_event_log((sdir / (cfg.gzip_events ? "events.csv.gz" : "events.csv")).string(), o.log, cfg.gzip_events);
        }
        std::string waiting = "hour,mean_min,p95_min,n\n";
        for (const auto& row : o.waiting.hours) {
            waiting += std::to_string(row.hour) + "," + format_fixed(row.mean_min, 3) + "," + format_fixed(row.p95_min, 3) +
                       "," + std::to_string(row.n) + "\n";
        }
        io::write_file((sdir / "waiting.csv").string(), waiting);
        std::string occupancy = "load,km\n";
        for (std::size_t l = 0; l < o.occupancy.km_by_load.size(); ++l) {
            occupancy += std::to_string(l) + "," + format_fixed(o.occupancy.km_by_load[l], 3) + "\n";
        }
        io::write_file((sdir / "occupancy.csv").string(), occupancy);
        std::string vkt = "mode,class,powertrain,km\n";
        for (const auto& p : o.perspectives) {
            if (p.name != "inherit") continue;
            for (const auto& [key, km] : p.vkt.by_powertrain) {
                vkt += std::string(to_string(std::get<0>(key))) + "," + std::string(to_string(std::get<1>(key))) + "," +
                       std::string(to_string(std::get<2>(key))) + "," + format_fixed(km, 3) + "\n";
            }
        }
        io::write_file((sdir / "vkt.csv").string(), vkt);
    }
    const auto cmp = build_comparison(result.summaries);
    io::write_file((dir / "comparison.csv").string(), cmp.csv);
    io::write_file((dir / "comparison_long.csv").string(), cmp.long_csv);
}

} // namespace shuttleflow

#endif // SHUTTLEFLOW_SCENARIO_HPP
