#ifndef SHUTTLEFLOW_SUSTAIN_HPP
#define SHUTTLEFLOW_SUSTAIN_HPP

#include "events.hpp"
#include "metrics.hpp"
#include "powertrain.hpp"
#include "types.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace shuttleflow {

/// Construction, maintenance and end-of-life emissions of one vehicle type,
/// spread over its lifetime distance. Per-day value:
///   lifetime_g * daily_km / lifetime_km
struct NondrivingCoefficient {
    double lifetime_g = 0.0;
    double lifetime_km = 1.0;
    double daily_km = 0.0;

    [[nodiscard]] double grams_per_day() const { return lifetime_g * daily_km / lifetime_km; }
};

/// Driving factors per (powertrain, road class) plus the non-driving
/// coefficients. Hybrids have no row of their own: they run on the BEV
/// factors on urban roads and on the gasoline factors on rural roads.
struct FactorSet {
    std::map<std::pair<Powertrain, RoadClass>, double> emis;   // g CO2eq / km
    std::map<std::pair<Powertrain, RoadClass>, double> energy; // GGE / km
    bool renewable_grid = true;
    double av_efficiency = 0.9;
    bool av_efficiency_on_emissions = true;
    bool av_efficiency_on_energy = true;
    std::map<std::string, NondrivingCoefficient> nondriving; // by vehicle type

    /// Emission and energy factors for urban/rural roads.
    static FactorSet reference_factors() {
        FactorSet f;
        const auto put = [&f](Powertrain p, double eu, double er, double gu, double gr) {
            f.emis[{p, RoadClass::Urban}] = eu;
            f.emis[{p, RoadClass::Rural}] = er;
            f.energy[{p, RoadClass::Urban}] = gu;
            f.energy[{p, RoadClass::Rural}] = gr;
        };
        put(Powertrain::Gasoline, 246.1, 146.4, 0.0282, 0.0168);
        put(Powertrain::Diesel, 199.4, 146.4, 0.0228, 0.0168);
        put(Powertrain::Lpg, 185.2, 157.3, 0.0280, 0.0238);
        put(Powertrain::Bev, 0.0, 0.0, 0.0084, 0.0097);
        return f;
    }

    void validate() const {
        for (const auto* table : {&emis, &energy}) {
            for (const auto& [key, v] : *table) {
                if (key.first == Powertrain::Hev) throw Error("hybrid factors are derived; do not list them");
                if (!(v >= 0.0)) throw Error("negative factor for " + std::string(to_string(key.first)));
            }
        }
        if (!(av_efficiency > 0.0 && av_efficiency <= 1.0)) throw Error("av_efficiency must lie in (0, 1]");
        for (const auto& [type, c] : nondriving) {
            if (!(c.lifetime_g >= 0.0) || !(c.lifetime_km > 0.0) || !(c.daily_km >= 0.0)) {
                throw Error("invalid non-driving coefficient for '" + type + "'");
            }
        }
    }

    [[nodiscard]] double emission_factor(Powertrain p, RoadClass c) const {
        if (p == Powertrain::Hev) {
            return c == RoadClass::Urban ? emission_factor(Powertrain::Bev, c) : emission_factor(Powertrain::Gasoline, c);
        }
        if (p == Powertrain::Bev && renewable_grid) return 0.0;
        return lookup(emis, p, c, "emission");
    }

    [[nodiscard]] double energy_factor(Powertrain p, RoadClass c) const {
        if (p == Powertrain::Hev) {
            return c == RoadClass::Urban ? energy_factor(Powertrain::Bev, c) : energy_factor(Powertrain::Gasoline, c);
        }
        return lookup(energy, p, c, "energy");
    }

private:
    static double lookup(const std::map<std::pair<Powertrain, RoadClass>, double>& table, Powertrain p, RoadClass c,
                         const char* what) {
        const auto it = table.find({p, c});
        if (it == table.end()) {
            throw Error(std::string("missing ") + what + " factor for " + std::string(to_string(p)) + "/" +
                        std::string(to_string(c)));
        }
        return it->second;
    }
};

/// Powertrain mixes of private cars and of the shuttle fleet.
struct FleetMixes {
    PowertrainMix car = PowertrainMix::registered_2011();
    PowertrainMix sav = PowertrainMix::registered_2011();
};

enum class Accounting : std::uint8_t {
    Analytic, // km split proportionally by the mix
    Sampled,  // km booked per vehicle under its sampled powertrain
};

struct DrivingTerm {
    Mode mode = Mode::Car;
    RoadClass road_class = RoadClass::Urban;
    Powertrain powertrain = Powertrain::Gasoline;
    double km = 0.0;     // km attributed to this powertrain
    double factor = 0.0; // per km
    double scale = 1.0;  // av_efficiency for shuttles, else 1
    double value = 0.0;  // km * factor * scale
};

/// Per-term results; `total` is in the term unit (g or GGE).
struct DrivingBreakdown {
    std::vector<DrivingTerm> terms;
    double total = 0.0;
};

namespace detail {

template <typename FactorFn>
DrivingBreakdown driving_terms(const VktTable& vkt, const FleetMixes& mixes, Accounting accounting, double sav_scale,
                               FactorFn factor) {
    mixes.car.validate();
    mixes.sav.validate();
    DrivingBreakdown out;
    const auto add = [&](Mode m, RoadClass c, Powertrain p, double km) {
        DrivingTerm t;
        t.mode = m;
        t.road_class = c;
        t.powertrain = p;
        t.km = km;
        t.factor = factor(p, c);
        t.scale = m == Mode::Sav ? sav_scale : 1.0;
        t.value = km * t.factor * t.scale;
        out.total += t.value;
        out.terms.push_back(t);
    };
    if (accounting == Accounting::Analytic) {
        for (const auto& [key, km] : vkt.cells) {
            const auto& mix = key.first == Mode::Sav ? mixes.sav : mixes.car;
            for (auto p : kPowertrains) {
                if (mix.share(p) > 0.0) add(key.first, key.second, p, km * mix.share(p));
            }
        }
    } else {
        double booked = 0.0;
        for (const auto& [key, km] : vkt.by_powertrain) {
            add(std::get<0>(key), std::get<1>(key), std::get<2>(key), km);
            booked += km;
        }
        if (std::abs(booked - vkt.total()) > 1e-9 * std::max(1.0, vkt.total())) {
            throw Error("sampled accounting needs a powertrain split of every vehicle-km");
        }
    }
    return out;
}

} // namespace detail

/// Driving emissions in grams (breakdown) for one day of vehicle-km.
inline DrivingBreakdown driving_emission_terms(const VktTable& vkt, const FleetMixes& mixes, const FactorSet& factors,
                                               Accounting accounting = Accounting::Analytic) {
    const double scale = factors.av_efficiency_on_emissions ? factors.av_efficiency : 1.0;
    return detail::driving_terms(vkt, mixes, accounting, scale,
                                 [&](Powertrain p, RoadClass c) { return factors.emission_factor(p, c); });
}

/// Driving emissions, kg CO2eq per day.
inline double driving_emissions(const VktTable& vkt, const FleetMixes& mixes, const FactorSet& factors,
                                Accounting accounting = Accounting::Analytic) {
    return driving_emission_terms(vkt, mixes, factors, accounting).total / 1000.0;
}

/// Driving energy breakdown in GGE.
inline DrivingBreakdown driving_energy_terms(const VktTable& vkt, const FleetMixes& mixes, const FactorSet& factors,
                                             Accounting accounting = Accounting::Analytic) {
    const double scale = factors.av_efficiency_on_energy ? factors.av_efficiency : 1.0;
    return detail::driving_terms(vkt, mixes, accounting, scale,
                                 [&](Powertrain p, RoadClass c) { return factors.energy_factor(p, c); });
}

/// Driving energy, GGE per day.
inline double driving_energy(const VktTable& vkt, const FleetMixes& mixes, const FactorSet& factors,
                             Accounting accounting = Accounting::Analytic) {
    return driving_energy_terms(vkt, mixes, factors, accounting).total;
}

/// Vehicle type used for non-driving coefficients: "<car|sav>_<ice|bev>".
inline std::string vehicle_type(Mode mode, Powertrain p) {
    return std::string(mode == Mode::Sav ? "sav" : "car") + (p == Powertrain::Bev ? "_bev" : "_ice");
}

/// Vehicles in service: every agent that started a car trip owns one car;
/// every spawned shuttle counts once. Sampled accounting labels each vehicle;
/// analytic accounting splits the counts by the mixes.
inline std::map<std::string, double> active_vehicle_counts(const EventLog& log, const PowertrainAssignment& assignment,
                                                           Accounting accounting = Accounting::Sampled) {
    std::set<Subject> cars;
    std::set<Subject> savs;
    for (const auto& e : log) {
        if (e.kind == EventKind::Depart && e.mode == Mode::Car) cars.insert(e.subject);
        if (e.kind == EventKind::VehicleSpawn) savs.insert(e.subject);
    }
    std::map<std::string, double> counts;
    const auto book = [&](const std::set<Subject>& vehicles, Mode mode, const PowertrainMix& mix) {
        counts[vehicle_type(mode, Powertrain::Gasoline)] += 0.0;
        counts[vehicle_type(mode, Powertrain::Bev)] += 0.0;
        if (accounting == Accounting::Sampled) {
            for (const auto& v : vehicles) counts[vehicle_type(mode, assignment.of(v))] += 1.0;
        } else {
            for (auto p : kPowertrains) counts[vehicle_type(mode, p)] += mix.share(p) * static_cast<double>(vehicles.size());
        }
    };
    book(cars, Mode::Car, assignment.car_mix());
    book(savs, Mode::Sav, assignment.sav_mix());
    return counts;
}

/// Non-driving emissions, kg CO2eq per day.
inline double nondriving_emissions(const std::map<std::string, double>& active_vehicle_counts,
                                   const FactorSet& factors) {
    double grams = 0.0;
    for (const auto& [type, count] : active_vehicle_counts) {
        if (count <= 0.0) continue;
        const auto it = factors.nondriving.find(type);
        if (it == factors.nondriving.end()) throw Error("missing non-driving coefficient for '" + type + "'");
        grams += count * it->second.grams_per_day();
    }
    return grams / 1000.0;
}

/// Electric vehicles are expected to carry the larger non-driving burden;
/// returns one message per vehicle class where they do not.
inline std::vector<std::string> nondriving_warnings(const FactorSet& factors) {
    std::vector<std::string> out;
    for (const std::string prefix : {"car", "sav"}) {
        const auto ice = factors.nondriving.find(prefix + "_ice");
        const auto bev = factors.nondriving.find(prefix + "_bev");
        if (ice == factors.nondriving.end() || bev == factors.nondriving.end()) continue;
        if (!(bev->second.grams_per_day() > ice->second.grams_per_day())) {
            out.push_back(prefix + "_bev non-driving coefficient is not above " + prefix + "_ice");
        }
    }
    return out;
}

struct LifecycleDeltas {
    double driving_pct = 0.0;
    double nondriving_pct = 0.0;
    double total_pct = 0.0;
    double energy_pct = 0.0;
};

struct LifecycleReport {
    double driving_kg = 0.0;
    double nondriving_kg = 0.0;
    double total_kg = 0.0;
    double energy_gge = 0.0;
    double driving_share_pct = 0.0;
    std::optional<LifecycleDeltas> deltas;
};

inline LifecycleReport lifecycle(double driving_kg, double nondriving_kg, double energy_gge = 0.0) {
    LifecycleReport r;
    r.driving_kg = driving_kg;
    r.nondriving_kg = nondriving_kg;
    r.total_kg = driving_kg + nondriving_kg;
    r.energy_gge = energy_gge;
    r.driving_share_pct = r.total_kg > 0.0 ? 100.0 * driving_kg / r.total_kg : 0.0;
    return r;
}

/// Relative change in percent; 0 when both are zero.
inline double percent_delta(double value, double baseline) {
    if (baseline == 0.0) {
        return value == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), value);
    }
    return 100.0 * (value - baseline) / baseline;
}

/// Fills the deltas against a baseline run.
inline LifecycleReport compare_to_baseline(LifecycleReport report, const LifecycleReport* baseline) {
    if (baseline == nullptr) throw Error("baseline run missing");
    report.deltas = LifecycleDeltas{
        percent_delta(report.driving_kg, baseline->driving_kg),
        percent_delta(report.nondriving_kg, baseline->nondriving_kg),
        percent_delta(report.total_kg, baseline->total_kg),
        percent_delta(report.energy_gge, baseline->energy_gge),
    };
    return report;
}

inline double round1(double v) { return std::round(v * 10.0) / 10.0; }

} // namespace shuttleflow

#endif // SHUTTLEFLOW_SUSTAIN_HPP
