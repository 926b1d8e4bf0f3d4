#ifndef SHUTTLEFLOW_POWERTRAIN_HPP
#define SHUTTLEFLOW_POWERTRAIN_HPP

#include "events.hpp"
#include "rng.hpp"
#include "types.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <string>

namespace shuttleflow {

/// Fleet composition by powertrain; shares sum to one.
struct PowertrainMix {
    std::array<double, 5> shares{}; // indexed by Powertrain

    [[nodiscard]] double share(Powertrain p) const { return shares[static_cast<std::size_t>(p)]; }
    double& share(Powertrain p) { return shares[static_cast<std::size_t>(p)]; }

    void validate() const {
        double sum = 0.0;
        for (double s : shares) {
            if (!(s >= 0.0)) throw Error("powertrain mix has a negative share");
            sum += s;
        }
        if (std::abs(sum - 1.0) > 1e-9) throw Error("powertrain mix shares sum to " + std::to_string(sum) + ", not 1");
    }

    static PowertrainMix single(Powertrain p) {
        PowertrainMix m;
        m.share(p) = 1.0;
        return m;
    }

    /// 2011 registered-vehicle split: 78.9% gasoline, 19.7% diesel, 0.2%
    /// hybrid, 1.2% other (booked as LPG).
    static PowertrainMix registered_2011() {
        PowertrainMix m;
        m.share(Powertrain::Gasoline) = 0.789;
        m.share(Powertrain::Diesel) = 0.197;
        m.share(Powertrain::Hev) = 0.002;
        m.share(Powertrain::Lpg) = 0.012;
        return m;
    }

    /// Inverse-CDF draw for u in [0, 1).
    [[nodiscard]] Powertrain sample(double u) const {
        double acc = 0.0;
        Powertrain last = Powertrain::Gasoline;
        for (auto p : kPowertrains) {
            if (share(p) <= 0.0) continue;
            acc += share(p);
            last = p;
            if (u < acc) return p;
        }
        return last;
    }

    bool operator==(const PowertrainMix&) const = default;
};

/// Per-vehicle powertrain labels. Each vehicle's draw depends only on the
/// seed and its own id, so the labels do not depend on event order.
class PowertrainAssignment {
public:
    PowertrainAssignment(PowertrainMix car, PowertrainMix sav, std::uint64_t seed)
        : car_(car), sav_(sav), seed_(seed) {
        car_.validate();
        sav_.validate();
    }

    /// Cars are keyed by their driver (agent subjects); shuttles by vehicle.
    [[nodiscard]] Powertrain of(const Subject& vehicle) const {
        const bool is_sav = vehicle.kind == SubjectKind::Vehicle;
        const double u = to_unit(hash_seed(seed_, static_cast<std::uint64_t>(vehicle.kind),
                                           static_cast<std::uint64_t>(vehicle.id)));
        return (is_sav ? sav_ : car_).sample(u);
    }

    [[nodiscard]] const PowertrainMix& car_mix() const { return car_; }
    [[nodiscard]] const PowertrainMix& sav_mix() const { return sav_; }

private:
    PowertrainMix car_;
    PowertrainMix sav_;
    std::uint64_t seed_;
};

} // namespace shuttleflow

#endif // SHUTTLEFLOW_POWERTRAIN_HPP
