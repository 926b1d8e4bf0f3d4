#ifndef SHUTTLEFLOW_TYPES_HPP
#define SHUTTLEFLOW_TYPES_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace shuttleflow {

/// Raised for malformed inputs and violated preconditions.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Mode : std::uint8_t { Car, Sav, Bike, Walk, Pt };
inline constexpr std::array<Mode, 5> kAllModes{Mode::Car, Mode::Sav, Mode::Bike, Mode::Walk, Mode::Pt};

enum class RoadClass : std::uint8_t { Urban, Rural };
inline constexpr std::array<RoadClass, 2> kRoadClasses{RoadClass::Urban, RoadClass::Rural};

enum class Powertrain : std::uint8_t { Gasoline, Diesel, Hev, Bev, Lpg };
inline constexpr std::array<Powertrain, 5> kPowertrains{Powertrain::Gasoline, Powertrain::Diesel,
                                                        Powertrain::Hev, Powertrain::Bev,
                                                        Powertrain::Lpg};

inline std::string_view to_string(Mode m) {
    switch (m) {
    case Mode::Car: return "car";
    case Mode::Sav: return "sav";
    case Mode::Bike: return "bike";
    case Mode::Walk: return "walk";
    case Mode::Pt: return "pt";
    }
    return "?";
}

inline std::string_view to_string(RoadClass c) { return c == RoadClass::Urban ? "urban" : "rural"; }

inline std::string_view to_string(Powertrain p) {
    switch (p) {
    case Powertrain::Gasoline: return "gasoline";
    case Powertrain::Diesel: return "diesel";
    case Powertrain::Hev: return "hev";
    case Powertrain::Bev: return "bev";
    case Powertrain::Lpg: return "lpg";
    }
    return "?";
}

inline std::string lowercase(std::string_view s) {
    std::string out(s);
    for (auto& ch : out) {
        if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
    }
    return out;
}

inline Mode parse_mode(std::string_view s) {
    const auto t = lowercase(s);
    for (auto m : kAllModes) {
        if (t == to_string(m)) return m;
    }
    throw Error("unknown mode '" + std::string(s) + "'");
}

inline RoadClass parse_road_class(std::string_view s) {
    const auto t = lowercase(s);
    if (t == "urban") return RoadClass::Urban;
    if (t == "rural") return RoadClass::Rural;
    throw Error("unknown road class '" + std::string(s) + "'");
}

inline Powertrain parse_powertrain(std::string_view s) {
    const auto t = lowercase(s);
    for (auto p : kPowertrains) {
        if (t == to_string(p)) return p;
    }
    throw Error("unknown powertrain '" + std::string(s) + "'");
}

/// Small bitset over Mode.
class ModeSet {
public:
    constexpr ModeSet() = default;
    constexpr ModeSet(std::initializer_list<Mode> modes) {
        for (auto m : modes) insert(m);
    }

    static constexpr ModeSet all() { return {Mode::Car, Mode::Sav, Mode::Bike, Mode::Walk, Mode::Pt}; }

    constexpr void insert(Mode m) { bits_ |= bit(m); }
    constexpr void erase(Mode m) { bits_ &= static_cast<std::uint8_t>(~bit(m)); }
    [[nodiscard]] constexpr bool contains(Mode m) const { return (bits_ & bit(m)) != 0; }
    [[nodiscard]] constexpr bool empty() const { return bits_ == 0; }
    constexpr bool operator==(const ModeSet&) const = default;

private:
    static constexpr std::uint8_t bit(Mode m) { return static_cast<std::uint8_t>(1u << static_cast<unsigned>(m)); }
    std::uint8_t bits_ = 0;
};

/// `|`-separated mode tokens, e.g. "car|sav|bike".
inline ModeSet parse_mode_set(std::string_view s) {
    ModeSet out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto end = s.find('|', start);
        const auto tok = s.substr(start, end == std::string_view::npos ? s.size() - start : end - start);
        if (!tok.empty()) out.insert(parse_mode(tok));
        if (end == std::string_view::npos) break;
        start = end + 1;
    }
    return out;
}

inline std::string format_mode_set(ModeSet set) {
    std::string out;
    for (auto m : kAllModes) {
        if (!set.contains(m)) continue;
        if (!out.empty()) out += '|';
        out += to_string(m);
    }
    return out;
}

/// Planar coordinate in meters.
struct Coord {
    double x = 0.0;
    double y = 0.0;
    constexpr bool operator==(const Coord&) const = default;
};

inline double distance(Coord a, Coord b) { return std::hypot(a.x - b.x, a.y - b.y); }
inline Coord midpoint(Coord a, Coord b) { return {(a.x + b.x) / 2.0, (a.y + b.y) / 2.0}; }

/// Seconds since midnight of the first simulated day.
using Seconds = double;

inline constexpr Seconds kHorizon = 48.0 * 3600.0;

} // namespace shuttleflow

#endif // SHUTTLEFLOW_TYPES_HPP
