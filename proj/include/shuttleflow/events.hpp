#ifndef SHUTTLEFLOW_EVENTS_HPP
#define SHUTTLEFLOW_EVENTS_HPP

#include "netgraph.hpp"
#include "types.hpp"

#include <zlib.h>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace shuttleflow {

enum class EventKind : std::uint8_t {
    Depart,
    LinkEnter,
    LinkLeave,
    Arrive,
    RequestSubmitted,
    Pickup,
    Dropoff,
    VehicleSpawn,
    StuckAgent,
};

inline std::string_view to_string(EventKind k) {
    switch (k) {
    case EventKind::Depart: return "Depart";
    case EventKind::LinkEnter: return "LinkEnter";
    case EventKind::LinkLeave: return "LinkLeave";
    case EventKind::Arrive: return "Arrive";
    case EventKind::RequestSubmitted: return "RequestSubmitted";
    case EventKind::Pickup: return "Pickup";
    case EventKind::Dropoff: return "Dropoff";
    case EventKind::VehicleSpawn: return "VehicleSpawn";
    case EventKind::StuckAgent: return "StuckAgent";
    }
    return "?";
}

inline EventKind parse_event_kind(std::string_view s) {
    for (int i = 0; i <= static_cast<int>(EventKind::StuckAgent); ++i) {
        const auto k = static_cast<EventKind>(i);
        if (s == to_string(k)) return k;
    }
    throw Error("unknown event kind '" + std::string(s) + "'");
}

enum class SubjectKind : std::uint8_t { Agent, Vehicle, Request };

/// Agent, shuttle, or ride request; printed as a12 / v3 / r7.
struct Subject {
    SubjectKind kind = SubjectKind::Agent;
    std::int64_t id = 0;

    bool operator==(const Subject&) const = default;
    auto operator<=>(const Subject&) const = default;

    [[nodiscard]] std::string str() const {
        const char prefix = kind == SubjectKind::Agent ? 'a' : kind == SubjectKind::Vehicle ? 'v' : 'r';
        return prefix + std::to_string(id);
    }

    static Subject parse(std::string_view s) {
        if (s.size() < 2) throw Error("bad subject '" + std::string(s) + "'");
        SubjectKind kind;
        switch (s[0]) {
        case 'a': kind = SubjectKind::Agent; break;
        case 'v': kind = SubjectKind::Vehicle; break;
        case 'r': kind = SubjectKind::Request; break;
        default: throw Error("bad subject '" + std::string(s) + "'");
        }
        return {kind, std::stoll(std::string(s.substr(1)))};
    }
};

inline Subject agent_subject(std::int64_t id) { return {SubjectKind::Agent, id}; }
inline Subject vehicle_subject(std::int64_t id) { return {SubjectKind::Vehicle, id}; }
inline Subject request_subject(std::int64_t id) { return {SubjectKind::Request, id}; }

/// One simulation event.
///
/// Field use by kind:
///   Depart/Arrive/StuckAgent   subject=agent, mode=trip mode
///   LinkEnter/LinkLeave        subject=agent (car) or vehicle (shuttle), link set;
///                              shuttle events carry load = passengers on board
///   RequestSubmitted           subject=request, ref=agent
///   Pickup/Dropoff             subject=vehicle, ref=request, load after the stop
///   VehicleSpawn               subject=vehicle
struct Event {
    Seconds time = 0.0;
    EventKind kind = EventKind::Depart;
    Subject subject;
    std::optional<LinkId> link;
    Coord coord;
    std::optional<Mode> mode;
    int load = -1;
    std::optional<Subject> ref;

    bool operator==(const Event&) const = default;
};

using EventLog = std::vector<Event>;

inline constexpr std::string_view kEventCsvHeader = "time_s,kind,subject,link,x,y,mode,load,ref";

inline std::string format_fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

inline std::string format_event(const Event& e) {
    std::string line = format_fixed(e.time, 3);
    line += ',';
    line += to_string(e.kind);
    line += ',';
    line += e.subject.str();
    line += ',';
    if (e.link) line += std::to_string(*e.link);
    line += ',';
    line += format_fixed(e.coord.x, 3);
    line += ',';
    line += format_fixed(e.coord.y, 3);
    line += ',';
    if (e.mode) line += to_string(*e.mode);
    line += ',';
    if (e.load >= 0) line += std::to_string(e.load);
    line += ',';
    if (e.ref) line += e.ref->str();
    return line;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

inline Event parse_event(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const auto f = split_csv_line(line);
    if (f.size() != 9) throw Error("event line has " + std::to_string(f.size()) + " fields: " + std::string(line));
    Event e;
    e.time = std::stod(std::string(f[0]));
    e.kind = parse_event_kind(f[1]);
    e.subject = Subject::parse(f[2]);
    if (!f[3].empty()) e.link = std::stoll(std::string(f[3]));
    e.coord = {std::stod(std::string(f[4])), std::stod(std::string(f[5]))};
    if (!f[6].empty()) e.mode = parse_mode(f[6]);
    if (!f[7].empty()) e.load = std::stoi(std::string(f[7]));
    if (!f[8].empty()) e.ref = Subject::parse(f[8]);
    return e;
}

inline std::string format_event_log(const EventLog& log) {
    std::string out(kEventCsvHeader);
    out += '\n';
    for (const auto& e : log) {
        out += format_event(e);
        out += '\n';
    }
    return out;
}

/// Writes the log as CSV; gzip-compressed when `gzip` is set.
inline void write_event_log(const std::string& path, const EventLog& log, bool gzip = false) {
    const auto text = format_event_log(log);
    if (gzip) {
        gzFile f = gzopen(path.c_str(), "wb");
        if (f == nullptr) throw Error("cannot open " + path);
        const int written = gzwrite(f, text.data(), static_cast<unsigned>(text.size()));
        gzclose(f);
        if (written != static_cast<int>(text.size())) throw Error("short write to " + path);
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path);
    out << text;
}

/// Reads plain or gzip-compressed event CSV (zlib detects the format).
inline EventLog read_event_log(const std::string& path) {
    gzFile f = gzopen(path.c_str(), "rb");
    if (f == nullptr) throw Error("cannot open " + path);
    std::string text;
    char buf[1 << 16];
    int n = 0;
    while ((n = gzread(f, buf, sizeof buf)) > 0) text.append(buf, static_cast<std::size_t>(n));
    gzclose(f);
    EventLog log;
    std::istringstream in(text);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (header) {
            header = false;
            continue;
        }
        if (!line.empty()) log.push_back(parse_event(line));
    }
    return log;
}

} // namespace shuttleflow

#endif // SHUTTLEFLOW_EVENTS_HPP
