#ifndef SHUTTLEFLOW_IO_HPP
#define SHUTTLEFLOW_IO_HPP

#include "demand.hpp"
#include "netgraph.hpp"
#include "sustain.hpp"
#include "types.hpp"

#include <json.hpp>

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

namespace shuttleflow::io {

using json = nlohmann::json;

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << text;
}

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

/// Header-addressed CSV rows. Fields may not contain commas or quotes.
class CsvTable {
public:
    static CsvTable parse(const std::string& text, const std::string& source) {
        CsvTable t;
        t.source_ = source;
        std::istringstream in(text);
        std::string line;
        bool header = true;
        while (std::getline(in, line)) {
            const auto trimmed = trim(line);
            if (trimmed.empty() || trimmed[0] == '#') continue;
            std::vector<std::string> fields;
            std::size_t start = 0;
            while (true) {
                const auto pos = trimmed.find(',', start);
                fields.push_back(trim(trimmed.substr(start, pos == std::string::npos ? std::string::npos : pos - start)));
                if (pos == std::string::npos) break;
                start = pos + 1;
            }
            if (header) {
                for (std::size_t i = 0; i < fields.size(); ++i) t.columns_[fields[i]] = i;
                header = false;
            } else {
                t.rows_.push_back(std::move(fields));
            }
        }
        return t;
    }

    static CsvTable load(const std::string& path) { return parse(read_file(path), path); }

    [[nodiscard]] std::size_t size() const { return rows_.size(); }

    [[nodiscard]] const std::string& get(std::size_t row, const std::string& column) const {
        const auto it = columns_.find(column);
        if (it == columns_.end()) throw Error(source_ + ": missing column '" + column + "'");
        const auto& r = rows_[row];
        if (it->second >= r.size()) throw Error(source_ + ": short row " + std::to_string(row + 2));
        return r[it->second];
    }

    [[nodiscard]] double number(std::size_t row, const std::string& column) const {
        const auto& s = get(row, column);
        try {
            std::size_t used = 0;
            const double v = std::stod(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw Error(source_ + ": bad number '" + s + "' in column '" + column + "'");
        }
    }

    [[nodiscard]] std::int64_t integer(std::size_t row, const std::string& column) const {
        const double v = number(row, column);
        if (v != std::floor(v)) throw Error(source_ + ": expected an integer in column '" + column + "'");
        return static_cast<std::int64_t>(v);
    }

private:
    std::string source_;
    std::unordered_map<std::string, std::size_t> columns_;
    std::vector<std::vector<std::string>> rows_;
};

inline std::string num(double v) {
    std::array<char, 32> buf{};
    const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return {buf.data(), r.ptr};
}

// Network: nodes.csv (id,x,y) and links.csv (id,from,to,length_m,speed_ms,cap_vph,modes).

inline Network parse_network(const std::string& nodes_csv, const std::string& links_csv) {
    const auto nt = CsvTable::parse(nodes_csv, "nodes.csv");
    const auto lt = CsvTable::parse(links_csv, "links.csv");
    std::vector<Node> nodes;
    for (std::size_t i = 0; i < nt.size(); ++i) {
        nodes.push_back({nt.integer(i, "id"), {nt.number(i, "x"), nt.number(i, "y")}});
    }
    std::vector<Link> links;
    for (std::size_t i = 0; i < lt.size(); ++i) {
        Link l;
        l.id = lt.integer(i, "id");
        l.from = lt.integer(i, "from");
        l.to = lt.integer(i, "to");
        l.length = lt.number(i, "length_m");
        l.free_speed = lt.number(i, "speed_ms");
        l.outflow_capacity = lt.number(i, "cap_vph");
        l.allowed_modes = parse_mode_set(lt.get(i, "modes"));
        links.push_back(l);
    }
    return build_network(std::move(nodes), std::move(links));
}

inline Network load_network(const std::string& nodes_path, const std::string& links_path) {
    return parse_network(read_file(nodes_path), read_file(links_path));
}

inline std::string format_nodes(const Network& net) {
    std::string out = "id,x,y\n";
    for (const auto& n : net.nodes()) out += std::to_string(n.id) + "," + num(n.coord.x) + "," + num(n.coord.y) + "\n";
    return out;
}

inline std::string format_links(const Network& net) {
    std::string out = "id,from,to,length_m,speed_ms,cap_vph,modes\n";
    for (const auto& l : net.links()) {
        out += std::to_string(l.id) + "," + std::to_string(l.from) + "," + std::to_string(l.to) + "," + num(l.length) +
               "," + num(l.free_speed) + "," + num(l.outflow_capacity) + "," + format_mode_set(l.allowed_modes) + "\n";
    }
    return out;
}

// Zones: JSON array of {id, banned_modes, polygon: [[x,y],...]}.

inline std::vector<Zone> parse_zones(const std::string& text) {
    const auto doc = json::parse(text);
    if (!doc.is_array()) throw Error("zones file must hold a JSON array");
    std::vector<Zone> zones;
    for (const auto& z : doc) {
        ModeSet banned;
        for (const auto& m : z.at("banned_modes")) banned.insert(parse_mode(m.get<std::string>()));
        std::vector<Coord> poly;
        for (const auto& p : z.at("polygon")) poly.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
        auto id = z.at("id").get<std::string>();
        for (const auto& existing : zones) {
            if (existing.id == id) throw Error("duplicate zone id '" + id + "'");
        }
        zones.push_back(make_zone(std::move(id), std::move(poly), banned));
    }
    return zones;
}

inline std::vector<Zone> load_zones(const std::string& path) { return parse_zones(read_file(path)); }

inline std::string format_zones(const std::vector<Zone>& zones) {
    json doc = json::array();
    for (const auto& z : zones) {
        json banned = json::array();
        for (auto m : kAllModes) {
            if (z.banned_modes.contains(m)) banned.push_back(std::string(to_string(m)));
        }
        json poly = json::array();
        for (const auto& c : z.boundary) poly.push_back({c.x, c.y});
        poly.push_back({z.boundary.front().x, z.boundary.front().y});
        doc.push_back({{"id", z.id}, {"banned_modes", banned}, {"polygon", poly}});
    }
    return doc.dump(2) + "\n";
}

// Population: JSON lines {id, age_group, home:[x,y], trips:[{mode,origin,dest,depart_s}]}.

inline Agent agent_from_json(const json& j) {
    Agent a;
    a.id = j.at("id").get<std::int64_t>();
    a.age_group = j.value("age_group", std::string{});
    a.home = {j.at("home").at(0).get<double>(), j.at("home").at(1).get<double>()};
    for (const auto& t : j.at("trips")) {
        Trip trip;
        trip.mode = parse_mode(t.at("mode").get<std::string>());
        trip.origin = {t.at("origin").at(0).get<double>(), t.at("origin").at(1).get<double>()};
        trip.dest = {t.at("dest").at(0).get<double>(), t.at("dest").at(1).get<double>()};
        trip.depart = t.at("depart_s").get<double>();
        a.trips.push_back(trip);
    }
    validate_agent(a);
    return a;
}

inline json agent_to_json(const Agent& a) {
    json trips = json::array();
    for (const auto& t : a.trips) {
        trips.push_back({{"mode", std::string(to_string(t.mode))},
                         {"origin", {t.origin.x, t.origin.y}},
                         {"dest", {t.dest.x, t.dest.y}},
                         {"depart_s", t.depart}});
    }
    return {{"id", a.id}, {"age_group", a.age_group}, {"home", {a.home.x, a.home.y}}, {"trips", trips}};
}

inline std::vector<Agent> parse_population(const std::string& text) {
    std::vector<Agent> agents;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        try {
            agents.push_back(agent_from_json(json::parse(line)));
        } catch (const json::exception& e) {
            throw Error("population line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return agents;
}

inline std::vector<Agent> load_population(const std::string& path) { return parse_population(read_file(path)); }

inline std::string format_population(const std::vector<Agent>& agents) {
    std::string out;
    for (const auto& a : agents) out += agent_to_json(a).dump() + "\n";
    return out;
}

// Age table: group,base_pop,future_pop,trip_weight.

inline AgeGroupTable parse_age_table(const std::string& text, const std::string& source = "age table") {
    const auto t = CsvTable::parse(text, source);
    AgeGroupTable table;
    for (std::size_t i = 0; i < t.size(); ++i) {
        table.push_back({t.get(i, "group"), t.number(i, "base_pop"), t.number(i, "future_pop"), t.number(i, "trip_weight")});
    }
    return table;
}

inline AgeGroupTable load_age_table(const std::string& path) { return parse_age_table(read_file(path), path); }

inline std::string format_age_table(const AgeGroupTable& table) {
    std::string out = "group,base_pop,future_pop,trip_weight\n";
    for (const auto& g : table) {
        out += g.label + "," + num(g.base_population) + "," + num(g.future_population) + "," + num(g.trip_weight) + "\n";
    }
    return out;
}

// Factors: powertrain,road_class,emis_g_per_km,energy_gge_per_km.

inline void parse_factors_into(FactorSet& f, const std::string& text, const std::string& source = "factors") {
    const auto t = CsvTable::parse(text, source);
    f.emis.clear();
    f.energy.clear();
    for (std::size_t i = 0; i < t.size(); ++i) {
        const auto p = parse_powertrain(t.get(i, "powertrain"));
        const auto c = parse_road_class(t.get(i, "road_class"));
        f.emis[{p, c}] = t.number(i, "emis_g_per_km");
        f.energy[{p, c}] = t.number(i, "energy_gge_per_km");
    }
    f.validate();
}

inline std::string format_factors(const FactorSet& f) {
    std::string out = "powertrain,road_class,emis_g_per_km,energy_gge_per_km\n";
    for (const auto& [key, e] : f.emis) {
        out += std::string(to_string(key.first)) + "," + std::string(to_string(key.second)) + "," + num(e) + "," +
               num(f.energy.at(key)) + "\n";
    }
    return out;
}

// Non-driving: vehicle_type,lifetime_g,lifetime_km. Daily km come from the scenario config.

inline std::map<std::string, NondrivingCoefficient> parse_nondriving(const std::string& text,
                                                                     const std::string& source = "nondriving") {
    const auto t = CsvTable::parse(text, source);
    std::map<std::string, NondrivingCoefficient> out;
    for (std::size_t i = 0; i < t.size(); ++i) {
        NondrivingCoefficient c;
        c.lifetime_g = t.number(i, "lifetime_g");
        c.lifetime_km = t.number(i, "lifetime_km");
        out[t.get(i, "vehicle_type")] = c;
    }
    return out;
}

inline std::string format_nondriving(const std::map<std::string, NondrivingCoefficient>& coeffs) {
    std::string out = "vehicle_type,lifetime_g,lifetime_km\n";
    for (const auto& [type, c] : coeffs) out += type + "," + num(c.lifetime_g) + "," + num(c.lifetime_km) + "\n";
    return out;
}

} // namespace shuttleflow::io

#endif // SHUTTLEFLOW_IO_HPP
