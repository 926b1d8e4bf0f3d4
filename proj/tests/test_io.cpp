#include "fixtures.hpp"

#include <shuttleflow/io.hpp>
#include <shuttleflow/scenario.hpp>

#include <gtest/gtest.h>

#include <filesystem>

#include <unistd.h>

using namespace shuttleflow;
namespace fs = std::filesystem;

namespace {

fs::path scratch_file(const std::string& name) {
    return fs::temp_directory_path() / ("shuttleflow_io_" + std::to_string(::getpid()) + "_" + name);
}

} // namespace

TEST(NetworkIo, RoundTrip) {
    const auto& net = fixtures::mini_city().network;
    const auto back = io::parse_network(io::format_nodes(net), io::format_links(net));
    ASSERT_EQ(back.node_count(), net.node_count());
    ASSERT_EQ(back.link_count(), net.link_count());
    for (std::size_t i = 0; i < net.link_count(); ++i) {
        const auto& a = net.link(i);
        const auto& b = back.link(i);
        EXPECT_EQ(a.id, b.id);
        EXPECT_EQ(a.from, b.from);
        EXPECT_DOUBLE_EQ(a.length, b.length);
        EXPECT_DOUBLE_EQ(a.free_speed, b.free_speed);
        EXPECT_DOUBLE_EQ(a.outflow_capacity, b.outflow_capacity);
        EXPECT_EQ(a.allowed_modes, b.allowed_modes);
    }
}

TEST(NetworkIo, Errors) {
    EXPECT_THROW(io::parse_network("id,x\n1,0\n", "id,from,to,length_m,speed_ms,cap_vph,modes\n"), Error);
    EXPECT_THROW(io::parse_network("id,x,y\n1,0,0\n", "id,from,to,length_m,speed_ms,cap_vph,modes\n1,1,2,10,1,1,car\n"),
                 Error);
    EXPECT_THROW(io::parse_network("id,x,y\n1,zero,0\n", "id,from,to,length_m,speed_ms,cap_vph,modes\n"), Error);
}

TEST(NetworkIo, ModesColumn) {
    const auto net = io::parse_network("id,x,y\n1,0,0\n2,10,0\n",
                                       "id,from,to,length_m,speed_ms,cap_vph,modes\n5,1,2,10,1,600,car|walk\n");
    EXPECT_TRUE(net.link(0).allowed_modes.contains(Mode::Car));
    EXPECT_TRUE(net.link(0).allowed_modes.contains(Mode::Walk));
    EXPECT_FALSE(net.link(0).allowed_modes.contains(Mode::Sav));
}

TEST(ZonesIo, RoundTrip) {
    const auto& zones = fixtures::mini_city().zones;
    const auto back = io::parse_zones(io::format_zones(zones));
    ASSERT_EQ(back.size(), zones.size());
    for (std::size_t i = 0; i < zones.size(); ++i) {
        EXPECT_EQ(back[i].id, zones[i].id);
        EXPECT_EQ(back[i].boundary, zones[i].boundary);
        EXPECT_EQ(back[i].banned_modes, zones[i].banned_modes);
    }
    EXPECT_THROW(io::parse_zones("{}"), Error);
    EXPECT_THROW(io::parse_zones(R"([{"id":"a","banned_modes":["car"],"polygon":[[0,0],[1,0],[1,1]]},
                                     {"id":"a","banned_modes":[],"polygon":[[0,0],[1,0],[1,1]]}])"),
                 Error);
}

TEST(PopulationIo, RoundTrip) {
    const auto& pop = fixtures::mini_city().population;
    EXPECT_EQ(io::parse_population(io::format_population(pop)), pop);
    EXPECT_THROW(io::parse_population("{\"id\":1}\n"), Error);
}

TEST(AgeTableIo, RoundTrip) {
    const auto& t = fixtures::mini_city().high2050;
    const auto back = io::parse_age_table(io::format_age_table(t));
    ASSERT_EQ(back.size(), t.size());
    EXPECT_DOUBLE_EQ(demand_multiplier(back), demand_multiplier(t));
}

TEST(FactorsIo, RoundTrip) {
    const auto f = FactorSet::reference_factors();
    FactorSet g;
    io::parse_factors_into(g, io::format_factors(f));
    EXPECT_EQ(g.emis, f.emis);
    EXPECT_EQ(g.energy, f.energy);
    const auto nd = MatrixConfig::default_nondriving();
    const auto back = io::parse_nondriving(io::format_nondriving(nd));
    for (const auto& [type, c] : nd) {
        EXPECT_DOUBLE_EQ(back.at(type).lifetime_g, c.lifetime_g);
        EXPECT_DOUBLE_EQ(back.at(type).lifetime_km, c.lifetime_km);
    }
}

TEST(EventLogIo, RoundTripPlainAndGzip) {
    const auto& city = fixtures::mini_city();
    const std::vector<Zone> zones{city.zones[0]};
    const auto pop = apply_ban_to_plans(city.population, zones);
    const auto log = run(fixtures::sim_input(city.network, pop, zones, 6));
    ASSERT_FALSE(log.empty());
    for (bool gz : {false, true}) {
        const auto path = scratch_file(gz ? "events.csv.gz" : "events.csv").string();
        write_event_log(path, log, gz);
        const auto back = read_event_log(path);
        ASSERT_EQ(back.size(), log.size());
        for (std::size_t i = 0; i < log.size(); ++i) {
            EXPECT_NEAR(back[i].time, log[i].time, 5e-4);
            EXPECT_EQ(back[i].kind, log[i].kind);
            EXPECT_EQ(back[i].subject, log[i].subject);
            EXPECT_EQ(back[i].link, log[i].link);
            EXPECT_EQ(back[i].mode, log[i].mode);
            EXPECT_EQ(back[i].load, log[i].load);
            EXPECT_EQ(back[i].ref, log[i].ref);
        }
        // Metrics read from the file agree with the in-memory log.
        EXPECT_NEAR(vkt_by_class(back, city.network).total(), vkt_by_class(log, city.network).total(), 1e-9);
        fs::remove(path);
    }
}

TEST(EventLogIo, RejectsMalformedLine) {
    EXPECT_THROW(parse_event("1.0,Depart"), Error);
    EXPECT_THROW(parse_event("1.0,Teleport,agent:1,,0,0,,,"), Error);
}
