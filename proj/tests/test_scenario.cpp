#include "fixtures.hpp"

#include <shuttleflow/scenario.hpp>

#include <gtest/gtest.h>

#include <filesystem>

#include <unistd.h>

using namespace shuttleflow;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("shuttleflow_test_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// Mini city on disk, read back through the config path.
struct MiniMatrix {
    fs::path dir;
    MatrixConfig cfg;
    ScenarioInputs inputs;
};

const MiniMatrix& mini_matrix() {
    static const MiniMatrix m = [] {
        MiniMatrix out;
        out.dir = scratch("matrix");
        write_city(fixtures::mini_city(), out.dir, 1);
        const auto path = (out.dir / "matrix.toml").string();
        out.cfg = MatrixConfig::from_config(Config::parse(io::read_file(path), path), out.dir);
        out.inputs = load_inputs(out.cfg);
        return out;
    }();
    return m;
}

const MatrixResult& base_row() {
    static const MatrixResult r = [] {
        const auto& m = mini_matrix();
        auto scenarios = build_matrix(m.cfg);
        scenarios.resize(4); // Base2011 x {None, Center, City, Metro}
        auto cfg = m.cfg;
        cfg.reduction_scenarios.clear();
        return run_matrix(scenarios, m.inputs, cfg, 4, false);
    }();
    return r;
}

const ScenarioOutcome& outcome(const std::string& name) {
    for (const auto& o : base_row().outcomes) {
        if (o.scenario.name == name) return o;
    }
    throw std::runtime_error("no outcome " + name);
}

} // namespace

TEST(BuildMatrix, TwelveScenarios) {
    const auto& m = mini_matrix();
    const auto s = build_matrix(m.cfg);
    ASSERT_EQ(s.size(), 12u);
    EXPECT_EQ(s.front().name, "SC1.0");
    EXPECT_EQ(s[5].name, "SC2.1");
    EXPECT_EQ(s.back().name, "SC3.3");
    EXPECT_EQ(s[5].baseline, "SC2.0");
    EXPECT_EQ(s[5].demand, "Low2050");
    EXPECT_EQ(s[5].zone, std::optional<std::string>("center"));
    EXPECT_FALSE(s[4].zone);
    EXPECT_EQ(s[4].population_seed, s[7].population_seed);
    EXPECT_NE(s[4].population_seed, s[0].population_seed);
    EXPECT_NE(s[4].seed, s[5].seed);
    EXPECT_NEAR(s[5].multiplier, demand_multiplier(fixtures::mini_city().low2050), 1e-12);
    EXPECT_GT(s[9].multiplier, s[5].multiplier);
}

TEST(BuildMatrix, Singleton) {
    MatrixConfig cfg;
    const auto s = build_matrix(cfg);
    ASSERT_EQ(s.size(), 1u);
    EXPECT_EQ(s[0].name, "SC1.0");
    EXPECT_EQ(s[0].baseline, "SC1.0");
}

TEST(BuildMatrix, Errors) {
    MatrixConfig cfg;
    cfg.areas = {{"None", std::nullopt}, {"None", std::nullopt}};
    EXPECT_THROW(build_matrix(cfg), Error);
    cfg.areas = {{"None", std::nullopt}};
    cfg.demands = {{"A", 1.0, std::nullopt}, {"A", 1.1, std::nullopt}};
    EXPECT_THROW(build_matrix(cfg), Error);
    cfg.demands = {{"A", 1.0, std::nullopt}};
    cfg.areas = {{"None", std::nullopt}, {"City", "city"}};
    cfg.zones_path = "/nonexistent/zones.json";
    EXPECT_THROW(build_matrix(cfg), Error);
}

TEST(MatrixConfig, ParsesKeys) {
    const auto text = R"(
seed = 9
areas = ["None", "Core"]
area.Core.zone = "core"
[demand]
levels = ["Now", "Later"]
Later.multiplier = 1.25
[sav]
capacity = 6
fixed_fleet = 12
max_pickup_delay_s = 450
[sim]
walk_speed = 1.2
[sustain]
av_efficiency = 0.8
accounting = "analytic"
car_mix.gasoline = 0.5
car_mix.diesel = 0.5
car_mix.hev = 0.0
car_mix.lpg = 0.0
daily_km.car_ice = 40
[fleet_reduction]
fractions = [0.2, 0.5]
scenarios = ["SC1.1"]
[events]
gzip = true
)";
    const auto m = MatrixConfig::from_config(Config::parse(text), "/data");
    EXPECT_EQ(m.seed, 9u);
    EXPECT_EQ(m.nodes_path, "/data/nodes.csv");
    ASSERT_EQ(m.areas.size(), 2u);
    EXPECT_EQ(m.areas[1].zone, std::optional<std::string>("core"));
    ASSERT_EQ(m.demands.size(), 2u);
    EXPECT_DOUBLE_EQ(m.demands[0].multiplier, 1.0);
    EXPECT_DOUBLE_EQ(m.demands[1].multiplier, 1.25);
    EXPECT_EQ(m.fleet.capacity, 6);
    EXPECT_EQ(m.fleet.fixed_fleet, std::optional<std::int64_t>(12));
    EXPECT_DOUBLE_EQ(m.fleet.max_pickup_delay, 450.0);
    EXPECT_DOUBLE_EQ(m.engine.walk_speed, 1.2);
    EXPECT_DOUBLE_EQ(m.factors.av_efficiency, 0.8);
    EXPECT_EQ(m.accounting, Accounting::Analytic);
    EXPECT_DOUBLE_EQ(m.car_mix.share(Powertrain::Diesel), 0.5);
    EXPECT_DOUBLE_EQ(m.factors.nondriving.at("car_ice").daily_km, 40.0);
    EXPECT_EQ(m.reduction_fractions, (std::vector<double>{0.2, 0.5}));
    EXPECT_EQ(m.reduction_scenarios, std::vector<std::string>{"SC1.1"});
    EXPECT_TRUE(m.gzip_events);
}

TEST(MatrixConfig, RejectsBadValues) {
    EXPECT_THROW(MatrixConfig::from_config(Config::parse("[sav]\ncapacity = 0\n")), Error);
    EXPECT_THROW(MatrixConfig::from_config(Config::parse("[sav]\ncapacity = \"four\"\n")), Error);
    EXPECT_THROW(MatrixConfig::from_config(Config::parse("[sustain]\naccounting = \"guess\"\n")), Error);
    EXPECT_THROW(MatrixConfig::from_config(Config::parse("[sustain]\ncar_mix.gasoline = 0.5\n")), Error);
    EXPECT_THROW(Config::parse("seed = = 1\n"), Error);
}

TEST(MatrixConfig, DefaultTextRoundTrips) {
    const auto m = MatrixConfig::from_config(Config::parse(default_config_text()));
    const MatrixConfig d;
    EXPECT_EQ(m.seed, d.seed);
    EXPECT_EQ(m.fleet.capacity, d.fleet.capacity);
    EXPECT_DOUBLE_EQ(m.fleet.max_detour_factor, d.fleet.max_detour_factor);
    EXPECT_DOUBLE_EQ(m.factors.av_efficiency, d.factors.av_efficiency);
    EXPECT_EQ(m.car_mix, d.car_mix);
    for (const auto& [type, c] : d.factors.nondriving) EXPECT_DOUBLE_EQ(m.factors.nondriving.at(type).daily_km, c.daily_km);
}

TEST(RunMatrix, BaselineNeedsNoFleet) {
    const auto& o = outcome("SC1.0");
    ASSERT_TRUE(o.ok) << o.error;
    EXPECT_EQ(o.required_fleet, 0u);
    EXPECT_EQ(o.vkt.km(Mode::Sav), 0.0);
    EXPECT_EQ(o.trips.depart, o.trips.arrive + o.trips.stuck);
}

TEST(RunMatrix, MetroBanRemovesCars) {
    const auto& o = outcome("SC1.3");
    ASSERT_TRUE(o.ok) << o.error;
    EXPECT_EQ(o.vkt.km(Mode::Car), 0.0);
    EXPECT_GT(o.required_fleet, 0u);
}

TEST(RunMatrix, ShuttleKmGrowWithZone) {
    const double center = outcome("SC1.1").vkt.km(Mode::Sav);
    const double city = outcome("SC1.2").vkt.km(Mode::Sav);
    const double metro = outcome("SC1.3").vkt.km(Mode::Sav);
    EXPECT_GT(center, 0.0);
    EXPECT_LE(center, city);
    EXPECT_LE(city, metro);
}

TEST(RunMatrix, DeltasAgainstBaseline) {
    const auto& base = outcome("SC1.0");
    ASSERT_TRUE(base.perspectives.at(0).lifecycle.deltas);
    EXPECT_DOUBLE_EQ(base.perspectives[0].lifecycle.deltas->total_pct, 0.0);
    const auto& city = outcome("SC1.2");
    const auto& lc = city.perspectives.at(0).lifecycle;
    ASSERT_TRUE(lc.deltas);
    EXPECT_NEAR(lc.deltas->driving_pct, percent_delta(lc.driving_kg, base.perspectives[0].lifecycle.driving_kg), 1e-9);
    EXPECT_EQ(city.perspectives.at(1).name, "electric");
    EXPECT_LT(city.perspectives[1].lifecycle.driving_kg, lc.driving_kg);
}

TEST(RunMatrix, ParallelismDoesNotChangeResults) {
    const auto& m = mini_matrix();
    auto scenarios = build_matrix(m.cfg);
    scenarios.resize(4);
    auto cfg = m.cfg;
    cfg.reduction_scenarios.clear();
    const auto serial = run_matrix(scenarios, m.inputs, cfg, 1, false);
    ASSERT_EQ(serial.summaries.size(), base_row().summaries.size());
    for (std::size_t i = 0; i < serial.summaries.size(); ++i) EXPECT_EQ(serial.summaries[i], base_row().summaries[i]);
}

TEST(RunMatrix, FailureIsIsolated) {
    const auto& m = mini_matrix();
    auto scenarios = build_matrix(m.cfg);
    scenarios.resize(2);
    scenarios[1].zone = "nowhere";
    auto cfg = m.cfg;
    cfg.reduction_scenarios.clear();
    const auto r = run_matrix(scenarios, m.inputs, cfg, 2, false);
    EXPECT_TRUE(r.outcomes[0].ok);
    EXPECT_FALSE(r.outcomes[1].ok);
    EXPECT_NE(r.outcomes[1].error.find("nowhere"), std::string::npos);
    const auto cmp = build_comparison(r.summaries);
    EXPECT_NE(cmp.csv.find("SC1.1,SC1.0,"), std::string::npos);
    EXPECT_NE(cmp.csv.find(",error\n"), std::string::npos);
}

TEST(ReductionScenarios, NamingAndSize) {
    ScenarioOutcome parent;
    parent.scenario.name = "SC1.3";
    parent.scenario.baseline = "SC1.0";
    parent.required_fleet = 52;
    const auto v = reduction_scenarios(parent, {0.2, 0.01});
    ASSERT_EQ(v.size(), 2u);
    EXPECT_EQ(v[0].name, "SC1.3-F20");
    EXPECT_EQ(v[0].fleet.fixed_fleet, std::optional<std::int64_t>(10));
    EXPECT_FALSE(v[0].fleet.spawn_enabled);
    EXPECT_EQ(v[0].baseline, "SC1.0");
    EXPECT_EQ(v[1].fleet.fixed_fleet, std::optional<std::int64_t>(1));
}

TEST(Comparison, ColumnsAndOrder) {
    const auto cmp = build_comparison(base_row().summaries);
    std::istringstream in(cmp.csv);
    std::string header;
    std::getline(in, header);
    const auto columns = std::count(header.begin(), header.end(), ',') + 1;
    EXPECT_EQ(columns, 22);
    std::vector<std::string> names;
    for (std::string line; std::getline(in, line);) {
        EXPECT_EQ(std::count(line.begin(), line.end(), ',') + 1, columns) << line;
        names.push_back(line.substr(0, line.find(',')));
        EXPECT_TRUE(line.ends_with(",ok")) << line;
    }
    EXPECT_EQ(names, (std::vector<std::string>{"SC1.0", "SC1.1", "SC1.2", "SC1.3"}));
    EXPECT_NE(cmp.long_csv.find("SC1.3,car_km,0.000\n"), std::string::npos);
}

TEST(WriteReports, Layout) {
    const auto dir = scratch("reports");
    auto cfg = mini_matrix().cfg;
    write_reports(dir, base_row(), cfg);
    for (const auto* f : {"comparison.csv", "comparison_long.csv", "SC1.2/summary.json", "SC1.2/waiting.csv",
                          "SC1.2/occupancy.csv", "SC1.2/vkt.csv"}) {
        EXPECT_TRUE(fs::exists(dir / f)) << f;
    }
    const auto summary = nlohmann::json::parse(io::read_file((dir / "SC1.2/summary.json").string()));
    EXPECT_EQ(summary.at("scenario"), "SC1.2");
    EXPECT_EQ(summary.at("fleet").at("mode"), "spawn");
    fs::remove_all(dir);
}
