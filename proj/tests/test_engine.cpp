#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <map>

using namespace shuttleflow;
using fixtures::agent;
using fixtures::trip;

namespace {

std::vector<Agent> car_only(const std::vector<Agent>& pop) {
    std::vector<Agent> out;
    for (auto a : pop) {
        for (auto& t : a.trips) t.mode = Mode::Car;
        out.push_back(std::move(a));
    }
    return out;
}

std::vector<Agent> doubled(const std::vector<Agent>& pop) {
    auto out = pop;
    AgentId next = 0;
    for (const auto& a : pop) next = std::max(next, a.id);
    for (auto a : pop) {
        a.id = ++next;
        out.push_back(std::move(a));
    }
    return out;
}

} // namespace

TEST(LinkExitTime, FreeFlow) {
    const auto l = fixtures::make_link(1, 1, 2, 1000, 10, 3600);
    LinkState s;
    EXPECT_DOUBLE_EQ(link_exit_time(l, 0.0, s), 100.0);
}

TEST(LinkExitTime, Headway) {
    const auto l = fixtures::make_link(1, 1, 2, 1000, 10, 3600);
    LinkState s;
    const double a = link_exit_time(l, 0.0, s);
    const double b = link_exit_time(l, 0.0, s);
    const double c = link_exit_time(l, 0.0, s);
    EXPECT_DOUBLE_EQ(b - a, 1.0);
    EXPECT_GE(c, std::max(a, b));
    EXPECT_DOUBLE_EQ(link_exit_time(l, 500.0, s), 600.0);
}

TEST(Run, WalkClosedForm) {
    const auto net = fixtures::line(2);
    const std::vector<Agent> pop{agent(1, {trip(Mode::Walk, {0, 0}, {700, 0}, 100)})};
    const auto log = run(fixtures::sim_input(net, pop));
    ASSERT_EQ(log.size(), 2u);
    EXPECT_EQ(log[1].kind, EventKind::Arrive);
    EXPECT_DOUBLE_EQ(log[1].time, 600.0);
}

TEST(Run, TwoLinkCarTrace) {
    const auto net = fixtures::line(3);
    const std::vector<Agent> pop{agent(1, {trip(Mode::Car, {0, 0}, {2000, 0}, 10)})};
    const auto log = run(fixtures::sim_input(net, pop));
    const std::vector<std::tuple<EventKind, double, std::optional<LinkId>>> expected{
        {EventKind::Depart, 10, std::nullopt}, {EventKind::LinkEnter, 10, 1},  {EventKind::LinkLeave, 110, 1},
        {EventKind::LinkEnter, 110, 3},        {EventKind::LinkLeave, 210, 3}, {EventKind::Arrive, 210, std::nullopt}};
    ASSERT_EQ(log.size(), expected.size());
    for (std::size_t i = 0; i < log.size(); ++i) {
        EXPECT_EQ(log[i].kind, std::get<0>(expected[i])) << i;
        EXPECT_DOUBLE_EQ(log[i].time, std::get<1>(expected[i])) << i;
        EXPECT_EQ(log[i].link, std::get<2>(expected[i])) << i;
    }
}

TEST(Run, BottleneckHeadways) {
    const auto net = fixtures::line(2, 1000, 10, 60);
    std::vector<Agent> pop;
    for (int i = 1; i <= 100; ++i) pop.push_back(agent(i, {trip(Mode::Car, {0, 0}, {1000, 0}, 0)}));
    const auto log = run(fixtures::sim_input(net, pop));
    std::vector<double> leaves;
    std::vector<AgentId> enter_order;
    std::vector<AgentId> leave_order;
    for (const auto& e : log) {
        if (e.kind == EventKind::LinkLeave) {
            leaves.push_back(e.time);
            leave_order.push_back(e.subject.id);
        }
        if (e.kind == EventKind::LinkEnter) enter_order.push_back(e.subject.id);
    }
    ASSERT_EQ(leaves.size(), 100u);
    EXPECT_NEAR(leaves.back() - leaves.front(), 99 * 60.0, 1e-6);
    for (std::size_t i = 1; i < leaves.size(); ++i) EXPECT_NEAR(leaves[i] - leaves[i - 1], 60.0, 1e-9);
    EXPECT_EQ(enter_order, leave_order);
}

TEST(Run, UnroutableCarIsStuck) {
    const auto net = build_network({{1, {0, 0}}, {2, {100, 0}}, {3, {5000, 0}}, {4, {5100, 0}}},
                                   {fixtures::make_link(1, 1, 2, 100), fixtures::make_link(2, 3, 4, 100)});
    const std::vector<Agent> pop{
        agent(1, {trip(Mode::Car, {0, 0}, {5100, 0}, 0), trip(Mode::Walk, {5100, 0}, {5000, 0}, 50)})};
    const auto log = run(fixtures::sim_input(net, pop));
    ASSERT_GE(log.size(), 2u);
    EXPECT_EQ(log[1].kind, EventKind::StuckAgent);
    EXPECT_EQ(log.back().kind, EventKind::Arrive); // the plan continues
}

TEST(Run, Conservation) {
    const auto& city = fixtures::mini_city();
    const auto pop = apply_ban_to_plans(city.population, std::span(city.zones).subspan(1, 1));
    const std::vector<Zone> zones{city.zones[1]};
    const auto result = Simulation(fixtures::sim_input(city.network, pop, zones, 3)).run();
    std::map<AgentId, int> open;
    std::size_t enters = 0;
    std::size_t leaves = 0;
    std::size_t trips = 0;
    for (const auto& a : pop) trips += a.trips.size();
    std::size_t departs = 0;
    double prev = 0;
    for (const auto& e : result.log) {
        EXPECT_GE(e.time, prev);
        prev = e.time;
        if (e.subject.kind != SubjectKind::Agent) continue;
        switch (e.kind) {
        case EventKind::Depart: ++open[e.subject.id]; ++departs; break;
        case EventKind::Arrive:
        case EventKind::StuckAgent: --open[e.subject.id]; break;
        case EventKind::LinkEnter: ++enters; break;
        case EventKind::LinkLeave: ++leaves; break;
        default: break;
        }
    }
    EXPECT_EQ(departs, trips);
    for (const auto& [id, n] : open) EXPECT_EQ(n, 0) << "agent " << id;
    EXPECT_EQ(enters, leaves);
}

TEST(Run, Deterministic) {
    const auto& city = fixtures::mini_city();
    const std::vector<Zone> zones{city.zones[0]};
    const auto pop = apply_ban_to_plans(city.population, zones);
    const auto a = run(fixtures::sim_input(city.network, pop, zones, 5));
    const auto b = run(fixtures::sim_input(city.network, pop, zones, 5));
    EXPECT_EQ(a, b);
}

TEST(HourlyLinkVolumes, Counting) {
    EXPECT_TRUE(hourly_link_volumes({}).empty());
    EventLog log;
    for (double t : {8 * 3600.0, 8 * 3600.0 + 10, 9 * 3600.0 - 1}) log.push_back({t, EventKind::LinkEnter, agent_subject(1), 7});
    log.push_back({9 * 3600.0, EventKind::LinkEnter, agent_subject(1), 7});
    const auto v = hourly_link_volumes(log);
    EXPECT_EQ(v.at({7, 8}), 3u);
    EXPECT_EQ(v.at({7, 9}), 1u);
}

TEST(HourlyLinkVolumes, DoubledDemandDoublesLinkTotals) {
    const auto& city = fixtures::mini_city();
    const auto base = car_only(city.population);
    const auto twice = doubled(base);
    const auto v1 = hourly_link_volumes(run(fixtures::sim_input(city.network, base)));
    const auto v2 = hourly_link_volumes(run(fixtures::sim_input(city.network, twice)));
    std::map<LinkId, std::size_t> t1;
    std::map<LinkId, std::size_t> t2;
    for (const auto& [k, n] : v1) t1[k.first] += n;
    for (const auto& [k, n] : v2) t2[k.first] += n;
    EXPECT_EQ(t1.size(), t2.size());
    for (const auto& [l, n] : t1) EXPECT_EQ(t2[l], 2 * n) << "link " << l;
}

TEST(Run, CongestionRaisesTravelTime) {
    const auto& city = fixtures::mini_city();
    const auto base = car_only(city.population);
    const auto twice = doubled(base);
    const auto mean_trip = [](const EventLog& log) {
        std::map<AgentId, double> start;
        double sum = 0;
        std::size_t n = 0;
        for (const auto& e : log) {
            if (e.kind == EventKind::Depart) start[e.subject.id] = e.time;
            if (e.kind == EventKind::Arrive) {
                sum += e.time - start[e.subject.id];
                ++n;
            }
        }
        return sum / static_cast<double>(n);
    };
    EXPECT_GT(mean_trip(run(fixtures::sim_input(city.network, twice))),
              mean_trip(run(fixtures::sim_input(city.network, base))));
}
