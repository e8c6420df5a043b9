#include <doctest.h>

#include <cmath>

#include "linestab/simulator.hpp"
#include "linestab/stability.hpp"

using namespace linestab;
using namespace linestab::sim;

namespace {

SimConfig base_config(std::size_t n, FlowModel model, double rate, double horizon, std::uint64_t seed = 1) {
    SimConfig c;
    c.network = NetworkConfig{n, 1.0, 0.1};
    c.fairness = FairnessSpec{1.0};
    c.model = model;
    c.arrival_rate = rate;
    c.horizon = horizon;
    c.seed = seed;
    c.sample_interval = horizon / 200;
    return c;
}

}  // namespace

TEST_CASE("config validation") {
    auto c = base_config(3, FlowModel::LinDist, 0.1, 10.0);
    c.horizon = 0.0;
    CHECK_THROWS_AS(simulate(c), std::domain_error);
    c = base_config(3, FlowModel::LinDist, -1.0, 10.0);
    CHECK_THROWS_AS(simulate(c), std::domain_error);
}

TEST_CASE("zero arrival rate leaves the network empty") {
    const auto rep = simulate(base_config(4, FlowModel::Distflow, 0.0, 100.0));
    CHECK(rep.events == 0);
    CHECK(rep.max_total_queue == 0);
    CHECK(rep.mean_total_queue == 0.0);
    for (auto q : rep.total_queue) CHECK(q == 0);
}

TEST_CASE("single station behaves as an M/M/1 queue") {
    // N = 1: the full budget goes to the only busy station, so the service rate is B / (2r).
    const NetworkConfig net{1, 1.0, 0.1};
    const double mu = net.squared_budget() / (2 * net.resistance);
    const double lambda = 0.5 * mu;
    auto c = base_config(1, FlowModel::LinDist, lambda, 4e5 / lambda, 77);
    c.network = net;
    const auto rep = simulate(c);
    const double expected = lambda / (mu - lambda);
    CHECK(std::fabs(rep.mean_total_queue - expected) < 0.25 * expected);
}

TEST_CASE("same seed gives identical reports") {
    for (FlowModel m : {FlowModel::LinDist, FlowModel::Distflow}) {
        const auto c = base_config(3, m, 0.01, 2000.0, 5);
        const auto a = simulate(c);
        const auto b = simulate(c);
        CHECK(a.events == b.events);
        CHECK(a.total_queue == b.total_queue);
        CHECK(a.time_grid == b.time_grid);
        CHECK(a.mean_total_queue == b.mean_total_queue);
        CHECK(a.drift_estimate == b.drift_estimate);
        const auto d = simulate(base_config(3, m, 0.01, 2000.0, 6));
        CHECK(d.total_queue != a.total_queue);
    }
}

TEST_CASE("arrivals minus departures equals the final queue") {
    for (FlowModel m : {FlowModel::LinDist, FlowModel::Distflow}) {
        const auto rep = simulate(base_config(4, m, 0.01, 5000.0, 11));
        CHECK(rep.events == rep.arrivals + rep.departures);
        CHECK(static_cast<std::int64_t>(rep.arrivals) - static_cast<std::int64_t>(rep.departures) ==
              rep.final_total_queue);
        CHECK(rep.total_queue.back() >= 0);
    }
}

TEST_CASE("allocations stay feasible along a trajectory") {
    for (FlowModel m : {FlowModel::LinDist, FlowModel::Distflow}) {
        auto c = base_config(4, m, 0.01, 3000.0, 3);
        c.track_slack = true;
        const auto rep = simulate(c);
        CHECK_FALSE(rep.aborted);
        CHECK(rep.min_slack >= -1e-9);
    }
}

TEST_CASE("higher load gives longer queues on common seeds") {
    const NetworkConfig net{3, 1.0, 0.1};
    const double lam = stability::lambda_lin(net);
    double prev = -1.0;
    for (double mult : {0.2, 0.5, 0.8}) {
        double total = 0.0;
        for (std::uint64_t s = 0; s < 4; ++s) {
            auto c = base_config(3, FlowModel::LinDist, mult * lam, 2e4 / (3 * lam), 100 + s);
            total += simulate(c).mean_total_queue;
        }
        CHECK(total > prev);
        prev = total;
    }
}

TEST_CASE("least-squares slope") {
    CHECK(fit_slope({0, 1, 2, 3}, {1, 3, 5, 7}) == doctest::Approx(2.0));
    CHECK(fit_slope({0, 1, 2}, {4, 4, 4}) == doctest::Approx(0.0));
}

TEST_CASE("stability probe separates light from heavy load") {
    SimConfig c = base_config(3, FlowModel::LinDist, 0.0, 1.0, 2024);
    c.arrival_rate = stability::lambda_lin(c.network);
    ProbeOptions opts;
    opts.events_target = 3e4;
    const auto res = stability_probe(c, {0.5, 2.0}, opts);
    REQUIRE(res.size() == 2);
    CHECK(res[0].verdict == Verdict::Stable);
    CHECK(res[1].verdict == Verdict::Unstable);
    CHECK(res[0].replications.size() == 5);
    CHECK(res[1].drift_threshold == doctest::Approx(0.05 * 3 * 2 * c.arrival_rate));
}
