#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "linestab/powerflow.hpp"
#include "linestab/specfun.hpp"
#include "linestab/stability.hpp"
#include "oracles.hpp"

using namespace linestab;
using namespace linestab::stability;

TEST_CASE("lambda_lin") {
    CHECK(std::fabs(lambda_lin({10, 1.0, 0.05}) - 9.821203727020902e-4) < 1e-15);
    CHECK(lambda_lin({10, 1.0, 1e-9}) < 1e-10);
    CHECK(lambda_lin({10, 2.0, 0.05}) == doctest::Approx(lambda_lin({10, 1.0, 0.05}) / 2).epsilon(1e-15));
    CHECK_THROWS_AS(lambda_lin({10, 1.0, 0.6}), std::domain_error);
}

TEST_CASE("critical rates") {
    CHECK(std::fabs(lambda_lin_critical(1.0, 0.05) - 0.10803324099722992) < 1e-12);
    CHECK(lambda_lin_critical(1.0, 0.5) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(lambda_lin_critical(2.0, 0.2) == doctest::Approx(lambda_lin_critical(1.0, 0.2) / 2).epsilon(1e-15));
    for (std::size_t n : {10u, 100u, 1000u}) {
        const double nd = static_cast<double>(n);
        const double lc = lambda_lin_critical(1.0, 0.1);
        CHECK(std::fabs(nd * nd * lambda_lin({n, 1.0, 0.1}) - lc) <= lc / nd);
    }

    CHECK(lambda_dist_critical(1.0, 1e-10) < 1e-9);
    // quadrature oracle: (pi/2) erfi(s)^2 with s = sqrt(ln(1/0.95))
    const double e = oracle::erfi(std::sqrt(std::log(1 / 0.95)));
    CHECK(std::fabs(lambda_dist_critical(1.0, 0.05) - std::numbers::pi / 2 * e * e) < 1e-13);
    CHECK(std::fabs(lambda_dist_critical(1.0, 0.05) - 0.106179) < 1e-5);
    const double finv = specfun::f0_inverse(1 / 0.95);
    CHECK(std::fabs(lambda_dist_critical(1.0, 0.05) - finv * finv) < 1e-12);
}

TEST_CASE("Newton recovery of a") {
    const double t1 = powerflow::distflow_sensitivity(0.01, 10).v_n;
    CHECK(std::fabs(t1 - 1.005495062463669) < 5e-16);
    const auto tr = newton_solve_a_for_voltage(10, t1);
    CHECK(tr.converged);
    CHECK(std::fabs(tr.a_final - 0.01) < 1e-12 * 0.01);
    CHECK(std::fabs(tr.a0 - 0.011000182805825) < 1e-12);
    CHECK(tr.iterations <= 3 + 3);
    CHECK(tr.iterations == static_cast<int>(tr.iterates.size()) - 1);
    CHECK(std::fabs(tr.residuals.back()) < 1e-12);
    CHECK(tr.damped_steps == 0);

    const double t2 = powerflow::distflow_sensitivity(0.1, 10000).v_n;
    CHECK(std::fabs(t2 - 1.049597671662610) < 1e-15);
    const auto tr2 = newton_solve_a_for_voltage(10000, t2);
    CHECK(std::fabs(tr2.a_final / 0.1 - 1) < 1e-10);

    // Delta overload
    const auto tr3 = newton_solve_a(50, 0.1);
    CHECK(std::fabs(powerflow::distflow_sensitivity(tr3.a_final, 50).v_n - 1 / 0.9) < 1e-12);

    CHECK_THROWS_AS(newton_solve_a(1, 0.1), std::domain_error);
    CHECK_THROWS_AS(newton_solve_a(10, 0.7), std::domain_error);
}

TEST_CASE("Newton reports failure with its trace") {
    const double target = powerflow::distflow_sensitivity(0.05, 100).v_n;
    try {
        newton_solve_a_for_voltage(100, target, {1e-30, 2});
        FAIL("expected NewtonError");
    } catch (const NewtonError& e) {
        CHECK_FALSE(e.trace().converged);
        CHECK(e.trace().iterates.size() == 3);
    }
}

TEST_CASE("property: Newton self-consistency and Y positivity along iterates") {
    for (double a : {0.01, 0.05, 0.1}) {
        for (std::size_t n : {10u, 100u, 1000u, 10000u, 100000u}) {
            const double target = powerflow::distflow_sensitivity(a, n).v_n;
            const auto tr = newton_solve_a_for_voltage(n, target);
            CHECK(tr.converged);
            CHECK(std::fabs(tr.a_final / a - 1) < 1e-9);
            for (double it : tr.iterates) {
                CHECK(it > 0.0);
                CHECK(it < powerflow::sensitivity_a_limit(n));
                CHECK(powerflow::distflow_sensitivity(it, n).y_n > 0.0);
            }
        }
    }
}

TEST_CASE("lambda_dist") {
    const double target = 1.005495062463669;
    const double delta = 1 - 1 / target;
    const NetworkConfig cfg{10, 1.0, delta};
    CHECK(std::fabs(lambda_dist(cfg) - 1e-4) < 1e-12);
    const auto f = powerflow::feasible(PowerAllocation::uniform(10, lambda_dist(cfg)), cfg, FlowModel::Distflow);
    CHECK(std::fabs(f.slack) < 1e-10);

    const NetworkConfig c2{10, 1.0, 0.2};
    CHECK(lambda_dist(c2) < lambda_lin(c2));

    const NetworkConfig single{1, 2.0, 0.1};
    CHECK(std::fabs(powerflow::distflow_voltages(PowerAllocation::uniform(1, lambda_dist(single)), 2.0).end_voltage() -
                    1 / 0.9) < 1e-15);
}

TEST_CASE("property: scaled Distflow threshold converges to the critical rate") {
    for (double delta : {0.05, 0.2}) {
        const double target = lambda_dist_critical(1.0, delta);
        double prev_gap = 0.0;
        double prev = 0.0;
        for (std::size_t n : {10u, 100u, 1000u, 10000u}) {
            const double nd = static_cast<double>(n);
            const double scaled = nd * nd * lambda_dist({n, 1.0, delta});
            const double gap = std::fabs(scaled - target);
            if (n > 10) {
                CHECK(scaled > prev);  // increases towards the limit
                CHECK(gap < prev_gap / 5);
                CHECK(gap > prev_gap / 20);
            }
            prev = scaled;
            prev_gap = gap;
        }
    }
}

TEST_CASE("property: Distflow threshold sits below the LinDist threshold") {
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<std::size_t> size(1, 200);
    std::uniform_real_distribution<double> deltas(0.005, 0.5);
    std::uniform_real_distribution<double> res(0.1, 5.0);
    for (int i = 0; i < 200; ++i) {
        const NetworkConfig cfg{size(rng), res(rng), deltas(rng)};
        CHECK(lambda_dist(cfg) < lambda_lin(cfg));
    }
}

TEST_CASE("ratio P") {
    CHECK(std::fabs(ratio_P(0.05) - 0.9828) < 5e-5);
    CHECK(std::fabs(ratio_P(0.2) - 0.9248) < 5e-5);
    const double e = oracle::erfi(std::sqrt(std::log(2.0)));
    CHECK(std::fabs(ratio_P(0.5) - std::numbers::pi / 6 * e * e) < 1e-12);
    CHECK(std::fabs(ratio_P(0.5) - 0.7668643839751130) < 1e-4);
    CHECK_THROWS_AS(ratio_P(0.0), std::domain_error);
    CHECK_THROWS_AS(ratio_P(0.51), std::domain_error);
}

TEST_CASE("property: P is strictly decreasing and equals the critical-rate ratio") {
    double prev = ratio_P(0.001);
    for (int i = 1; i < 500; ++i) {
        const double d = 0.001 + (0.5 - 0.001) * i / 499.0;
        const double p = ratio_P(d);
        CHECK(p < prev);
        prev = p;
    }
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> deltas(0.001, 0.5);
    std::uniform_real_distribution<double> res(0.1, 10.0);
    for (int i = 0; i < 200; ++i) {
        const double d = deltas(rng), r = res(rng);
        CHECK(std::fabs(ratio_P(d) - lambda_dist_critical(r, d) / lambda_lin_critical(r, d)) < 1e-12);
    }
}

TEST_CASE("continuum voltage") {
    CHECK(continuum_voltage(0.7, 0.0) == 1.0);
    CHECK(std::fabs(continuum_voltage(0.05, 1.0) - 1.02489702) < 1e-7);
    CHECK_THROWS_AS(continuum_voltage(0.1, 1.5), std::domain_error);
    CHECK_THROWS_AS(continuum_voltage(-0.1, 0.5), std::domain_error);

    // V(t) = 1 + a int_0^t int_0^x dy / V(y) dx = 1 + a int_0^t (t - y) / V(y) dy
    const double a = 1.0, t = 0.7;
    double err = 0.0;
    const double integral = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        [&](double y) { return (t - y) / continuum_voltage(a, y); }, 0.0, t, 15, 1e-14, &err);
    CHECK(std::fabs(continuum_voltage(a, t) - (1 + a * integral)) < 1e-8);
}

TEST_CASE("convergence report") {
    const auto rows = convergence_report(0.05, {10, 100, 1000, 10000, 100000});
    REQUIRE(rows.size() == 5);
    CHECK(std::fabs(rows[0].v_discrete - 1.02737778) < 1e-7);
    CHECK(std::fabs(rows[0].abs_err - 0.00248075) < 1e-7);
    // Self-consistent values; the printed table lists relative errors in
    // this column for N >= 100 (mpmath: 2.47953e-5, 2.47955e-6).
    CHECK(std::fabs(rows[2].abs_err - 2.4795340e-5) < 1e-10);
    CHECK(std::fabs(rows[3].abs_err - 2.4795517e-6) < 1e-10);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].rel_err == doctest::Approx(rows[i].abs_err / rows[i].v_discrete).epsilon(1e-15));
        if (i) CHECK(rows[i].abs_err < rows[i - 1].abs_err);
    }
    for (const auto& row : convergence_report(0.0, {2, 10, 1000})) {
        CHECK(row.abs_err == 0.0);
        CHECK(row.rel_err == 0.0);
    }
}
