#include "linestab/stability.hpp"

#include <cmath>
#include <numbers>

#include "linestab/specfun.hpp"

namespace linestab::stability {

double lambda_lin(const NetworkConfig& cfg) {
    cfg.validate();
    const double n = static_cast<double>(cfg.n_stations);
    return cfg.squared_budget() / (cfg.resistance * n * (n + 1.0));
}

double lambda_lin_critical(double r, double delta) {
    NetworkConfig{1, r, delta}.validate();
    const double bound = 1.0 / (1.0 - delta);
    return (bound * bound - 1.0) / r;
}

double lambda_dist_critical(double r, double delta) {
    NetworkConfig{1, r, delta}.validate();
    const double e = specfun::erfi(std::sqrt(std::log(1.0 / (1.0 - delta))));
    return std::numbers::pi / (2.0 * r) * e * e;
}

double continuum_a(double target) {
    if (!(target >= 1.0)) throw std::domain_error("continuum_a: target voltage must be >= 1");
    const double e = specfun::erfi(std::sqrt(std::log(target)));
    return std::numbers::pi / 2.0 * e * e;
}

NewtonTrace newton_solve_a_for_voltage(std::size_t n, double target, const NewtonOptions& opts) {
    if (n < 2) throw std::domain_error("newton_solve_a: n must be >= 2");
    if (!(target > 1.0) || !(target <= 2.0)) {
        throw std::domain_error("newton_solve_a: target voltage must lie in (1, 2]");
    }
    const double nd = static_cast<double>(n);
    const double limit = powerflow::sensitivity_a_limit(n);

    NewtonTrace trace;
    trace.n = n;
    trace.target = target;
    trace.a0 = continuum_a(target);

    double a = trace.a0;
    auto note = [&](double value) {
        trace.iterates.push_back(value);
        if (value >= limit) ++trace.outside_window;
    };
    note(a);
    for (int it = 0; it < opts.max_iter; ++it) {
        const auto s = powerflow::distflow_sensitivity_unbounded(a, n);
        const double residual = s.v_n - target;
        trace.residuals.push_back(residual);
        if (!(s.y_n > 0.0)) {
            throw std::logic_error("newton_solve_a: nonpositive Y_N at a = " + std::to_string(a));
        }
        double step = residual / (s.y_n / (nd * nd));
        double next = a - step;
        while (!(next > 0.0)) {
            step *= 0.5;
            next = a - step;
            ++trace.damped_steps;
        }
        note(next);
        trace.iterations = static_cast<int>(trace.iterates.size()) - 1;
        const double rel_change = std::fabs(next - a) / a;
        a = next;
        if (rel_change < opts.stop_tol) {
            trace.converged = true;
            trace.a_final = a;
            trace.residuals.push_back(powerflow::distflow_sensitivity_unbounded(a, n).v_n - target);
            return trace;
        }
    }
    trace.a_final = a;
    throw NewtonError("newton_solve_a: no convergence within " + std::to_string(opts.max_iter) + " iterations",
                      std::move(trace));
}

NewtonTrace newton_solve_a(std::size_t n, double delta, const NewtonOptions& opts) {
    validate_delta(delta);
    return newton_solve_a_for_voltage(n, 1.0 / (1.0 - delta), opts);
}

double lambda_dist(const NetworkConfig& cfg, const NewtonOptions& opts) {
    cfg.validate();
    if (cfg.n_stations == 1) {
        // V_1 = 1 + r lambda
        return (cfg.voltage_bound() - 1.0) / cfg.resistance;
    }
    const double n = static_cast<double>(cfg.n_stations);
    const auto trace = newton_solve_a(cfg.n_stations, cfg.delta, opts);
    return trace.a_final / (cfg.resistance * n * n);
}

double lambda_threshold(const NetworkConfig& cfg, FlowModel model) {
    return model == FlowModel::Distflow ? lambda_dist(cfg) : lambda_lin(cfg);
}

double ratio_P(double delta) {
    validate_delta(delta);
    // int_0^s exp(u^2) du = (sqrt(pi)/2) erfi(s)
    const double s = std::sqrt(std::log(1.0 / (1.0 - delta)));
    const double integral = 0.5 * std::sqrt(std::numbers::pi) * specfun::erfi(s);
    const double one_minus = 1.0 - delta;
    return 2.0 * one_minus * one_minus * integral * integral / (delta * (2.0 - delta));
}

double continuum_voltage(double a, double t) {
    if (!(a >= 0.0)) throw std::domain_error("continuum_voltage: a must be >= 0");
    if (!(t >= 0.0 && t <= 1.0)) throw std::domain_error("continuum_voltage: t must lie in [0, 1]");
    return specfun::f0(t * std::sqrt(a));
}

std::vector<ConvergenceReport> convergence_report(double a, const std::vector<std::size_t>& n_values) {
    if (!(a >= 0.0)) throw std::domain_error("convergence_report: a must be >= 0");
    const double v1 = continuum_voltage(a, 1.0);
    std::vector<ConvergenceReport> rows;
    rows.reserve(n_values.size());
    for (std::size_t n : n_values) {
        if (n < 2) throw std::domain_error("convergence_report: every N must be >= 2");
        ConvergenceReport row;
        row.n = n;
        row.a = a;
        row.v_discrete = powerflow::distflow_sensitivity(a, n).v_n;
        row.v_continuum = v1;
        row.abs_err = std::fabs(row.v_continuum - row.v_discrete);
        row.rel_err = row.abs_err / row.v_discrete;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace linestab::stability
