#include "linestab/powerflow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace linestab {

const char* to_string(FlowModel model) {
    return model == FlowModel::Distflow ? "distflow" : "lindist";
}

FlowModel parse_flow_model(const std::string& name) {
    if (name == "distflow") return FlowModel::Distflow;
    if (name == "lindist") return FlowModel::LinDist;
    throw std::domain_error("unknown flow model '" + name + "' (expected distflow or lindist)");
}

void validate_delta(double delta) {
    if (!(delta > 0.0 && delta <= 0.5)) {
        throw std::domain_error("delta must lie in (0, 0.5], got " + std::to_string(delta));
    }
}

void NetworkConfig::validate() const {
    if (n_stations < 1) throw std::domain_error("n_stations must be >= 1");
    if (!(resistance > 0.0) || !std::isfinite(resistance)) {
        throw std::domain_error("resistance must be positive and finite");
    }
    validate_delta(delta);
}

double NetworkConfig::squared_budget() const {
    const double b = voltage_bound();
    return b * b - 1.0;
}

PowerAllocation::PowerAllocation(std::vector<double> p) : p_(std::move(p)) {
    for (double value : p_) {
        if (!(value >= 0.0) || !std::isfinite(value)) {
            throw std::domain_error("power allocation entries must be finite and >= 0");
        }
    }
}

PowerAllocation PowerAllocation::uniform(std::size_t n, double value) {
    return PowerAllocation(std::vector<double>(n, value));
}

PowerAllocation PowerAllocation::from_physical_order(std::span<const double> from_root) {
    return PowerAllocation(std::vector<double>(from_root.rbegin(), from_root.rend()));
}

std::vector<double> PowerAllocation::to_physical_order() const {
    return {p_.rbegin(), p_.rend()};
}

double PowerAllocation::total() const {
    return std::accumulate(p_.begin(), p_.end(), 0.0);
}

namespace powerflow {

namespace {

void require_resistance(double r) {
    if (!(r > 0.0) || !std::isfinite(r)) throw std::domain_error("resistance must be positive and finite");
}

void require_nonempty(const PowerAllocation& p) {
    if (p.size() == 0) throw std::domain_error("power allocation must cover at least one station");
}

void fill_w_from_v(VoltageProfile& prof) {
    const std::size_t n = prof.v.size();
    prof.w_diag.resize(n);
    prof.w_off.resize(n - 1);
    for (std::size_t j = 0; j < n; ++j) prof.w_diag[j] = prof.v[j] * prof.v[j];
    for (std::size_t j = 0; j + 1 < n; ++j) prof.w_off[j] = prof.v[j] * prof.v[j + 1];
}

}  // namespace

VoltageProfile distflow_from_root(double v0, const PowerAllocation& p, double r) {
    if (!(v0 > 0.0)) throw std::domain_error("distflow_from_root: v0 must be positive");
    require_resistance(r);
    require_nonempty(p);

    const std::size_t n = p.size();
    VoltageProfile prof;
    prof.v.resize(n + 1);
    prof.v[0] = v0;
    prof.v[1] = v0 + r * p[0] / v0;
    for (std::size_t j = 1; j < n; ++j) {
        prof.v[j + 1] = 2 * prof.v[j] - prof.v[j - 1] + r * p[j] / prof.v[j];
    }
    fill_w_from_v(prof);
    return prof;
}

VoltageProfile distflow_voltages(const PowerAllocation& p, double r) {
    return distflow_from_root(1.0, p, r);
}

VoltageProfile distflow_w_recursion(const PowerAllocation& p, double r) {
    require_resistance(r);
    require_nonempty(p);

    const std::size_t n = p.size();
    VoltageProfile prof;
    prof.w_diag.resize(n + 1);
    prof.w_off.resize(n);
    prof.w_diag[0] = 1.0;
    prof.w_off[0] = 1.0 + r * p[0];
    for (std::size_t j = 1; j <= n; ++j) {
        prof.w_diag[j] = prof.w_off[j - 1] * prof.w_off[j - 1] / prof.w_diag[j - 1];
        if (j < n) prof.w_off[j] = 2 * prof.w_diag[j] - prof.w_off[j - 1] + r * p[j];
    }
    return prof;
}

VoltageProfile distflow_double_sum(const PowerAllocation& p, double r) {
    require_resistance(r);
    require_nonempty(p);

    const std::size_t n = p.size();
    VoltageProfile prof;
    prof.v.assign(n + 1, 0.0);
    prof.v[0] = 1.0;
    for (std::size_t j = 1; j <= n; ++j) {
        double outer = 0.0;
        for (std::size_t m = 0; m < j; ++m) {
            double inner = 0.0;
            for (std::size_t i = 0; i <= m; ++i) inner += r * p[i] / prof.v[i];
            outer += inner;
        }
        prof.v[j] = 1.0 + outer;
    }
    fill_w_from_v(prof);
    return prof;
}

LinDistProfile lindist_squared_voltages(const PowerAllocation& p, double r, double delta) {
    require_resistance(r);
    require_nonempty(p);
    validate_delta(delta);

    const std::size_t n = p.size();
    const double bound = 1.0 / (1.0 - delta);

    // downstream[j] = p_0 + ... + p_j, the flow through edge j -> j+1.
    std::vector<double> downstream(n);
    std::partial_sum(p.values().begin(), p.values().end(), downstream.begin());

    LinDistProfile out;
    out.w_diag.assign(n + 1, 0.0);
    out.w_diag[n] = bound * bound;
    for (std::size_t j = n; j-- > 0;) {
        out.w_diag[j] = out.w_diag[j + 1] - 2 * r * downstream[j];
    }
    for (std::size_t m = 0; m < n; ++m) out.weighted_load += static_cast<double>(n - m) * p[m];
    out.physical = out.w_diag[0] >= 0.0;
    return out;
}

double lindist_far_end_double_sum(const PowerAllocation& p, double r, double delta) {
    require_resistance(r);
    require_nonempty(p);
    validate_delta(delta);

    const std::size_t n = p.size();
    const double bound = 1.0 / (1.0 - delta);
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t m = 0; m + j <= n - 1; ++m) sum += p[m];
    }
    return bound * bound - 2 * r * sum;
}

Feasibility feasible(const PowerAllocation& p, const NetworkConfig& cfg, FlowModel model) {
    cfg.validate();
    if (p.size() != cfg.n_stations) {
        throw std::domain_error("allocation length does not match n_stations");
    }
    Feasibility out;
    if (model == FlowModel::Distflow) {
        const double bound = cfg.voltage_bound();
        const double vn = distflow_voltages(p, cfg.resistance).end_voltage();
        out.slack = bound * bound - vn * vn;
    } else {
        out.slack = lindist_squared_voltages(p, cfg.resistance, cfg.delta).far_end() - 1.0;
    }
    out.feasible = out.slack >= 0.0;
    return out;
}

std::vector<double> distflow_gradient(const PowerAllocation& p, double r) {
    require_resistance(r);
    require_nonempty(p);

    const std::size_t n = p.size();
    // Tangents dV_i/dp_j for the two most recent voltages; dV_0/dp = 0.
    std::vector<double> prev(n, 0.0);
    std::vector<double> cur(n, 0.0);
    std::vector<double> next(n, 0.0);
    cur[0] = r;
    double v_prev = 1.0;
    double v_cur = 1.0 + r * p[0];
    for (std::size_t i = 1; i < n; ++i) {
        const double inv = 1.0 / v_cur;
        const double damp = r * p[i] * inv * inv;
        for (std::size_t j = 0; j < n; ++j) {
            next[j] = 2 * cur[j] - prev[j] - damp * cur[j];
        }
        next[i] += r * inv;
        const double v_next = 2 * v_cur - v_prev + r * p[i] * inv;
        v_prev = v_cur;
        v_cur = v_next;
        std::swap(prev, cur);
        std::swap(cur, next);
    }
    return cur;
}

double sensitivity_a_limit(std::size_t n) {
    if (n <= 1) return std::numeric_limits<double>::infinity();
    const double nd = static_cast<double>(n);
    return 2.0 * nd / (nd - 1.0);
}

namespace {

void check_window(double a, std::size_t n) {
    if (!(a >= 0.0 && a < sensitivity_a_limit(n))) {
        throw std::domain_error("distflow_sensitivity: a must lie in [0, 2n/(n-1)), got " + std::to_string(a));
    }
}

template <typename Visit>
Sensitivity run_sensitivity(double a, std::size_t n, Visit&& visit) {
    if (n < 1) throw std::domain_error("distflow_sensitivity: n must be >= 1");
    if (!(a >= 0.0) || !std::isfinite(a)) throw std::domain_error("distflow_sensitivity: a must be >= 0");
    const double nd = static_cast<double>(n);
    const double k = a / (nd * nd);

    double v_prev = 1.0;
    double v = 1.0 + k;
    double y_prev = 0.0;
    double y = 1.0;
    visit(v_prev, y_prev);
    visit(v, y);
    for (std::size_t j = 1; j < n; ++j) {
        const double v_next = 2 * v - v_prev + k / v;
        const double y_next = 2 * y - y_prev + 1.0 / v - k * y / (v * v);
        v_prev = v;
        v = v_next;
        y_prev = y;
        y = y_next;
        visit(v, y);
    }
    return {v, y};
}

}  // namespace

Sensitivity distflow_sensitivity(double a, std::size_t n) {
    check_window(a, n);
    return run_sensitivity(a, n, [](double, double) {});
}

Sensitivity distflow_sensitivity_unbounded(double a, std::size_t n) {
    return run_sensitivity(a, n, [](double, double) {});
}

SensitivityProfile distflow_sensitivity_profile(double a, std::size_t n) {
    check_window(a, n);
    SensitivityProfile out;
    out.v.reserve(n + 1);
    out.y.reserve(n + 1);
    run_sensitivity(a, n, [&](double v, double y) {
        out.v.push_back(v);
        out.y.push_back(y);
    });
    return out;
}

}  // namespace powerflow
}  // namespace linestab
