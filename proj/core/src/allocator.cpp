#include "linestab/allocator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace linestab {

bool QueueState::empty_network() const {
    return std::all_of(x.begin(), x.end(), [](std::int64_t v) { return v == 0; });
}

std::int64_t QueueState::total() const {
    return std::accumulate(x.begin(), x.end(), std::int64_t{0});
}

void FairnessSpec::validate() const {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw std::domain_error("alpha must be positive and finite");
}

namespace allocator {

namespace {

void check_inputs(const QueueState& x, const FairnessSpec& spec, const NetworkConfig& cfg) {
    cfg.validate();
    spec.validate();
    if (x.size() != cfg.n_stations) throw std::domain_error("queue state length does not match n_stations");
    for (auto v : x.x) {
        if (v < 0) throw std::domain_error("queue lengths must be >= 0");
    }
}

// V_N of the V_0 = 1 recursion at p and its derivative along direction q.
struct Directional {
    double v_n;
    double dv_n;
};

Directional directional(std::span<const double> p, std::span<const double> q, double r) {
    const std::size_t n = p.size();
    double v_prev = 1.0;
    double v = 1.0 + r * p[0];
    double d_prev = 0.0;
    double d = r * q[0];
    for (std::size_t i = 1; i < n; ++i) {
        const double inv = 1.0 / v;
        const double d_next = 2 * d - d_prev + r * q[i] * inv - r * p[i] * d * inv * inv;
        const double v_next = 2 * v - v_prev + r * p[i] * inv;
        v_prev = v;
        v = v_next;
        d_prev = d;
        d = d_next;
    }
    return {v, d};
}

// Scale s > 0 with V_N(s q) = bound, by Newton inside a maintained bracket.
double binding_scale(std::span<const double> q, double r, double bound, double s_guess, const DistflowOptions& opts) {
    const std::size_t n = q.size();
    std::vector<double> p(n);
    auto eval = [&](double s) {
        for (std::size_t i = 0; i < n; ++i) p[i] = s * q[i];
        return directional(p, q, r);
    };

    double lo = 0.0;
    double hi = s_guess > 0.0 ? s_guess : 1.0;
    while (eval(hi).v_n < bound) {
        lo = hi;
        hi *= 2.0;
        if (!std::isfinite(hi)) throw AllocationError("alpha_fair_distflow: cannot bracket the binding scale");
    }
    double s = s_guess > lo && s_guess < hi ? s_guess : 0.5 * (lo + hi);
    // |V_N - bound| below this keeps |bound^2 - V_N^2| well inside tol.
    const double v_tol = 0.01 * opts.tol / (2.0 * bound);
    for (int it = 0; it < opts.max_scale_iter; ++it) {
        const auto [v_n, dv] = eval(s);
        const double h = v_n - bound;
        if (std::fabs(h) <= v_tol) return s;
        if (h < 0.0) lo = s; else hi = s;
        double next = dv > 0.0 ? s - h / dv : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (next == s) return s;
        s = next;
    }
    throw AllocationError("alpha_fair_distflow: binding scale did not converge");
}

}  // namespace

double utility(const QueueState& x, const PowerAllocation& p, const FairnessSpec& spec) {
    spec.validate();
    double total = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        if (x.x[j] == 0) continue;
        const double xj = static_cast<double>(x.x[j]);
        const double rate = p[j] / xj;
        if (spec.alpha == 1.0) {
            total += xj * std::log(rate);
        } else {
            total += xj * std::pow(rate, 1.0 - spec.alpha) / (1.0 - spec.alpha);
        }
    }
    return total;
}

PowerAllocation alpha_fair_lindist(const QueueState& x, const FairnessSpec& spec, const NetworkConfig& cfg) {
    check_inputs(x, spec, cfg);
    const std::size_t n = cfg.n_stations;
    std::vector<double> p(n, 0.0);
    if (x.empty_network()) return PowerAllocation(std::move(p));

    const double inv_alpha = 1.0 / spec.alpha;
    double denom = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
        if (x.x[m] == 0) continue;
        const double w = 2.0 * cfg.resistance * static_cast<double>(n - m);
        p[m] = static_cast<double>(x.x[m]) * std::pow(w, -inv_alpha);
        denom += p[m] * w;
    }
    const double scale = cfg.squared_budget() / denom;
    for (double& v : p) v *= scale;
    return PowerAllocation(std::move(p));
}

PowerAllocation alpha_fair_distflow(const QueueState& x, const FairnessSpec& spec, const NetworkConfig& cfg,
                                    const DistflowOptions& opts, DistflowDiagnostics* diag) {
    check_inputs(x, spec, cfg);
    const std::size_t n = cfg.n_stations;
    if (x.empty_network()) {
        if (diag) *diag = DistflowDiagnostics{0.0, cfg.squared_budget(), 0, 0.0};
        return PowerAllocation::zeros(n);
    }

    const double r = cfg.resistance;
    const double bound = cfg.voltage_bound();
    const double inv_alpha = 1.0 / spec.alpha;

    PowerAllocation p = alpha_fair_lindist(x, spec, cfg);
    std::vector<double> q(n, 0.0);
    double scale = 0.0;
    int iterations = 0;
    bool settled = false;
    for (; iterations < opts.max_fixed_point && !settled; ++iterations) {
        const auto grad = powerflow::distflow_gradient(p, r);
        const double v_n = powerflow::distflow_voltages(p, r).end_voltage();
        double p_max = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            q[j] = x.x[j] == 0 ? 0.0 : static_cast<double>(x.x[j]) * std::pow(2.0 * v_n * grad[j], -inv_alpha);
            p_max = std::max(p_max, p[j]);
        }
        // Warm start: the current allocation's scale along q.
        double guess = scale;
        if (guess == 0.0) {
            for (std::size_t j = 0; j < n; ++j) {
                if (q[j] > 0.0) { guess = p[j] / q[j]; break; }
            }
        }
        scale = binding_scale(q, r, bound, guess, opts);

        double change = 0.0;
        std::vector<double> next(n);
        for (std::size_t j = 0; j < n; ++j) {
            next[j] = scale * q[j];
            change = std::max(change, std::fabs(next[j] - p[j]));
        }
        p = PowerAllocation(std::move(next));
        settled = change <= opts.fixed_point_tol * p_max;
    }
    if (!settled) {
        throw AllocationError("alpha_fair_distflow: fixed point did not settle after " +
                              std::to_string(opts.max_fixed_point) + " iterations");
    }

    const double v_n = powerflow::distflow_voltages(p, r).end_voltage();
    const double slack = bound * bound - v_n * v_n;
    if (std::fabs(slack) > opts.tol) {
        throw AllocationError("alpha_fair_distflow: constraint slack " + std::to_string(slack) + " exceeds tolerance");
    }
    if (diag) {
        const double mu = std::pow(scale, -spec.alpha);
        const auto grad = powerflow::distflow_gradient(p, r);
        double worst = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (x.x[j] == 0) continue;
            const double marginal = std::pow(static_cast<double>(x.x[j]) / p[j], spec.alpha);
            worst = std::max(worst, std::fabs(marginal - mu * 2.0 * v_n * grad[j]) / marginal);
        }
        *diag = DistflowDiagnostics{mu, slack, iterations, worst};
    }
    return p;
}

PowerAllocation allocate(FlowModel model, const QueueState& x, const FairnessSpec& spec, const NetworkConfig& cfg) {
    return model == FlowModel::Distflow ? alpha_fair_distflow(x, spec, cfg) : alpha_fair_lindist(x, spec, cfg);
}

}  // namespace allocator
}  // namespace linestab
