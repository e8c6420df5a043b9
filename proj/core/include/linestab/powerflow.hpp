#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

// Load flow on a line feeder with N charging stations.
//
// All allocations and voltage profiles use the relabeled order: index 0 is
// the station farthest from the root, index N-1 is adjacent to it, and
// voltage index N is the root node. With V_0 = 1 the Distflow recursion
// runs outward from the far end and the drop constraint becomes
// V_N <= 1/(1 - delta).

namespace linestab {

enum class FlowModel { Distflow, LinDist };

const char* to_string(FlowModel model);
FlowModel parse_flow_model(const std::string& name);

struct NetworkConfig {
    std::size_t n_stations = 1;
    double resistance = 1.0;  // per edge, per unit
    double delta = 0.05;      // admissible relative voltage drop, (0, 1/2]

    /// Throws std::domain_error unless N >= 1, r > 0 and 0 < delta <= 1/2.
    void validate() const;

    /// 1 / (1 - delta): the largest admissible root voltage when V_0 = 1.
    double voltage_bound() const { return 1.0 / (1.0 - delta); }

    /// (1/(1 - delta))^2 - 1: squared-voltage budget of the drop constraint.
    double squared_budget() const;
};

void validate_delta(double delta);

/// Nonnegative active power per station, relabeled order.
class PowerAllocation {
public:
    PowerAllocation() = default;
    explicit PowerAllocation(std::vector<double> p);
    static PowerAllocation zeros(std::size_t n) { return PowerAllocation(std::vector<double>(n, 0.0)); }
    static PowerAllocation uniform(std::size_t n, double value);

    /// Station i counted from the root (i = 1..N) holds p_{N-i}.
    static PowerAllocation from_physical_order(std::span<const double> from_root);
    std::vector<double> to_physical_order() const;

    std::span<const double> values() const { return p_; }
    std::size_t size() const { return p_.size(); }
    double operator[](std::size_t i) const { return p_[i]; }
    double total() const;

private:
    std::vector<double> p_;
};

struct VoltageProfile {
    std::vector<double> v;       // V_0..V_N
    std::vector<double> w_diag;  // W_{j,j} = V_j^2
    std::vector<double> w_off;   // W_{j,j+1} = V_j V_{j+1}

    double end_voltage() const { return v.back(); }
};

namespace powerflow {

/// Distflow recursion from a given far-end voltage v0:
/// V_1 = v0 + r p_0 / v0, V_{j+1} = 2 V_j - V_{j-1} + r p_j / V_j.
VoltageProfile distflow_from_root(double v0, const PowerAllocation& p, double r);

/// distflow_from_root with V_0 = 1.
VoltageProfile distflow_voltages(const PowerAllocation& p, double r);

/// Squared-voltage route: W_{0,0} = 1, W_{0,1} = 1 + r p_0,
/// W_{j,j} = W_{j-1,j}^2 / W_{j-1,j-1}, W_{j,j+1} = 2 W_{j,j} - W_{j-1,j} + r p_j.
/// Only w_diag and w_off are filled; v is left empty.
VoltageProfile distflow_w_recursion(const PowerAllocation& p, double r);

/// V_j = 1 + sum_{n<j} sum_{i<=n} r p_i / V_i evaluated literally, O(N^2).
/// Independent check on the recursion.
VoltageProfile distflow_double_sum(const PowerAllocation& p, double r);

struct LinDistProfile {
    std::vector<double> w_diag;  // squared voltages W_{0,0}..W_{N,N}, W_{N,N} = (1/(1-delta))^2
    double weighted_load = 0.0;  // sum_m (N - m) p_m
    bool physical = true;        // false when W_{0,0} < 0

    double far_end() const { return w_diag.front(); }
};

/// Linearized Distflow with the root squared voltage pinned at (1/(1-delta))^2.
/// Each edge j -> j+1 drops 2 r times the load downstream of it.
LinDistProfile lindist_squared_voltages(const PowerAllocation& p, double r, double delta);

/// W_{N,N} - 2r sum_{j<N} sum_{m<=N-1-j} p_m, summed term by term.
double lindist_far_end_double_sum(const PowerAllocation& p, double r, double delta);

struct Feasibility {
    bool feasible = false;
    double slack = 0.0;  // constraint margin in squared-voltage units, >= 0 iff feasible
};

Feasibility feasible(const PowerAllocation& p, const NetworkConfig& cfg, FlowModel model);

/// dV_N/dp_j of the V_0 = 1 Distflow recursion by forward sensitivity.
std::vector<double> distflow_gradient(const PowerAllocation& p, double r);

struct Sensitivity {
    double v_n = 1.0;  // V_N^D
    double y_n = 0.0;  // dV_N^D / dk_N
};

/// Uniform-load recursion with k_N = a / n^2 and its k-derivative Y:
/// Y_0 = 0, Y_1 = 1, Y_{n+1} - 2 Y_n + Y_{n-1} = 1/V_n - k Y_n / V_n^2.
/// Requires 0 <= a < 2n/(n-1).
Sensitivity distflow_sensitivity(double a, std::size_t n);

/// Same recursion for any a >= 0. Outside the window Y_N > 0 is no longer
/// guaranteed and callers must check it.
Sensitivity distflow_sensitivity_unbounded(double a, std::size_t n);

struct SensitivityProfile {
    std::vector<double> v;
    std::vector<double> y;
};

SensitivityProfile distflow_sensitivity_profile(double a, std::size_t n);

/// Upper end of the admissible a-range, 2n/(n-1) (infinite for n = 1).
double sensitivity_a_limit(std::size_t n);

}  // namespace powerflow
}  // namespace linestab
