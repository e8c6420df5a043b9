#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "linestab/powerflow.hpp"

// alpha-fair allocation of charging power: maximize
// sum_j x_j U(p_j / x_j) over the voltage-drop constraint set, with
// U(y) = y^(1-alpha)/(1-alpha) (alpha != 1) or log y (alpha = 1).
// Stations without vehicles get p_j = 0 and do not enter the objective.

namespace linestab {

struct QueueState {
    std::vector<std::int64_t> x;  // vehicles per station, relabeled order

    std::size_t size() const { return x.size(); }
    bool empty_network() const;
    std::int64_t total() const;
};

struct FairnessSpec {
    double alpha = 1.0;
    void validate() const;
};

namespace allocator {

/// Objective value; -infinity when an occupied station gets p_j = 0 and alpha >= 1.
double utility(const QueueState& x, const PowerAllocation& p, const FairnessSpec& spec);

/// Exact KKT solution p_m = s x_m w_m^(-1/alpha) with w_m = 2r(N-m), s set so
/// that sum_m w_m p_m equals the squared budget.
PowerAllocation alpha_fair_lindist(const QueueState& x, const FairnessSpec& spec, const NetworkConfig& cfg);

struct DistflowOptions {
    double tol = 1e-9;        // |slack| in squared-voltage units
    double fixed_point_tol = 1e-13;
    int max_fixed_point = 200;
    int max_scale_iter = 100;
};

class AllocationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct DistflowDiagnostics {
    double multiplier = 0.0;    // mu
    double slack = 0.0;         // (1/(1-delta))^2 - W_NN
    int fixed_point_iterations = 0;
    double kkt_residual = 0.0;  // max_j |x_j^a p_j^-a - mu g_j| / (x_j^a p_j^-a)
};

/// Same program under the Distflow constraint W_NN <= (1/(1-delta))^2.
/// Fixed point p_j = s x_j g_j(p)^(-1/alpha) with g = dW_NN/dp and the scale
/// s = mu^(-1/alpha) chosen each round so the constraint binds.
/// Throws AllocationError when the fixed point does not settle.
PowerAllocation alpha_fair_distflow(const QueueState& x, const FairnessSpec& spec, const NetworkConfig& cfg,
                                    const DistflowOptions& opts = {}, DistflowDiagnostics* diag = nullptr);

PowerAllocation allocate(FlowModel model, const QueueState& x, const FairnessSpec& spec, const NetworkConfig& cfg);

}  // namespace allocator
}  // namespace linestab
