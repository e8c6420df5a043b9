#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "linestab/powerflow.hpp"

// Stability thresholds of the charging network: the largest uniform arrival
// rate per station whose allocation still meets the voltage-drop bound, for
// both load-flow models, plus their N -> infinity scaled limits.

namespace linestab::stability {

/// Linearized Distflow threshold ((1/(1-delta))^2 - 1) / (r N (N+1)).
double lambda_lin(const NetworkConfig& cfg);

/// lim N^2 lambda_lin = ((1/(1-delta))^2 - 1) / r.
double lambda_lin_critical(double r, double delta);

/// lim N^2 lambda_dist = (pi / 2r) erfi^2(sqrt(ln(1/(1-delta)))).
double lambda_dist_critical(double r, double delta);

struct NewtonOptions {
    double stop_tol = 1e-10;  // on |a_{j+1} - a_j| / a_j
    int max_iter = 50;
};

/// Newton iterates for a with V_N^D(a) = target, where k_N = a / N^2.
struct NewtonTrace {
    std::size_t n = 0;
    double target = 0.0;               // 1 / (1 - delta)
    double a0 = 0.0;                   // continuum initial guess
    std::vector<double> iterates;      // a_0, a_1, ...
    std::vector<double> residuals;     // V_N^D(a_j) - target
    double a_final = 0.0;
    int iterations = 0;                // iterates.size() - 1
    int damped_steps = 0;              // steps halved to keep a > 0
    int outside_window = 0;            // iterates with a >= 2N/(N-1), where Y_N > 0 is not guaranteed
    bool converged = false;
};

class NewtonError : public std::runtime_error {
public:
    NewtonError(const std::string& what, NewtonTrace trace)
        : std::runtime_error(what), trace_(std::move(trace)) {}
    const NewtonTrace& trace() const { return trace_; }

private:
    NewtonTrace trace_;
};

/// a0 = (pi/2) erfi^2(sqrt(ln target)); the continuum guess for V(1) = target.
double continuum_a(double target);

NewtonTrace newton_solve_a_for_voltage(std::size_t n, double target, const NewtonOptions& opts = {});

/// Target 1/(1 - delta). Throws NewtonError when max_iter is exhausted and
/// std::logic_error if Y_N <= 0 shows up (impossible for a < 2N/(N-1)).
/// Near delta = 1/2 the root itself lies above 2N/(N-1); such iterates are
/// allowed and counted in outside_window.
NewtonTrace newton_solve_a(std::size_t n, double delta, const NewtonOptions& opts = {});

/// Distflow threshold a_final / (r N^2); closed form for N = 1.
double lambda_dist(const NetworkConfig& cfg, const NewtonOptions& opts = {});

/// Threshold of the requested model.
double lambda_threshold(const NetworkConfig& cfg, FlowModel model);

/// P(delta) = lambda_c^D / lambda_c^L, decreasing from 1 to ~0.767 on (0, 1/2].
double ratio_P(double delta);

/// Scaled continuum voltage V(t) = f0(t sqrt(a)), solving V'' = a / V,
/// V(0) = 1, V'(0) = 0.
double continuum_voltage(double a, double t);

struct ConvergenceReport {
    std::size_t n = 0;
    double a = 0.0;
    double v_discrete = 1.0;   // V_N^D
    double v_continuum = 1.0;  // V(1)
    double abs_err = 0.0;
    double rel_err = 0.0;
};

std::vector<ConvergenceReport> convergence_report(double a, const std::vector<std::size_t>& n_values);

}  // namespace linestab::stability
