#pragma once

// Special functions behind the continuum limit of the Distflow voltage
// recursion: erfi, the inverse map U, the base solution f0 = exp(U^2) of
// f'' f = 1, and the general solution of f'' = k / f.

namespace linestab::specfun {

struct Tolerances {
    // |erfi(U) sqrt(pi/2) - x| <= residual * max(1, x) ends the U solve.
    double residual = 1e-13;
    int max_iterations = 200;
};

/// Imaginary error function (2/sqrt(pi)) * int_0^x exp(v^2) dv.
/// Throws std::range_error when the result is not representable.
double erfi(double x);

/// U(x) >= 0 with int_0^U exp(u^2) du = x / sqrt(2). Requires x >= 0.
double u_inverse(double x, const Tolerances& tol = {});

/// f0(x) = exp(U(x)^2); f0(0) = 1, increasing.
double f0(double x, const Tolerances& tol = {});

/// Inverse of f0 for y >= 1: sqrt(pi/2) * erfi(sqrt(ln y)).
double f0_inverse(double y);

/// Closed-form solution f(t) = gamma * f0(alpha + beta t) of f'' = k / f
/// with f(0) = y0, f'(0) = w0.
struct OdeSolutionParams {
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
    double k = 0.0;
    double y0 = 0.0;
    double w0 = 0.0;

    double operator()(double t) const;
};

OdeSolutionParams solve_ode(double k, double y0, double w0);

}  // namespace linestab::specfun
