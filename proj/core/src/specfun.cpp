#include "linestab/specfun.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace linestab::specfun {

namespace {

constexpr double kSqrtPi = 1.7724538509055160273;
constexpr double kSqrtHalfPi = 1.2533141373155002512;  // sqrt(pi/2)

// Below this the Maclaurin series is summed directly; every term is
// positive so there is no cancellation.
constexpr double kSeriesLimit = 6.0;

double erfi_series(double x) {
    const double x2 = x * x;
    double term = x;  // x^(2n+1) / n!
    double sum = x;
    for (int n = 1; n < 500; ++n) {
        term *= x2 / n;
        const double contrib = term / (2 * n + 1);
        sum += contrib;
        if (contrib <= sum * 1e-17) break;
    }
    return 2.0 / kSqrtPi * sum;
}

// erfi(x) ~ exp(x^2) / (x sqrt(pi)) * sum_n (2n-1)!! / (2x^2)^n, truncated
// at the smallest term.
double erfi_asymptotic(double x) {
    const double inv = 1.0 / (2.0 * x * x);
    double term = 1.0;
    double sum = 1.0;
    for (int n = 1; n < 1000; ++n) {
        const double next = term * (2 * n - 1) * inv;
        if (next >= term) break;
        term = next;
        sum += term;
        if (term <= sum * 1e-17) break;
    }
    const double log_value = x * x - std::log(x * kSqrtPi) + std::log(sum);
    if (log_value >= std::log(std::numeric_limits<double>::max())) {
        throw std::range_error("erfi: result overflows for x = " + std::to_string(x));
    }
    return std::exp(log_value);
}

}  // namespace

double erfi(double x) {
    if (!std::isfinite(x)) throw std::domain_error("erfi: argument must be finite");
    const double ax = std::fabs(x);
    const double value = ax <= kSeriesLimit ? erfi_series(ax) : erfi_asymptotic(ax);
    return x < 0 ? -value : value;
}

double u_inverse(double x, const Tolerances& tol) {
    if (!(x >= 0.0)) throw std::domain_error("u_inverse: requires x >= 0");
    if (x == 0.0) return 0.0;

    // g(U) = erfi(U) sqrt(pi/2) - x is increasing and convex on U >= 0,
    // g'(U) = sqrt(2) exp(U^2).
    auto g = [x](double u) { return erfi(u) * kSqrtHalfPi - x; };
    const double target_tol = tol.residual * std::max(1.0, x);

    double lo = 0.0;
    double hi = 1.0 + std::sqrt(std::log1p(x));
    while (g(hi) < 0.0) {
        lo = hi;
        hi *= 2.0;
    }
    // For large x the root sits near sqrt(ln x); small x has U ~ x / sqrt(2).
    double u = x < 1.0 ? x / std::numbers::sqrt2 : std::sqrt(std::log(x));
    if (u <= lo || u >= hi) u = 0.5 * (lo + hi);

    for (int it = 0; it < tol.max_iterations; ++it) {
        const double gu = g(u);
        const double newton = u - gu / (std::numbers::sqrt2 * std::exp(u * u));
        // One Newton step past the tolerance brings U to full precision.
        if (std::fabs(gu) <= target_tol) return newton > lo && newton < hi ? newton : u;
        if (gu < 0.0) lo = u; else hi = u;
        double next = newton;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (next == u || hi - lo <= std::numeric_limits<double>::epsilon() * hi) return next;
        u = next;
    }
    throw std::runtime_error("u_inverse: no convergence for x = " + std::to_string(x));
}

double f0(double x, const Tolerances& tol) {
    const double u = u_inverse(x, tol);
    return std::exp(u * u);
}

double f0_inverse(double y) {
    if (!(y >= 1.0)) throw std::domain_error("f0_inverse: requires y >= 1");
    return kSqrtHalfPi * erfi(std::sqrt(std::log(y)));
}

double OdeSolutionParams::operator()(double t) const {
    return gamma * f0(alpha + beta * t);
}

OdeSolutionParams solve_ode(double k, double y0, double w0) {
    if (!(k > 0.0)) throw std::domain_error("solve_ode: requires k > 0");
    if (!(y0 > 0.0)) throw std::domain_error("solve_ode: requires y0 > 0");
    if (!(w0 >= 0.0)) throw std::domain_error("solve_ode: requires w0 >= 0");

    const double s = w0 * w0 / (2.0 * k);
    OdeSolutionParams out;
    out.k = k;
    out.y0 = y0;
    out.w0 = w0;
    // sqrt(2) * int_0^{w0/sqrt(2k)} exp(u^2) du
    out.alpha = kSqrtHalfPi * erfi(w0 / std::sqrt(2.0 * k));
    out.beta = std::sqrt(k) / y0 * std::exp(s);
    out.gamma = y0 * std::exp(-s);
    return out;
}

}  // namespace linestab::specfun
