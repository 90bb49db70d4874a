#pragma once

#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

// Scalar numerics shared by every other module: stable normal special
// functions, semi-infinite quadrature in log space, bracketed root finding
// and scalar minimization with a global coarse scan.

namespace gaplab::numerics {

struct Tolerance {
    double relative = 1e-10;
    double absolute = 1e-12;
    int max_iterations = 200;
};

struct Bracket {
    double lo;
    double hi;
};

class DomainError : public std::domain_error {
    using std::domain_error::domain_error;
};

class BracketError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& msg, double best)
        : std::runtime_error(msg), best_estimate(best) {}
    double best_estimate;
};

class UnboundedBelowError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

using RealFn = std::function<double(double)>;

/// (phi(x), Phi(x)) for the standard normal. Phi via scaled erfc so the
/// tails keep relative accuracy down to the underflow threshold.
std::pair<double, double> normal_pdf_cdf(double x);

/// Phi(x)/phi(x). Direct ratio for x >= -5, continued fraction below.
/// Overflows to +inf for x > ~38.6 where Phi/phi exceeds DBL_MAX.
double mills_ratio(double x);

/// phi(x)/Phi(-x), the normal hazard rate. Always > max(0, x).
double hazard(double x);

/// Integral of exp(log_integrand(t)) over (0, inf). The integrand is scaled
/// by its log-peak, split at the peak, and each side handled by adaptive
/// Simpson; tails truncated where log_integrand < log_peak - 45.
double integrate_semiinfinite(const RealFn& log_integrand, const Tolerance& tol = {});

/// Root of f in [bracket.lo, bracket.hi]; requires a sign change.
double find_root(const RealFn& f, Bracket bracket, const Tolerance& tol = {});

struct MinResult {
    double x;
    double f;
};

/// Minimum over a closed bracket: 512-point hybrid coarse scan, then
/// golden-section refinement around the best cell.
MinResult minimize_scalar(const RealFn& f, Bracket bracket, const Tolerance& tol = {});

/// Minimum over [lo, inf): geometric bracket expansion until the function
/// turns upward, then bounded minimization. Throws UnboundedBelowError if
/// no turn is found.
MinResult minimize_half_line(const RealFn& f, double lo, const Tolerance& tol = {},
                             double initial_step = 0.0);

/// Minimum over the whole real line by two-sided expansion.
MinResult minimize_unbounded(const RealFn& f, double seed, const Tolerance& tol = {});

/// Representatives of every connected region where f is within
/// tol.absolute*(1+|f_min|) of the bracket minimum, each refined locally.
/// Sorted ascending; never empty.
std::vector<double> argmin_set(const RealFn& f, Bracket bracket, const Tolerance& tol = {});

}  // namespace gaplab::numerics
