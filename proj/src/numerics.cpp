#include "gaplab/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gaplab::numerics {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014326779399461;
constexpr double kSqrt2 = 1.4142135623730950488016887;
constexpr double kGolden = 0.6180339887498948482045868;
constexpr double kInf = std::numeric_limits<double>::infinity();

void require_finite(double x, const char* what) {
    if (!std::isfinite(x)) throw DomainError(std::string(what) + ": non-finite input");
}

// Mills ratio Phi(-y)/phi(y) for y >= 5 via the Laplace continued fraction
// 1/(y + 1/(y + 2/(y + 3/(...)))).
double mills_cf(double y) {
    double tail = y;
    for (int k = 64; k >= 1; --k) tail = y + k / tail;
    return 1.0 / tail;
}

}  // namespace

std::pair<double, double> normal_pdf_cdf(double x) {
    require_finite(x, "normal_pdf_cdf");
    const double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
    const double cdf = 0.5 * std::erfc(-x / kSqrt2);
    return {pdf, cdf};
}

double mills_ratio(double x) {
    require_finite(x, "mills_ratio");
    if (x < -5.0) return mills_cf(-x);
    if (x <= 5.0) {
        auto [pdf, cdf] = normal_pdf_cdf(x);
        return cdf / pdf;
    }
    // Phi(x)/phi(x) = 1/phi(x) - Phi(-x)/phi(x); overflows past x ~ 38.6.
    const double half = 0.5 * x * x;
    if (half > 700.0) return kInf;
    const double inv_pdf = std::exp(half) / kInvSqrt2Pi;
    return inv_pdf - mills_cf(x);
}

double hazard(double x) {
    require_finite(x, "hazard");
    const double m = mills_ratio(-x);
    return std::isinf(m) ? 0.0 : 1.0 / m;
}

namespace {

// Adaptive Simpson on [a,b] for a bounded integrand (already peak-scaled).
double simpson_step(const RealFn& f, double a, double fa, double b, double fb,
                    double m, double fm, double whole, double eps, int depth) {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    // Noise floor: below a few ulps of the local contribution further
    // splitting only chases rounding error.
    const double floor_ = 4e-16 * (std::abs(left) + std::abs(right));
    if (depth <= 0 || std::abs(delta) <= std::max(15.0 * eps, floor_))
        return left + right + delta / 15.0;
    return simpson_step(f, a, fa, m, fm, lm, flm, left, 0.5 * eps, depth - 1) +
           simpson_step(f, m, fm, b, fb, rm, frm, right, 0.5 * eps, depth - 1);
}

double adaptive_simpson(const RealFn& f, double a, double b, double eps) {
    if (b <= a) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fb = f(b), fm = f(m);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_step(f, a, fa, b, fb, m, fm, whole, eps, 36);
}

}  // namespace

double integrate_semiinfinite(const RealFn& log_integrand, const Tolerance& tol) {
    // Coarse geometric scan for the log-peak over t = 2^k.
    int best_k = 0;
    double best_v = -kInf;
    for (int k = -120; k <= 120; ++k) {
        const double v = log_integrand(std::ldexp(1.0, k));
        if (v > best_v) {
            best_v = v;
            best_k = k;
        }
    }
    if (!std::isfinite(best_v))
        throw ConvergenceError("integrate_semiinfinite: no finite peak located", 0.0);

    // Golden-section maximization of u -> log f(exp(u)) around the best cell.
    const double ln2 = std::log(2.0);
    double a = (best_k - 1) * ln2, b = (best_k + 1) * ln2;
    {
        double x1 = b - kGolden * (b - a);
        double x2 = a + kGolden * (b - a);
        double f1 = log_integrand(std::exp(x1));
        double f2 = log_integrand(std::exp(x2));
        for (int it = 0; it < 120 && (b - a) > 1e-12; ++it) {
            if (f1 < f2) {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + kGolden * (b - a);
                f2 = log_integrand(std::exp(x2));
            } else {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - kGolden * (b - a);
                f1 = log_integrand(std::exp(x1));
            }
        }
    }
    const double t_peak = std::exp(0.5 * (a + b));
    double log_peak = log_integrand(t_peak);
    if (!std::isfinite(log_peak)) log_peak = best_v;
    const double cutoff = log_peak - 45.0;

    // Lower truncation point in (0, t_peak].
    double t_lo = 0.0;
    {
        double lo = std::min(t_peak, 1e-300);
        if (log_integrand(lo) < cutoff) {
            double hi = t_peak;
            for (int it = 0; it < 200 && hi / lo > 1.0 + 1e-12; ++it) {
                const double mid = std::sqrt(lo * hi);
                (log_integrand(mid) < cutoff ? lo : hi) = mid;
            }
            t_lo = lo;
        }
    }

    // Upper truncation point: geometric expansion past the peak, then bisect.
    double t_hi;
    {
        double lo = t_peak;
        double hi = t_peak;
        bool found = false;
        for (int k = 0; k < 2200; ++k) {
            hi = t_peak * std::ldexp(1.0, k / 16 + 1) * (1.0 + 0.0625 * (k % 16));
            if (log_integrand(hi) < cutoff) {
                found = true;
                break;
            }
            lo = hi;
        }
        if (!found)
            throw ConvergenceError("integrate_semiinfinite: integrand does not decay", 0.0);
        for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            (log_integrand(mid) < cutoff ? hi : lo) = mid;
        }
        t_hi = hi;
    }

    const RealFn scaled = [&](double t) {
        const double v = log_integrand(t) - log_peak;
        // NaN shows up at t = 0 for integrands like 0*log(t); the integrand
        // vanishes there.
        if (std::isnan(v) || v < -745.0) return 0.0;
        return std::exp(v);
    };
    // Rough composite estimate fixes the absolute error target so that the
    // requested tolerance stays relative even for sharply peaked integrands.
    double rough = 0.0;
    {
        const int m = 256;
        const double w = (t_hi - t_lo) / m;
        double prev = scaled(t_lo);
        for (int i = 1; i <= m; ++i) {
            const double cur = scaled(t_lo + i * w);
            rough += 0.5 * w * (prev + cur);
            prev = cur;
        }
    }
    const double eps = 0.25 * tol.relative * std::max(rough, 1e-300);
    const double left = adaptive_simpson(scaled, t_lo, t_peak, eps);
    const double right = adaptive_simpson(scaled, t_peak, t_hi, eps);
    return std::exp(log_peak) * (left + right);
}

double find_root(const RealFn& f, Bracket bracket, const Tolerance& tol) {
    double a = bracket.lo, b = bracket.hi;
    if (!(a < b)) throw BracketError("find_root: lo must be < hi");
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (fa * fb > 0.0) throw BracketError("find_root: no sign change over bracket");
    // Bisection with a secant step when it stays inside the bracket.
    double x = a;
    for (int it = 0; it < std::max(tol.max_iterations, 200); ++it) {
        double s = b - fb * (b - a) / (fb - fa);
        if (!(s > a && s < b)) s = 0.5 * (a + b);
        x = s;
        const double fs = f(s);
        if (std::abs(fs) <= tol.absolute || (b - a) <= tol.relative * (1.0 + std::abs(s)))
            return s;
        if (fa * fs < 0.0) {
            b = s;
            fb = fs;
        } else {
            a = s;
            fa = fs;
        }
        // Force occasional bisection so the bracket cannot stall.
        if (it % 2 == 1) {
            const double m = 0.5 * (a + b);
            const double fm = f(m);
            if (fa * fm < 0.0) {
                b = m;
                fb = fm;
            } else {
                a = m;
                fa = fm;
            }
        }
    }
    return x;
}

namespace {

// 512-point hybrid grid: uniform everywhere, plus geometric points when the
// bracket spans orders of magnitude away from zero.
std::vector<double> scan_grid(double lo, double hi) {
    std::vector<double> g;
    g.reserve(512);
    const bool geometric = lo > 0.0 && hi / lo > 100.0;
    const int n_uniform = geometric ? 256 : 512;
    for (int i = 0; i < n_uniform; ++i)
        g.push_back(lo + (hi - lo) * (i + 0.5) / n_uniform);
    if (geometric) {
        const double r = std::log(hi / lo);
        for (int i = 0; i < 256; ++i)
            g.push_back(lo * std::exp(r * (i + 0.5) / 256.0));
        std::sort(g.begin(), g.end());
    }
    return g;
}

MinResult golden_refine(const RealFn& f, double a, double b, const Tolerance& tol) {
    double x1 = b - kGolden * (b - a);
    double x2 = a + kGolden * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 400; ++it) {
        if (b - a <= tol.relative * (1.0 + std::min(std::abs(a), std::abs(b)))) break;
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - kGolden * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + kGolden * (b - a);
            f2 = f(x2);
        }
    }
    return f1 < f2 ? MinResult{x1, f1} : MinResult{x2, f2};
}

}  // namespace

MinResult minimize_scalar(const RealFn& f, Bracket bracket, const Tolerance& tol) {
    if (!(bracket.lo < bracket.hi)) throw BracketError("minimize_scalar: lo must be < hi");
    const auto grid = scan_grid(bracket.lo, bracket.hi);
    std::size_t best = 0;
    double best_f = kInf;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double v = f(grid[i]);
        if (v < best_f) {
            best_f = v;
            best = i;
        }
    }
    if (!std::isfinite(best_f))
        throw ConvergenceError("minimize_scalar: no finite value on scan grid", 0.0);
    const double a = best == 0 ? bracket.lo : grid[best - 1];
    const double b = best + 1 == grid.size() ? bracket.hi : grid[best + 1];
    MinResult r = golden_refine(f, a, b, tol);
    // The refined point never loses to the scan winner.
    if (best_f < r.f) r = {grid[best], best_f};
    const double f_lo = f(bracket.lo);
    if (f_lo < r.f) r = {bracket.lo, f_lo};
    const double f_hi = f(bracket.hi);
    if (f_hi < r.f) r = {bracket.hi, f_hi};
    return r;
}

MinResult minimize_half_line(const RealFn& f, double lo, const Tolerance& tol,
                             double initial_step) {
    double step = initial_step > 0.0 ? initial_step : std::max(1e-6, 1e-3 * (1.0 + std::abs(lo)));
    double best_f = f(lo);
    double hi = lo;
    int rises = 0;
    bool turned = false;
    for (int k = 0; k < 80; ++k) {
        hi = lo + step;
        step *= 2.0;
        const double v = f(hi);
        if (v < best_f) {
            best_f = v;
            rises = 0;
        } else if (std::isfinite(best_f)) {
            if (++rises >= 2) {
                turned = true;
                break;
            }
        }
    }
    if (!turned)
        throw UnboundedBelowError("minimize_half_line: no upward turn after geometric expansion");
    return minimize_scalar(f, {lo, hi}, tol);
}

MinResult minimize_unbounded(const RealFn& f, double seed, const Tolerance& tol) {
    double step = std::max(1.0, 1e-3 * std::abs(seed));
    double lo = seed, hi = seed;
    double f_seed = f(seed);
    for (int k = 0; k < 80; ++k) {
        lo = seed - step;
        hi = seed + step;
        if (f(lo) > f_seed && f(hi) > f_seed) break;
        const double v = std::min(f(lo), f(hi));
        if (v < f_seed) {
            seed = f(lo) < f(hi) ? lo : hi;
            f_seed = v;
        }
        step *= 2.0;
        if (k == 79)
            throw UnboundedBelowError("minimize_unbounded: no bracket after expansion");
    }
    return minimize_scalar(f, {lo, hi}, tol);
}

std::vector<double> argmin_set(const RealFn& f, Bracket bracket, const Tolerance& tol) {
    if (!(bracket.lo < bracket.hi)) throw DomainError("argmin_set: invalid domain");
    const auto grid = scan_grid(bracket.lo, bracket.hi);
    std::vector<double> vals(grid.size());
    double f_min = kInf;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        vals[i] = f(grid[i]);
        f_min = std::min(f_min, vals[i]);
    }
    if (!std::isfinite(f_min)) throw DomainError("argmin_set: no finite value on domain");
    const double band = f_min + tol.absolute * (1.0 + std::abs(f_min));

    std::vector<double> reps;
    std::size_t i = 0;
    while (i < grid.size()) {
        if (vals[i] > band) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < grid.size() && vals[j + 1] <= band) ++j;
        const double a = i == 0 ? bracket.lo : grid[i - 1];
        const double b = j + 1 == grid.size() ? bracket.hi : grid[j + 1];
        reps.push_back(golden_refine(f, a, b, tol).x);
        i = j + 1;
    }
    std::sort(reps.begin(), reps.end());
    std::vector<double> merged;
    for (double x : reps) {
        if (merged.empty() || x - merged.back() > 1e-6 * (1.0 + std::abs(x)))
            merged.push_back(x);
    }
    return merged;
}

}  // namespace gaplab::numerics
