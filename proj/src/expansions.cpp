#include "gaplab/expansions.hpp"

#include <cmath>
#include <limits>

namespace gaplab::expansions {

using numerics::hazard;
using numerics::mills_ratio;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Plain adaptive Simpson on a finite interval; enough for the smooth,
// monotone survival functions integrated here.
double simpson_rec(const std::function<double(double)>& f, double a, double fa, double b,
                   double fb, double m, double fm, double whole, double eps, int depth) {
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    const double floor_ = 4e-16 * (std::abs(left) + std::abs(right));
    if (depth <= 0 || std::abs(delta) <= std::max(15.0 * eps, floor_))
        return left + right + delta / 15.0;
    return simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * eps, depth - 1) +
           simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * eps, depth - 1);
}

double integrate_finite(const std::function<double(double)>& f, double a, double b, double rel) {
    if (b <= a) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fb = f(b), fm = f(m);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_rec(f, a, fa, b, fb, m, fm, whole, rel * std::max(std::abs(whole), 1e-300), 40);
}

}  // namespace

PatienceDist exponential_patience(double gamma) {
    if (!(gamma > 0.0)) throw std::invalid_argument("exponential_patience: gamma must be > 0");
    PatienceDist d;
    d.tag = "exp";
    d.survival = [gamma](double w) { return std::exp(-gamma * w); };
    d.density = [gamma](double w) { return gamma * std::exp(-gamma * w); };
    d.density_derivative = [gamma](double w) { return -gamma * gamma * std::exp(-gamma * w); };
    d.inverse_survival = [gamma](double u) {
        if (!(u > 0.0 && u <= 1.0)) throw std::domain_error("inverse_survival: u outside (0,1]");
        return -std::log(u) / gamma;
    };
    d.mean = 1.0 / gamma;
    d.w_cap = -std::log(1e-12) / gamma;
    return d;
}

PatienceDist hyperexponential_patience(double p, double a, double b) {
    if (!(p > 0.0 && p < 1.0) || !(a > 0.0) || !(b > 0.0))
        throw std::invalid_argument("hyperexponential_patience: need p in (0,1), a > 0, b > 0");
    PatienceDist d;
    d.tag = "hyperexp";
    d.survival = [p, a, b](double w) {
        return p * std::exp(-a * w) + (1.0 - p) * std::exp(-b * w);
    };
    d.density = [p, a, b](double w) {
        return p * a * std::exp(-a * w) + (1.0 - p) * b * std::exp(-b * w);
    };
    d.density_derivative = [p, a, b](double w) {
        return -p * a * a * std::exp(-a * w) - (1.0 - p) * b * b * std::exp(-b * w);
    };
    const auto survival = d.survival;
    d.inverse_survival = [survival](double u) {
        if (!(u > 0.0 && u <= 1.0)) throw std::domain_error("inverse_survival: u outside (0,1]");
        if (u == 1.0) return 0.0;
        double hi = 1.0;
        while (survival(hi) > u) hi *= 2.0;
        return numerics::find_root([&](double w) { return survival(w) - u; }, {0.0, hi},
                                   {1e-12, 1e-15, 200});
    };
    d.mean = p / a + (1.0 - p) / b;
    d.w_cap = d.inverse_survival(1e-12);
    return d;
}

// --- Halfin-Whitt ---

double hw_qbar(double x) {
    if (!(x > 0.0)) throw numerics::DomainError("hw_qbar: x must be > 0");
    return 1.0 / (x * (1.0 + x * mills_ratio(x)));
}

double hw_qhat(double x) {
    if (!(x > 0.0)) throw numerics::DomainError("hw_qhat: x must be > 0");
    const double qb = hw_qbar(x);
    const double m = mills_ratio(x);
    return x * x * qb * qb * (1.0 / 3.0 + x * x / 6.0 + m * (x / 2.0 + x * x * x / 6.0));
}

ExpansionSpec hw_expansion(double mu, const CostParams& cost) {
    if (!(mu > 0.0)) throw std::invalid_argument("hw_expansion: mu must be > 0");
    exact_queues::validate(cost);
    const double h = cost.h, c = cost.c;
    ExpansionSpec s;
    s.model_tag = "mmn-hw";
    s.a_of_n = [c, mu](double n) { return c * n / mu; };
    s.b_of_n = [mu](double n) { return std::sqrt(n / mu); };
    s.c_of_n = [](double) { return 1.0; };
    s.pi_bar = [h, c](double x) { return c * x + h * hw_qbar(x); };
    s.pi_hat = [h](double x) { return h * hw_qhat(x); };
    s.g_of_n = [mu](double n, double x) { return n / mu + std::sqrt(n / mu) * x; };
    s.g_inverse = [mu](double n, double u) { return (u - n / mu) / std::sqrt(n / mu); };
    s.domain_lo = [](double) { return 0.0; };
    s.domain_hi = [](double) { return kInf; };
    return s;
}

// --- Fluid ---

double fluid_wbar(double x, double mu, const PatienceDist& patience) {
    if (!(x >= 0.0)) throw numerics::DomainError("fluid_wbar: x must be >= 0");
    const double u = std::min(1.0, x * mu);
    if (u <= 1e-12) return patience.w_cap;
    return patience.inverse_survival(u);
}

double fluid_qbar(double x, double mu, const PatienceDist& patience) {
    if (!(x >= 0.0)) throw numerics::DomainError("fluid_qbar: x must be >= 0");
    if (x * mu >= 1.0) return 0.0;
    if (patience.tag == "exp") {
        const double gamma = 1.0 / patience.mean;
        return (1.0 - std::max(1e-12, x * mu)) / gamma;
    }
    const double wb = fluid_wbar(x, mu, patience);
    return integrate_finite(patience.survival, 0.0, wb, 1e-12);
}

double fluid_qhat(double x, double mu, const PatienceDist& patience, RhoConvention rho) {
    if (!(x > 0.0) || !(x * mu < 1.0))
        throw RegimeError("fluid_qhat: valid only in overload (0 < x*mu < 1)");
    const double wb = fluid_wbar(x, mu, patience);
    const double g = patience.density(wb);
    const double gp = patience.density_derivative(wb);
    const double rho_v = rho == RhoConvention::Utilization ? 1.0 / (x * mu) : 1.0;
    return -0.5 * (gp / (rho_v * g * g) + 1.0);
}

ExpansionSpec fluid_expansion(double mu, const CostParams& cost, const PatienceDist& patience,
                              RhoConvention rho) {
    if (!(mu > 0.0)) throw std::invalid_argument("fluid_expansion: mu must be > 0");
    exact_queues::validate(cost);
    const double h = cost.h, c = cost.c;
    ExpansionSpec s;
    s.model_tag = "mmng-fluid";
    s.a_of_n = [](double) { return 0.0; };
    s.b_of_n = [](double n) { return n; };
    s.c_of_n = [](double) { return 1.0; };
    s.pi_bar = [h, c, mu, patience](double x) { return c * x + h * fluid_qbar(x, mu, patience); };
    s.pi_hat = [h, mu, patience, rho](double x) {
        if (x * mu < 1.0) return h * fluid_qhat(x, mu, patience, rho);
        // Continuity extension at the critical boundary when the one-sided
        // limit is stable; otherwise the regime error stands.
        if (x * mu <= 1.0 + 1e-9) {
            const double x1 = (1.0 - 1e-7) / mu;
            const double x2 = (1.0 - 1e-8) / mu;
            const double v1 = h * fluid_qhat(x1, mu, patience, rho);
            const double v2 = h * fluid_qhat(x2, mu, patience, rho);
            if (std::abs(v2 - v1) <= 1e-4 * (1.0 + std::abs(v2))) return v2;
        }
        throw RegimeError("fluid pi_hat: undefined outside the overloaded regime");
    };
    s.g_of_n = [](double n, double x) { return n * x; };
    s.g_inverse = [](double n, double u) { return u / n; };
    s.domain_lo = [](double) { return 0.0; };
    s.domain_hi = [](double) { return kInf; };
    s.critical_x = 1.0 / mu;
    return s;
}

// --- Erlang-A diffusion ---

double erlang_a_H(double x, double mu, double gamma) {
    return hazard(x * std::sqrt(mu / gamma));
}

double erlang_a_Astar(double x, double mu, double gamma) {
    const double G = mills_ratio(x);
    const double H = erlang_a_H(x, mu, gamma);
    return 1.0 / (1.0 + std::sqrt(gamma / mu) * G * H);
}

double erlang_a_qbar1(double x, double mu, double gamma) {
    const double H = erlang_a_H(x, mu, gamma);
    return (std::sqrt(gamma / mu) * H - x) * (mu / gamma) * erlang_a_Astar(x, mu, gamma);
}

double erlang_a_qhat1(double x, double mu, double gamma) {
    const double G = mills_ratio(x);
    const double H = erlang_a_H(x, mu, gamma);
    const double A = erlang_a_Astar(x, mu, gamma);
    const double sg = std::sqrt(gamma / mu);   // sqrt(gamma/mu)
    const double sm = std::sqrt(mu / gamma);   // sqrt(mu/gamma)
    const double qb1 = erlang_a_qbar1(x, mu, gamma);
    const double h_gamma =
        -(1.0 / 6.0) * sg * x * x * H * (G * H * sm - x * G * (mu / gamma) + 1.0 + x * G);
    const double bracket = -h_gamma * A - (1.0 / 6.0) * x * x * H * sm +
                           (1.0 / 6.0) * sg * x * H / (sg * H - x);
    return mu * qb1 * bracket;
}

ExpansionSpec erlang_a_diffusion_expansion(double mu, double gamma, const CostParams& cost) {
    if (!(mu > 0.0) || !(gamma > 0.0))
        throw std::invalid_argument("erlang_a_diffusion_expansion: mu, gamma must be > 0");
    exact_queues::validate(cost);
    const double h = cost.h, c = cost.c;
    ExpansionSpec s;
    s.model_tag = "mmna-diffusion";
    s.a_of_n = [c, mu](double n) { return c * n / mu; };
    s.b_of_n = [mu](double n) { return std::sqrt(n / mu); };
    s.c_of_n = [](double) { return 1.0; };
    s.pi_bar = [h, c, mu, gamma](double x) { return c * x + h * erlang_a_qbar1(x, mu, gamma); };
    s.pi_hat = [h, mu, gamma](double x) { return h * erlang_a_qhat1(x, mu, gamma); };
    s.g_of_n = [mu](double n, double x) { return n / mu + std::sqrt(n / mu) * x; };
    s.g_inverse = [mu](double n, double u) { return (u - n / mu) / std::sqrt(n / mu); };
    s.domain_lo = [mu](double n) { return -std::sqrt(n / mu); };
    s.domain_hi = [](double) { return kInf; };
    return s;
}

}  // namespace gaplab::expansions
