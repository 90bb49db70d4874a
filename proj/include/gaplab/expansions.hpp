#pragma once

#include <functional>
#include <optional>
#include <string>

#include "gaplab/exact_queues.hpp"
#include "gaplab/numerics.hpp"

// The three asymptotic expansion families, each packaged as an ExpansionSpec
// of the form Pi_n(g_n(x)) = a_n + b_n*pi_bar(x) + c_n*[pi_hat(x) + eps_n(x)].

namespace gaplab::expansions {

using exact_queues::CostParams;

struct ExpansionSpec {
    std::string model_tag;
    std::function<double(double)> a_of_n;
    std::function<double(double)> b_of_n;
    std::function<double(double)> c_of_n;
    std::function<double(double)> pi_bar;
    std::function<double(double)> pi_hat;
    std::function<double(double, double)> g_of_n;      // (n, x) -> staffing
    std::function<double(double, double)> g_inverse;   // (n, staffing) -> x
    std::function<double(double)> domain_lo;           // of n
    std::function<double(double)> domain_hi;           // of n; may return +inf
    std::optional<double> critical_x;                  // regime boundary (fluid: 1/mu)
};

struct PatienceDist {
    std::string tag;
    std::function<double(double)> survival;            // Gbar(w)
    std::function<double(double)> density;             // g(w)
    std::function<double(double)> density_derivative;  // g'(w)
    std::function<double(double)> inverse_survival;    // u -> Gbar^-1(u)
    double mean;                                       // 1/gamma
    double w_cap;                                      // Gbar^-1(1e-12), stands in for Gbar^-1(0)
};

PatienceDist exponential_patience(double gamma);
PatienceDist hyperexponential_patience(double p, double a, double b);

enum class RhoConvention { Utilization, Unit };

class RegimeError : public std::domain_error {
    using std::domain_error::domain_error;
};

// --- Halfin-Whitt (M/M/N, square-root staffing) ---

/// qbar(x) = (1/x) (1 + x Phi(x)/phi(x))^-1, x > 0.
double hw_qbar(double x);

/// qhat(x) = x^2 qbar(x)^2 (1/3 + x^2/6 + Phi(x)/phi(x) (x/2 + x^3/6)).
double hw_qhat(double x);

ExpansionSpec hw_expansion(double mu, const CostParams& cost);

// --- M/M/N+G fluid ---

/// wbar(x) = Gbar^-1(min(1, x mu)); capped at patience.w_cap as x -> 0.
double fluid_wbar(double x, double mu, const PatienceDist& patience);

/// qbar(x) = integral of Gbar over [0, wbar(x)].
double fluid_qbar(double x, double mu, const PatienceDist& patience);

/// qhat(x) = -(1/2) (g'(wbar)/(rho g(wbar)^2) + 1), valid only in overload
/// (0 < x mu < 1). rho per convention: Utilization -> 1/(x mu), Unit -> 1.
double fluid_qhat(double x, double mu, const PatienceDist& patience,
                  RhoConvention rho = RhoConvention::Utilization);

ExpansionSpec fluid_expansion(double mu, const CostParams& cost, const PatienceDist& patience,
                              RhoConvention rho = RhoConvention::Utilization);

// --- M/M/N+M diffusion ---

double erlang_a_H(double x, double mu, double gamma);
double erlang_a_Astar(double x, double mu, double gamma);
double erlang_a_qbar1(double x, double mu, double gamma);
double erlang_a_qhat1(double x, double mu, double gamma);

ExpansionSpec erlang_a_diffusion_expansion(double mu, double gamma, const CostParams& cost);

}  // namespace gaplab::expansions
