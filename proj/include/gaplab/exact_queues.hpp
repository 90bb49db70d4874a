#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "gaplab/numerics.hpp"

// Exact steady-state evaluation for M/M/N queues (with a real-valued server
// extension of Erlang-C) and M/M/N+M abandonment queues, plus the exact
// optimizers the gap experiments compare against.

namespace gaplab::exact_queues {

struct QueueParams {
    double n;                     // arrival rate
    double mu;                    // service rate
    std::optional<double> gamma;  // abandonment rate (exponential patience)
};

struct CostParams {
    double h;  // waiting cost per customer per time
    double c;  // cost per server per time
};

struct ExactOptimum {
    double staffing;
    double cost;
};

class InstabilityError : public std::domain_error {
    using std::domain_error::domain_error;
};

class WindowTooSmallError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

void validate(const QueueParams& p);
void validate(const CostParams& c);

/// Classical Erlang-C delay probability via the inverse Erlang-B recursion.
double erlang_c_integer(long N, double R);

/// Real-server extension: C(x) = [R * Int_0^inf t e^{-Rt} (1+t)^{x-1} dt]^-1.
/// Agrees with erlang_c_integer at integer x.
double erlang_c_real(double x, double R, const numerics::Tolerance& tol = {});

/// E[Q] = n * C(x, n/mu) / (x*mu - n) for the M/M/N queue with x servers.
double mmn_expected_queue(const QueueParams& params, double x);

/// Pi_n(x) = h E[Q] + c x.
double mmn_cost(const QueueParams& params, const CostParams& cost, double x);

/// Exact minimizer of mmn_cost over real x in (n/mu, inf).
ExactOptimum mmn_optimal(const QueueParams& params, const CostParams& cost);

/// Smallest integer N > n/mu with delay probability <= alpha.
long mmn_min_servers_wait_prob(const QueueParams& params, double alpha);

/// Birth-death stationary distribution of the M/M/N+M queue: birth rate n,
/// death rate min(j,N)*mu + max(j-N,0)*gamma. Truncated when the tail term
/// drops below 1e-16 of the running sum.
std::vector<double> erlang_a_distribution(const QueueParams& params, long N);

/// E[(number in system - N)^+] under the stationary distribution.
double erlang_a_expected_queue(const QueueParams& params, long N);

/// Exhaustive integer minimization of h E[Q] + c N over
/// [max(0, center - window), center + window]. Errors when the minimum sits
/// on a window edge (widen and retry). center defaults to round(n/mu).
ExactOptimum erlang_a_optimal_integer(const QueueParams& params, const CostParams& cost,
                                      long search_window = 0, long center = -1);

}  // namespace gaplab::exact_queues
