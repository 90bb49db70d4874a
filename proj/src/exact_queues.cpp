#include "gaplab/exact_queues.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gaplab::exact_queues {

using numerics::Tolerance;

void validate(const QueueParams& p) {
    if (!(p.n > 0.0) || !std::isfinite(p.n)) throw std::invalid_argument("QueueParams: n must be > 0");
    if (!(p.mu > 0.0) || !std::isfinite(p.mu)) throw std::invalid_argument("QueueParams: mu must be > 0");
    if (p.gamma && (!(*p.gamma > 0.0) || !std::isfinite(*p.gamma)))
        throw std::invalid_argument("QueueParams: gamma must be > 0 when present");
}

void validate(const CostParams& c) {
    if (!(c.h >= 0.0) || !std::isfinite(c.h)) throw std::invalid_argument("CostParams: h must be >= 0");
    if (!(c.c > 0.0) || !std::isfinite(c.c)) throw std::invalid_argument("CostParams: c must be > 0");
}

namespace {

// Inverse Erlang-B recursion: I_N = 1/B(N,R), I_0 = 1, I_k = 1 + (k/R) I_{k-1}.
double erlang_b_inverse(long N, double R) {
    double inv = 1.0;
    for (long k = 1; k <= N; ++k) inv = 1.0 + (static_cast<double>(k) / R) * inv;
    return inv;
}

double erlang_c_from_inverse_b(double inv_b, long N, double R) {
    const double rho = R / static_cast<double>(N);
    // C = B / (1 - rho (1 - B)) = 1 / (I (1 - rho) + rho).
    return 1.0 / (inv_b * (1.0 - rho) + rho);
}

}  // namespace

double erlang_c_integer(long N, double R) {
    if (N < 1 || !(R > 0.0)) throw std::invalid_argument("erlang_c_integer: need N >= 1, R > 0");
    if (!(static_cast<double>(N) > R)) throw InstabilityError("erlang_c_integer: N <= R");
    return erlang_c_from_inverse_b(erlang_b_inverse(N, R), N, R);
}

double erlang_c_real(double x, double R, const Tolerance& tol) {
    if (!(x > 0.0) || !(R > 0.0)) throw std::invalid_argument("erlang_c_real: need x > 0, R > 0");
    if (!(x > R)) throw InstabilityError("erlang_c_real: x <= R");
    const auto log_integrand = [x, R](double t) {
        return std::log(t) - R * t + (x - 1.0) * std::log1p(t);
    };
    const double integral = numerics::integrate_semiinfinite(log_integrand, tol);
    return 1.0 / (R * integral);
}

double mmn_expected_queue(const QueueParams& params, double x) {
    validate(params);
    if (!(x * params.mu > params.n)) throw InstabilityError("mmn_expected_queue: x*mu <= n");
    const double R = params.n / params.mu;
    return params.n * erlang_c_real(x, R) / (x * params.mu - params.n);
}

double mmn_cost(const QueueParams& params, const CostParams& cost, double x) {
    validate(cost);
    return cost.h * mmn_expected_queue(params, x) + cost.c * x;
}

ExactOptimum mmn_optimal(const QueueParams& params, const CostParams& cost) {
    validate(params);
    validate(cost);
    if (cost.h == 0.0)
        throw std::domain_error("mmn_optimal: h = 0 makes the objective degenerate (infimum at n/mu)");
    const double R = params.n / params.mu;
    const double offset = std::max(1e-6, 1e-3 * std::sqrt(R));
    const double lo = R + offset;
    const auto f = [&](double x) { return mmn_cost(params, cost, x); };
    const auto r = numerics::minimize_half_line(f, lo, {}, std::max(1e-6, 0.25 * std::sqrt(R)));
    return {r.x, r.f};
}

long mmn_min_servers_wait_prob(const QueueParams& params, double alpha) {
    validate(params);
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("mmn_min_servers_wait_prob: alpha must lie in (0,1)");
    const double R = params.n / params.mu;
    long N = static_cast<long>(std::floor(R)) + 1;
    if (static_cast<double>(N) <= R) ++N;  // R integral: need strict N > R
    double inv_b = erlang_b_inverse(N, R);
    while (erlang_c_from_inverse_b(inv_b, N, R) > alpha) {
        ++N;
        inv_b = 1.0 + (static_cast<double>(N) / R) * inv_b;
    }
    return N;
}

namespace {

struct ErlangASums {
    double normalizer;    // sum of weights (rescaled)
    double queue_sum;     // sum of (j-N)^+ weights (same scale)
    std::vector<double>* weights;  // optional raw weights, same scale
};

// Streams the birth-death weights w_j (w_0 = 1) with on-the-fly rescaling.
ErlangASums erlang_a_accumulate(const QueueParams& params, long N, std::vector<double>* keep) {
    const double n = params.n, mu = params.mu, gamma = *params.gamma;
    const double R = n / mu;
    const long cap = N + static_cast<long>(200.0 * std::sqrt(R)) + 10000;
    double w = 1.0, sum = 1.0, qsum = 0.0;
    if (keep) keep->assign(1, 1.0);
    for (long j = 1; j <= cap; ++j) {
        const double death = std::min<double>(j, N) * mu + std::max<double>(j - N, 0) * gamma;
        const double r = n / death;
        w *= r;
        sum += w;
        if (j > N) qsum += static_cast<double>(j - N) * w;
        if (keep) keep->push_back(w);
        if (w > 1e280) {
            sum /= w;
            qsum /= w;
            if (keep)
                for (double& v : *keep) v /= w;
            w = 1.0;
        }
        if (r < 0.999 && w < 1e-18 * sum) break;
    }
    return {sum, qsum, keep};
}

}  // namespace

std::vector<double> erlang_a_distribution(const QueueParams& params, long N) {
    validate(params);
    if (!params.gamma) throw std::invalid_argument("erlang_a_distribution: gamma required");
    if (N < 1) throw std::invalid_argument("erlang_a_distribution: N must be >= 1");
    std::vector<double> w;
    const auto s = erlang_a_accumulate(params, N, &w);
    for (double& v : w) v /= s.normalizer;
    return w;
}

double erlang_a_expected_queue(const QueueParams& params, long N) {
    validate(params);
    if (!params.gamma) throw std::invalid_argument("erlang_a_expected_queue: gamma required");
    if (N < 0) throw std::invalid_argument("erlang_a_expected_queue: N must be >= 0");
    if (N == 0) {
        // Pure abandonment queue: number in system is Poisson(n/gamma).
        return params.n / *params.gamma;
    }
    const auto s = erlang_a_accumulate(params, N, nullptr);
    return s.queue_sum / s.normalizer;
}

ExactOptimum erlang_a_optimal_integer(const QueueParams& params, const CostParams& cost,
                                      long search_window, long center) {
    validate(params);
    validate(cost);
    if (!params.gamma) throw std::invalid_argument("erlang_a_optimal_integer: gamma required");
    if (cost.h == 0.0) return {0.0, 0.0};
    const double R = params.n / params.mu;
    if (center < 0) center = std::lround(R);
    if (search_window <= 0)
        search_window = std::max<long>(10, static_cast<long>(std::ceil(5.0 * std::sqrt(R))));
    const long lo = std::max<long>(0, center - search_window);
    const long hi = center + search_window;
    long best_n = lo;
    double best_cost = std::numeric_limits<double>::infinity();
    for (long N = lo; N <= hi; ++N) {
        const double cst = cost.h * erlang_a_expected_queue(params, N) + cost.c * N;
        if (cst < best_cost) {
            best_cost = cst;
            best_n = N;
        }
    }
    if ((best_n == lo && lo > 0) || best_n == hi)
        throw WindowTooSmallError("erlang_a_optimal_integer: minimum on window edge, widen search_window");
    return {static_cast<double>(best_n), best_cost};
}

}  // namespace gaplab::exact_queues
