#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "gaplab/exact_queues.hpp"
#include "gaplab/expansions.hpp"
#include "gaplab/numerics.hpp"

// Selection of the scale-free decision x* with the pi_hat tie-break, the
// finite-n refined prescription, optimality-gap measurement against exact
// evaluators, and numerical falsification probes for the framework
// conditions 1-6.

namespace gaplab::prescription {

using exact_queues::CostParams;
using exact_queues::ExactOptimum;
using expansions::ExpansionSpec;
using numerics::Bracket;
using numerics::Tolerance;

struct Prescription {
    double x_star;
    double pi_bar_value;
    double pi_hat_value;
    std::vector<double> argmin_set;
    std::vector<std::string> regime_flags;
};

struct GapRecord {
    double n;
    double staffing_prescribed;
    double cost_prescribed;
    double staffing_optimal;
    double cost_optimal;
    double gap;
    double normalized_gap;
    std::vector<std::string> flags;
};

struct RateFit {
    double slope;
    double intercept;
    double r_squared;
    int excluded;  // non-positive values dropped before the log-log fit
};

class InsufficientDataError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Exact model hook used by gap measurement and the epsilon probes.
struct ExactEvaluator {
    std::function<double(double n, double staffing)> expected_queue;  // throws when infeasible
    bool integer_staffing = false;
};

/// Minimize pi_bar over the probe bracket, collect the argmin band, then
/// pick the member with the smallest pi_hat (ties to the smallest x).
Prescription select_prescription(const ExpansionSpec& spec, Bracket domain_probe);

/// Argmin over the probe of b_n*pi_bar + c_n*pi_hat (the finite-n objective
/// without eps_n). Tends to x* as n grows.
double refined_prescription(const ExpansionSpec& spec, double n, Bracket domain_probe);

/// g_n(x), with the domain check; inverse round-trips via spec.g_inverse.
double staffing(const ExpansionSpec& spec, double n, double x);

/// Evaluate the exact cost at the prescribed staffing (floor/ceil for
/// integer models, better value kept) and at the exact optimum. The gap is
/// formed from queue-length and staffing differences directly so that large
/// a_n terms never cancel in the subtraction.
GapRecord optimality_gap(const ExpansionSpec& spec, const ExactEvaluator& exact,
                         const CostParams& cost, const ExactOptimum& optimum, double n,
                         double x_star);

struct EpsilonRow {
    double n;
    double sup_abs_epsilon;
    std::vector<double> epsilon_at_probes;  // at x-delta, x, x+delta (clamped)
    std::vector<std::string> flags;
};

/// eps_n(y) = Pi_n(g_n(y)) - a_n - b_n pi_bar(y) - c_n pi_hat(y) at the
/// three neighborhood probes around x.
std::vector<EpsilonRow> epsilon_probe(const ExpansionSpec& spec, const ExactEvaluator& exact,
                                      const CostParams& cost, double x,
                                      const std::vector<double>& n_grid, double delta = 0.05);

/// Log-log least squares of |value| against n over the usable records.
RateFit rate_fit(const std::vector<std::pair<double, double>>& records);

enum class ProbeVerdict { Pass, Fail, Indeterminate };

struct ConditionReport {
    std::map<int, ProbeVerdict> verdict;  // keyed by condition number 1..6
    std::map<int, std::string> note;
};

/// Falsification probes for conditions 1-6 on finite grids. Never a proof;
/// Indeterminate is a valid outcome (e.g. no exact evaluator supplied).
ConditionReport probe_conditions(const ExpansionSpec& spec, const std::vector<double>& n_grid,
                                 const std::vector<double>& sample_grid,
                                 const ExactEvaluator* exact = nullptr,
                                 const CostParams* cost = nullptr);

std::string to_string(ProbeVerdict v);

}  // namespace gaplab::prescription
