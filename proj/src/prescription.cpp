#include "gaplab/prescription.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gaplab::prescription {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double guarded(const std::function<double(double)>& f, double x) {
    try {
        return f(x);
    } catch (const expansions::RegimeError&) {
        return kNaN;
    }
}

}  // namespace

Prescription select_prescription(const ExpansionSpec& spec, Bracket domain_probe) {
    const Tolerance band_tol{1e-10, 1e-9, 200};
    const auto reps = numerics::argmin_set(spec.pi_bar, domain_probe, band_tol);
    if (reps.empty()) throw std::runtime_error("select_prescription: empty argmin set");

    // Coercivity sanity at the far probe edge: a minimizer sitting on the
    // outer probe boundary with the objective still descending is evidence
    // against condition 3.
    const double range = domain_probe.hi - domain_probe.lo;
    if (reps.back() >= domain_probe.hi - 1e-9 * range) {
        const double step = 1e-4 * range;
        if (spec.pi_bar(domain_probe.hi) < spec.pi_bar(domain_probe.hi - step))
            throw std::runtime_error(
                "select_prescription: pi_bar still descending at the probe edge "
                "(condition-3 violation evidence)");
    }

    double best_hat = kInf;
    std::vector<double> hats(reps.size());
    for (std::size_t i = 0; i < reps.size(); ++i) {
        hats[i] = guarded(spec.pi_hat, reps[i]);
        if (std::isfinite(hats[i])) best_hat = std::min(best_hat, hats[i]);
    }

    Prescription out;
    out.argmin_set = reps;
    if (!std::isfinite(best_hat)) {
        // pi_hat undefined on the whole argmin band; fall back to smallest x.
        out.x_star = reps.front();
        out.pi_hat_value = kNaN;
        out.regime_flags.push_back("pi-hat-undefined");
    } else {
        const double tie = 1e-9 * (1.0 + std::abs(best_hat));
        std::size_t pick = 0;
        while (pick < reps.size() && !(std::isfinite(hats[pick]) && hats[pick] <= best_hat + tie))
            ++pick;
        out.x_star = reps[pick];
        out.pi_hat_value = hats[pick];
    }
    out.pi_bar_value = spec.pi_bar(out.x_star);
    if (spec.critical_x &&
        out.x_star >= *spec.critical_x - 1e-6 * (1.0 + std::abs(*spec.critical_x)))
        out.regime_flags.push_back("critical-boundary");
    return out;
}

double refined_prescription(const ExpansionSpec& spec, double n, Bracket domain_probe) {
    const double b = spec.b_of_n(n);
    const double c = spec.c_of_n(n);
    const auto obj = [&](double x) {
        const double hat = guarded(spec.pi_hat, x);
        if (!std::isfinite(hat)) return kInf;
        return b * spec.pi_bar(x) + c * hat;
    };
    return numerics::minimize_scalar(obj, domain_probe, {1e-12, 1e-12, 400}).x;
}

double staffing(const ExpansionSpec& spec, double n, double x) {
    const double lo = spec.domain_lo(n), hi = spec.domain_hi(n);
    if (!(x >= lo && x <= hi))
        throw numerics::DomainError("staffing: x outside the feasible set for this n");
    return spec.g_of_n(n, x);
}

namespace {

struct CostAt {
    double staffing;
    double eq;
    bool feasible;
    std::string rounding;
};

CostAt exact_cost_at(const ExactEvaluator& exact, const CostParams& cost, double n, double u) {
    if (!exact.integer_staffing) {
        try {
            return {u, exact.expected_queue(n, u), true, ""};
        } catch (const std::exception&) {
            return {u, kNaN, false, ""};
        }
    }
    const double uf = std::floor(u), uc = std::ceil(u);
    CostAt best{u, kNaN, false, ""};
    for (double cand : {uf, uc}) {
        if (cand < 0.0) continue;
        try {
            const double eq = exact.expected_queue(n, cand);
            const double c_val = cost.h * eq + cost.c * cand;
            if (!best.feasible || c_val < cost.h * best.eq + cost.c * best.staffing) {
                best = {cand, eq, true, cand == uf ? "rounded-down" : "rounded-up"};
            }
        } catch (const std::exception&) {
        }
        if (uf == uc) break;
    }
    return best;
}

}  // namespace

GapRecord optimality_gap(const ExpansionSpec& spec, const ExactEvaluator& exact,
                         const CostParams& cost, const ExactOptimum& optimum, double n,
                         double x_star) {
    GapRecord rec{};
    rec.n = n;
    rec.staffing_optimal = optimum.staffing;
    const double u = spec.g_of_n(n, x_star);
    const auto presc = exact_cost_at(exact, cost, n, u);
    double eq_opt;
    try {
        eq_opt = exact.expected_queue(n, optimum.staffing);
    } catch (const std::exception&) {
        rec.flags.push_back("optimum-evaluation-failed");
        rec.cost_prescribed = rec.cost_optimal = rec.gap = rec.normalized_gap = kNaN;
        rec.staffing_prescribed = presc.staffing;
        return rec;
    }
    rec.cost_optimal = cost.h * eq_opt + cost.c * optimum.staffing;
    rec.staffing_prescribed = presc.staffing;
    if (!presc.feasible) {
        rec.flags.push_back("infeasible");
        rec.cost_prescribed = rec.gap = rec.normalized_gap = kNaN;
        return rec;
    }
    if (!presc.rounding.empty()) rec.flags.push_back(presc.rounding);
    rec.cost_prescribed = cost.h * presc.eq + cost.c * presc.staffing;
    // Difference form: keeps the gap clear of the O(n) cost terms.
    rec.gap = cost.h * (presc.eq - eq_opt) + cost.c * (presc.staffing - optimum.staffing);
    rec.normalized_gap = rec.gap / spec.c_of_n(n);
    return rec;
}

std::vector<EpsilonRow> epsilon_probe(const ExpansionSpec& spec, const ExactEvaluator& exact,
                                      const CostParams& cost, double x,
                                      const std::vector<double>& n_grid, double delta) {
    std::vector<EpsilonRow> rows;
    for (double n : n_grid) {
        EpsilonRow row{};
        row.n = n;
        const double lo = spec.domain_lo(n), hi = spec.domain_hi(n);
        double sup = -kInf;
        for (double y : {x - delta, x, x + delta}) {
            y = std::clamp(y, lo, hi);
            double u = spec.g_of_n(n, y);
            double y_used = y;
            if (exact.integer_staffing) {
                u = std::round(u);
                if (u < 1.0) u = 1.0;
                y_used = spec.g_inverse(n, u);
                row.flags.push_back("lattice");
            }
            double eps = kNaN;
            try {
                const double pi_exact = cost.h * exact.expected_queue(n, u) + cost.c * u;
                const double hat = spec.pi_hat(y_used);
                eps = pi_exact - spec.a_of_n(n) - spec.b_of_n(n) * spec.pi_bar(y_used) -
                      spec.c_of_n(n) * hat;
                sup = std::max(sup, std::abs(eps));
            } catch (const std::exception&) {
                row.flags.push_back("probe-evaluation-failed");
            }
            row.epsilon_at_probes.push_back(eps);
        }
        row.sup_abs_epsilon = std::isfinite(sup) ? sup : kNaN;
        rows.push_back(std::move(row));
    }
    return rows;
}

RateFit rate_fit(const std::vector<std::pair<double, double>>& records) {
    std::vector<double> xs, ys;
    int excluded = 0;
    for (const auto& [n, v] : records) {
        if (n > 0.0 && std::isfinite(v) && std::abs(v) > 0.0) {
            xs.push_back(std::log(n));
            ys.push_back(std::log(std::abs(v)));
        } else {
            ++excluded;
        }
    }
    const std::size_t m = xs.size();
    if (m < 3) throw InsufficientDataError("rate_fit: need at least 3 usable points");
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < m; ++i) {
        sx += xs[i];
        sy += ys[i];
    }
    const double mx = sx / m, my = sy / m;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < m; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    RateFit fit{};
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    fit.excluded = excluded;
    return fit;
}

std::string to_string(ProbeVerdict v) {
    switch (v) {
        case ProbeVerdict::Pass: return "pass";
        case ProbeVerdict::Fail: return "fail";
        default: return "indeterminate";
    }
}

ConditionReport probe_conditions(const ExpansionSpec& spec, const std::vector<double>& n_grid,
                                 const std::vector<double>& sample_grid,
                                 const ExactEvaluator* exact, const CostParams* cost) {
    if (n_grid.empty() || sample_grid.empty())
        throw std::invalid_argument("probe_conditions: grids must be non-empty");
    ConditionReport rep;

    // Condition 1: nested domains and a strictly increasing, invertible g_n.
    {
        bool ok = true;
        std::string note;
        for (std::size_t i = 0; i + 1 < n_grid.size(); ++i) {
            if (spec.domain_lo(n_grid[i + 1]) > spec.domain_lo(n_grid[i]) + 1e-12 ||
                spec.domain_hi(n_grid[i + 1]) < spec.domain_hi(n_grid[i]) - 1e-12) {
                ok = false;
                note = "domain nesting violated between n=" + std::to_string(n_grid[i]) +
                       " and n=" + std::to_string(n_grid[i + 1]);
                break;
            }
        }
        if (ok) {
            for (double n : n_grid) {
                double prev = -kInf;
                for (double x : sample_grid) {
                    if (x < spec.domain_lo(n) || x > spec.domain_hi(n)) continue;
                    const double u = spec.g_of_n(n, x);
                    if (!(u > prev)) {
                        ok = false;
                        note = "g_n not strictly increasing";
                    }
                    prev = u;
                    const double back = spec.g_inverse(n, u);
                    if (std::abs(back - x) > 1e-12 * (1.0 + std::abs(x))) {
                        ok = false;
                        note = "g_n inverse round-trip failed";
                    }
                }
            }
        }
        rep.verdict[1] = ok ? ProbeVerdict::Pass : ProbeVerdict::Fail;
        rep.note[1] = note;
    }

    // Condition 2: b_n grows along the grid.
    {
        bool ok = true;
        for (std::size_t i = 0; i + 1 < n_grid.size(); ++i)
            if (!(spec.b_of_n(n_grid[i + 1]) > spec.b_of_n(n_grid[i]))) ok = false;
        rep.verdict[2] = ok ? ProbeVerdict::Pass : ProbeVerdict::Fail;
        // c_n = o(b_n) on the grid, checked alongside.
        if (ok && spec.c_of_n(n_grid.back()) / spec.b_of_n(n_grid.back()) >
                      spec.c_of_n(n_grid.front()) / spec.b_of_n(n_grid.front()))
            rep.verdict[2] = ProbeVerdict::Fail;
    }

    // Condition 3: pi_bar bounded below over the samples.
    double pi_bar_min = kInf;
    double argmin_sample = sample_grid.front();
    {
        bool any = false;
        for (double x : sample_grid) {
            try {
                const double v = spec.pi_bar(x);
                if (std::isfinite(v)) {
                    any = true;
                    if (v < pi_bar_min) {
                        pi_bar_min = v;
                        argmin_sample = x;
                    }
                }
            } catch (const std::exception&) {
            }
        }
        rep.verdict[3] = any && std::isfinite(pi_bar_min) ? ProbeVerdict::Pass
                                                          : ProbeVerdict::Indeterminate;
    }

    // Condition 4: pi_hat finite in a small neighborhood of the sampled argmin.
    {
        int finite = 0, total = 0;
        for (double d : {-1e-3, 0.0, 1e-3}) {
            ++total;
            const double v = guarded(spec.pi_hat, argmin_sample + d);
            if (std::isfinite(v)) ++finite;
        }
        rep.verdict[4] = finite == total ? ProbeVerdict::Pass
                         : finite == 0   ? ProbeVerdict::Fail
                                         : ProbeVerdict::Indeterminate;
    }

    // Conditions 5 and 6 need the exact evaluator.
    if (exact == nullptr || cost == nullptr) {
        rep.verdict[5] = rep.verdict[6] = ProbeVerdict::Indeterminate;
        rep.note[5] = rep.note[6] = "no exact evaluator supplied";
        return rep;
    }

    // Condition 5: pi_hat + eps_n lower-bounded across samples and n.
    {
        double worst = kInf;
        bool any = false;
        for (double n : n_grid) {
            for (double x : sample_grid) {
                if (x < spec.domain_lo(n) || x > spec.domain_hi(n)) continue;
                try {
                    double u = spec.g_of_n(n, x);
                    if (exact->integer_staffing) u = std::max(1.0, std::round(u));
                    const double xu = exact->integer_staffing ? spec.g_inverse(n, u) : x;
                    const double pi_exact = cost->h * exact->expected_queue(n, u) + cost->c * u;
                    const double v =
                        (pi_exact - spec.a_of_n(n) - spec.b_of_n(n) * spec.pi_bar(xu)) /
                        spec.c_of_n(n);
                    if (std::isfinite(v)) {
                        any = true;
                        worst = std::min(worst, v);
                    }
                } catch (const std::exception&) {
                }
            }
        }
        rep.verdict[5] = !any               ? ProbeVerdict::Indeterminate
                         : worst > -1e8     ? ProbeVerdict::Pass
                                            : ProbeVerdict::Fail;
    }

    // Condition 6: sup |eps_n| near the sampled argmin decays along the grid.
    {
        const auto rows = epsilon_probe(spec, *exact, *cost, argmin_sample, n_grid, 0.05);
        std::vector<double> sups;
        for (const auto& r : rows)
            if (std::isfinite(r.sup_abs_epsilon)) sups.push_back(r.sup_abs_epsilon);
        if (sups.size() < 2) {
            rep.verdict[6] = ProbeVerdict::Indeterminate;
            rep.note[6] = "epsilon probes not evaluable near the argmin";
        } else if (sups.back() < 0.5 * sups.front() || sups.back() < 1e-6) {
            rep.verdict[6] = ProbeVerdict::Pass;
        } else if (sups.back() > 1.5 * sups.front()) {
            rep.verdict[6] = ProbeVerdict::Fail;
            rep.note[6] = "sup|eps_n| grows along the n-grid";
        } else {
            rep.verdict[6] = ProbeVerdict::Indeterminate;
            rep.note[6] = "sup|eps_n| shows no clear decay on the probed grid";
        }
    }
    return rep;
}

}  // namespace gaplab::prescription
