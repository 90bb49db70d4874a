#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gaplab/prescription.hpp"

using namespace gaplab::prescription;
namespace exq = gaplab::exact_queues;
namespace exp_ = gaplab::expansions;
namespace num = gaplab::numerics;

namespace {

// Synthetic spec scaffold with overridable pieces.
exp_::ExpansionSpec synthetic(std::function<double(double)> pi_bar,
                              std::function<double(double)> pi_hat) {
    exp_::ExpansionSpec s;
    s.model_tag = "synthetic";
    s.a_of_n = [](double n) { return n; };
    s.b_of_n = [](double n) { return std::sqrt(n); };
    s.c_of_n = [](double) { return 1.0; };
    s.pi_bar = std::move(pi_bar);
    s.pi_hat = std::move(pi_hat);
    s.g_of_n = [](double n, double x) { return n + std::sqrt(n) * x; };
    s.g_inverse = [](double n, double u) { return (u - n) / std::sqrt(n); };
    s.domain_lo = [](double) { return -1e9; };
    s.domain_hi = [](double) { return 1e9; };
    return s;
}

ExactEvaluator mmn_evaluator(double mu) {
    ExactEvaluator e;
    e.expected_queue = [mu](double n, double u) {
        return exq::mmn_expected_queue({n, mu, {}}, u);
    };
    e.integer_staffing = false;
    return e;
}

}  // namespace

TEST_CASE("tie-break on the synthetic double well picks x = -1") {
    const auto spec = synthetic([](double x) { return (x * x - 1.0) * (x * x - 1.0); },
                                [](double x) { return x; });
    const auto p = select_prescription(spec, {-3.0, 3.0});
    REQUIRE(p.argmin_set.size() == 2);
    CHECK(p.x_star == doctest::Approx(-1.0).epsilon(1e-6));
    CHECK(p.pi_hat_value == doctest::Approx(-1.0).epsilon(1e-6));
}

TEST_CASE("strictly convex pi_bar ignores pi_hat") {
    const auto spec = synthetic([](double x) { return (x - 2.0) * (x - 2.0); },
                                [](double x) { return -x; });  // pi_hat favours large x
    const auto p = select_prescription(spec, {-5.0, 5.0});
    REQUIRE(p.argmin_set.size() == 1);
    CHECK(p.x_star == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("Halfin-Whitt x* matches the grid-search oracle") {
    const auto spec = exp_::hw_expansion(1.0, {1.0, 1.0});
    const auto p = select_prescription(spec, {1e-3, 10.0});
    double best_x = 0, best_f = 1e300;
    const int m = 1000000;
    for (int i = 0; i <= m; ++i) {
        const double x = 1e-3 + (10.0 - 1e-3) * i / m;
        const double v = spec.pi_bar(x);
        if (v < best_f) {
            best_f = v;
            best_x = x;
        }
    }
    CHECK(std::abs(p.x_star - best_x) < 1e-5);
    CHECK(p.pi_bar_value <= best_f + 1e-12);
    REQUIRE(p.argmin_set.size() == 1);  // unique minimizer
}

TEST_CASE("coercivity violation at the probe edge is detected") {
    const auto spec = synthetic([](double x) { return -x; }, [](double) { return 0.0; });
    CHECK_THROWS(select_prescription(spec, {0.0, 100.0}));
}

TEST_CASE("refined prescription equals x* when pi_hat is constant") {
    const auto spec = synthetic([](double x) { return (x - 1.5) * (x - 1.5); },
                                [](double) { return 7.0; });
    const auto p = select_prescription(spec, {-5.0, 5.0});
    for (double n : {1e2, 1e4, 1e6})
        CHECK(std::abs(refined_prescription(spec, n, {-5.0, 5.0}) - p.x_star) < 1e-7);
}

TEST_CASE("refined prescription approaches x* as n grows") {
    const auto spec = exp_::hw_expansion(1.0, {1.0, 1.0});
    const auto p = select_prescription(spec, {1e-3, 10.0});
    double prev = 1e300;
    for (double n : {1e2, 1e3, 1e4, 1e5, 1e6}) {
        const double d = std::abs(refined_prescription(spec, n, {1e-3, 10.0}) - p.x_star);
        CHECK(d < prev + 1e-9);
        prev = d;
    }
}

TEST_CASE("refined prescription matches grid search at n = 100") {
    const auto spec = exp_::hw_expansion(1.0, {1.0, 1.0});
    const double r = refined_prescription(spec, 100.0, {1e-3, 10.0});
    double best_x = 0, best_f = 1e300;
    const int m = 1000000;
    for (int i = 0; i <= m; ++i) {
        const double x = 1e-3 + (10.0 - 1e-3) * i / m;
        const double v = 10.0 * spec.pi_bar(x) + spec.pi_hat(x);
        if (v < best_f) {
            best_f = v;
            best_x = x;
        }
    }
    CHECK(std::abs(r - best_x) < 1e-5);
}

TEST_CASE("staffing map and round-trip") {
    const auto hw = exp_::hw_expansion(1.0, {1.0, 1.0});
    CHECK(staffing(hw, 100.0, 0.5) == doctest::Approx(105.0));
    const auto fl = exp_::fluid_expansion(1.0, {2.0, 1.0}, exp_::exponential_patience(1.0));
    CHECK(staffing(fl, 100.0, 0.8) == doctest::Approx(80.0));
    for (double x : {0.1, 0.7, 2.0})
        CHECK(std::abs(hw.g_inverse(100.0, staffing(hw, 100.0, x)) - x) < 1e-12);
    CHECK_THROWS_AS(staffing(fl, 100.0, -0.5), num::DomainError);
}

TEST_CASE("optimality gap on the Halfin-Whitt model") {
    const auto spec = exp_::hw_expansion(1.0, {1.0, 1.0});
    const auto presc = select_prescription(spec, {1e-3, 10.0});
    const auto exact = mmn_evaluator(1.0);
    const exq::CostParams cost{1.0, 1.0};

    double gap100 = 0.0, gap1e4 = 0.0;
    for (double n : {1e2, 1e4}) {
        const auto opt = exq::mmn_optimal({n, 1.0, {}}, cost);
        const auto rec = optimality_gap(spec, exact, cost, opt, n, presc.x_star);
        CHECK(rec.gap >= -1e-9 * (1.0 + std::abs(rec.cost_optimal)));
        CHECK(rec.cost_optimal <= rec.cost_prescribed + 1e-9);
        (n == 1e2 ? gap100 : gap1e4) = rec.gap;
    }
    CHECK(gap1e4 < gap100);

    // Refined prescription cannot do worse at n = 1e3.
    const double n = 1e3;
    const auto opt = exq::mmn_optimal({n, 1.0, {}}, cost);
    const double xr = refined_prescription(spec, n, {1e-3, 10.0});
    const auto plain = optimality_gap(spec, exact, cost, opt, n, presc.x_star);
    const auto refined = optimality_gap(spec, exact, cost, opt, n, xr);
    CHECK(refined.gap <= plain.gap + 1e-9);
}

TEST_CASE("infeasible prescriptions are flagged, not fatal") {
    auto spec = synthetic([](double x) { return x * x; }, [](double) { return 0.0; });
    // Staffing below n/mu for the M/M/N evaluator.
    spec.g_of_n = [](double n, double) { return 0.5 * n; };
    const auto exact = mmn_evaluator(1.0);
    const exq::CostParams cost{1.0, 1.0};
    const auto opt = exq::mmn_optimal({100.0, 1.0, {}}, cost);
    const auto rec = optimality_gap(spec, exact, cost, opt, 100.0, 0.0);
    CHECK(std::isnan(rec.gap));
    REQUIRE(!rec.flags.empty());
    CHECK(rec.flags.front() == "infeasible");
}

TEST_CASE("epsilon probe is identically zero for a consistent synthetic model") {
    const auto spec = synthetic([](double x) { return (x - 1.0) * (x - 1.0); },
                                [](double) { return 0.3; });
    ExactEvaluator exact;
    exact.expected_queue = [&spec](double n, double u) {
        const double x = spec.g_inverse(n, u);
        return spec.a_of_n(n) + spec.b_of_n(n) * spec.pi_bar(x) + spec.pi_hat(x);
    };
    exact.integer_staffing = false;
    const exq::CostParams cost{1.0, 0.0};  // cost = E[Q] directly
    const auto rows = epsilon_probe(spec, exact, cost, 1.0, {1e2, 1e4, 1e6});
    for (const auto& r : rows) CHECK(std::abs(r.sup_abs_epsilon) < 1e-8);
}

TEST_CASE("epsilon probe decays for the Halfin-Whitt expansion") {
    const auto spec = exp_::hw_expansion(1.0, {1.0, 1.0});
    const auto rows =
        epsilon_probe(spec, mmn_evaluator(1.0), {1.0, 1.0}, 1.0, {1e2, 1e3, 1e4});
    REQUIRE(rows.size() == 3);
    CHECK(rows[1].sup_abs_epsilon < rows[0].sup_abs_epsilon);
    CHECK(rows[2].sup_abs_epsilon < rows[1].sup_abs_epsilon);
}

TEST_CASE("rate_fit recovers exact power laws") {
    std::vector<std::pair<double, double>> half, flat, inv;
    for (double n : {1e2, 1e3, 1e4, 1e5}) {
        half.emplace_back(n, 1.0 / std::sqrt(n));
        flat.emplace_back(n, 2.5);
        inv.emplace_back(n, 3.0 / n);
    }
    const auto f1 = rate_fit(half);
    CHECK(f1.slope == doctest::Approx(-0.5).epsilon(1e-10));
    CHECK(f1.r_squared == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(rate_fit(flat).slope == doctest::Approx(0.0).epsilon(1e-10));
    const auto f3 = rate_fit(inv);
    CHECK(f3.slope == doctest::Approx(-1.0).epsilon(1e-10));
    CHECK(f3.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-10));
}

TEST_CASE("rate_fit needs three usable points") {
    CHECK_THROWS_AS(rate_fit({{100.0, 1.0}, {1000.0, 0.5}}), InsufficientDataError);
    // Non-positive values are excluded and counted.
    const auto f = rate_fit({{1e2, 1e-1}, {1e3, 0.0}, {1e4, 1e-2}, {1e5, 3e-3}, {1e6, 1e-3}});
    CHECK(f.excluded == 1);
}

TEST_CASE("probe_conditions passes for the Halfin-Whitt model") {
    const auto spec = exp_::hw_expansion(1.0, {1.0, 1.0});
    const auto exact = mmn_evaluator(1.0);
    const exq::CostParams cost{1.0, 1.0};
    std::vector<double> samples;
    for (double x = 0.1; x <= 3.0; x += 0.1) samples.push_back(x);
    const auto rep = probe_conditions(spec, {1e2, 1e3, 1e4, 1e5}, samples, &exact, &cost);
    for (int c = 1; c <= 6; ++c) {
        INFO("condition ", c, ": ", rep.note.count(c) ? rep.note.at(c) : "");
        CHECK(rep.verdict.at(c) == ProbeVerdict::Pass);
    }
}

TEST_CASE("fluid criticality trips the condition-6 probe") {
    // h = 2c with mu = gamma = 1 puts the pi_bar argmin exactly at x = 1/mu.
    const auto spec = exp_::fluid_expansion(1.0, {2.0, 1.0}, exp_::exponential_patience(1.0));
    ExactEvaluator exact;
    exact.expected_queue = [](double n, double u) {
        return exq::erlang_a_expected_queue({n, 1.0, 1.0}, std::lround(u));
    };
    exact.integer_staffing = true;
    const exq::CostParams cost{2.0, 1.0};
    std::vector<double> samples;
    for (double x = 0.05; x <= 1.5; x += 0.05) samples.push_back(x);
    const auto rep = probe_conditions(spec, {1e2, 1e3, 1e4}, samples, &exact, &cost);
    CHECK(rep.verdict.at(6) != ProbeVerdict::Pass);
}

TEST_CASE("constrained staffing violates domain nesting") {
    // Scaled feasible sets from the wait-probability constraint jitter with
    // integer staffing levels, so X_n is not nested in X_{n+1}.
    auto spec = synthetic([](double x) { return x; }, [](double) { return 0.0; });
    const double alpha = 0.2;
    spec.domain_lo = [alpha](double n) {
        const long N = exq::mmn_min_servers_wait_prob({n, 1.0, {}}, alpha);
        return (static_cast<double>(N) - n) / std::sqrt(n);
    };
    std::vector<double> n_grid;
    for (double n = 100.0; n <= 140.0; n += 1.0) n_grid.push_back(n);
    const auto rep = probe_conditions(spec, n_grid, {1.0, 2.0, 3.0});
    CHECK(rep.verdict.at(1) == ProbeVerdict::Fail);
}

TEST_CASE("prescription selection is deterministic") {
    const auto spec = exp_::hw_expansion(1.0, {2.0, 0.7});
    const auto a = select_prescription(spec, {1e-3, 10.0});
    const auto b = select_prescription(spec, {1e-3, 10.0});
    CHECK(a.x_star == b.x_star);
    CHECK(a.pi_bar_value == b.pi_bar_value);
}
