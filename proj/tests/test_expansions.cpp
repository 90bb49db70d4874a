#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gaplab/expansions.hpp"

using namespace gaplab::expansions;
namespace num = gaplab::numerics;

namespace {

double rel_err(double got, double want) {
    return std::abs(got - want) / std::max(1e-300, std::abs(want));
}

std::pair<double, double> normal(double x) { return num::normal_pdf_cdf(x); }

}  // namespace

TEST_CASE("hw_qbar against the extended-precision oracle") {
    CHECK(rel_err(hw_qbar(1.0), 0.22336127479826074) < 1e-12);
    CHECK(rel_err(hw_qbar(0.01), 98.752384945439642) < 1e-12);
    CHECK(rel_err(hw_qbar(0.5), 1.0090772819958900) < 1e-12);
    CHECK_THROWS_AS(hw_qbar(0.0), num::DomainError);
    CHECK_THROWS_AS(hw_qbar(-1.0), num::DomainError);
}

TEST_CASE("hw_qbar positive, strictly decreasing, vanishing tail") {
    double prev = 1e300;
    for (int i = 0; i < 1000; ++i) {
        const double x = 0.01 + 8.0 * i / 1000.0;
        const double v = hw_qbar(x);
        CHECK(v > 0.0);
        CHECK(v < prev);
        prev = v;
    }
    CHECK(hw_qbar(30.0) < 1e-10);
}

TEST_CASE("hw_qhat against the extended-precision oracle") {
    CHECK(rel_err(hw_qhat(1.0), 0.14059247335225647) < 1e-12);
    CHECK(rel_err(hw_qhat(0.5), 0.23086522383054468) < 1e-12);
    CHECK(rel_err(hw_qhat(2.0), 0.031241154893327224) < 1e-12);
    // Regression snapshot for the far tail.
    CHECK(rel_err(hw_qhat(5.0), 1.3876048508463815e-06) < 1e-11);
    for (double x : {0.1, 0.5, 1.0, 2.0, 5.0}) CHECK(hw_qhat(x) > 0.0);
}

TEST_CASE("hw_expansion wiring") {
    const auto spec = hw_expansion(1.0, {1.0, 1.0});
    CHECK(spec.model_tag == "mmn-hw");
    CHECK(spec.a_of_n(100.0) == doctest::Approx(100.0));
    CHECK(spec.b_of_n(100.0) == doctest::Approx(10.0));
    CHECK(spec.c_of_n(100.0) == doctest::Approx(1.0));
    CHECK(rel_err(spec.pi_bar(1.0), 1.22336127479826074) < 1e-12);
    CHECK(spec.g_of_n(100.0, 0.5) == doctest::Approx(105.0));
    CHECK(spec.g_inverse(100.0, 105.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(spec.g_of_n(100.0, 0.0) == doctest::Approx(100.0));  // critical-load boundary
}

TEST_CASE("fluid_wbar closed forms") {
    const auto exp1 = exponential_patience(1.0);
    CHECK(rel_err(fluid_wbar(0.5, 1.0, exp1), std::log(2.0)) < 1e-12);
    CHECK(fluid_wbar(1.0, 1.0, exp1) == 0.0);
    CHECK(fluid_wbar(3.0, 1.0, exp1) == 0.0);
    // x = 0 hits the documented survival cap.
    CHECK(fluid_wbar(0.0, 1.0, exp1) == doctest::Approx(-std::log(1e-12)).epsilon(1e-12));
}

TEST_CASE("fluid_qbar closed forms") {
    const auto exp1 = exponential_patience(1.0);
    CHECK(rel_err(fluid_qbar(0.5, 1.0, exp1), 0.5) < 1e-12);
    CHECK(fluid_qbar(1.0, 1.0, exp1) == 0.0);
    const auto exp2 = exponential_patience(2.0);
    CHECK(rel_err(fluid_qbar(0.25, 1.0, exp2), 0.375) < 1e-12);
    // Exponential closed form matches the fluid identity (1 - x mu)/gamma.
    for (double x = 0.05; x < 1.0; x += 0.05)
        CHECK(rel_err(fluid_qbar(x, 1.0, exp2), (1.0 - x) / 2.0) < 1e-12);
}

TEST_CASE("fluid_qbar by quadrature for hyperexponential patience") {
    const auto hyp = hyperexponential_patience(0.3, 0.5, 2.0);
    CHECK(hyp.mean == doctest::Approx(0.95).epsilon(1e-12));
    CHECK(rel_err(fluid_wbar(0.6, 1.0, hyp), 0.34932672513671448) < 1e-9);
    CHECK(rel_err(fluid_qbar(0.6, 1.0, hyp), 0.27211715255196904) < 1e-9);
}

TEST_CASE("fluid_qhat conventions") {
    const auto exp1 = exponential_patience(1.0);
    // Default (utilization) convention collapses to zero for exponential patience.
    for (double x : {0.1, 0.3, 0.5, 0.9})
        CHECK(std::abs(fluid_qhat(x, 1.0, exp1)) < 1e-12);
    CHECK(fluid_qhat(0.5, 1.0, exp1, RhoConvention::Unit) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK_THROWS_AS(fluid_qhat(1.0, 1.0, exp1), RegimeError);
    CHECK_THROWS_AS(fluid_qhat(1.5, 1.0, exp1), RegimeError);
}

TEST_CASE("fluid_qhat hyperexponential against the extended-precision oracle") {
    const auto hyp = hyperexponential_patience(0.3, 0.5, 2.0);
    CHECK(rel_err(fluid_qhat(0.6, 1.0, hyp), 0.14595794014244850) < 1e-8);
    CHECK(rel_err(fluid_qhat(0.6, 1.0, hyp, RhoConvention::Unit), 0.57659656690408084) < 1e-8);
}

TEST_CASE("patience inverse survival round-trips") {
    for (const auto& d : {exponential_patience(0.7), hyperexponential_patience(0.4, 0.3, 3.0)}) {
        for (double w : {0.0, 0.1, 0.5, 1.0, 3.0, 8.0}) {
            const double u = d.survival(w);
            CHECK(std::abs(d.inverse_survival(u) - w) < 1e-9 * (1.0 + w));
        }
        CHECK(d.survival(0.0) == doctest::Approx(1.0));
    }
}

TEST_CASE("fluid_expansion argmin regimes (linear closed forms)") {
    const auto exp1 = exponential_patience(1.0);
    // h=2, c=1: pi_bar = x + 2(1-x) decreasing on [0,1], argmin at 1/mu.
    const auto crit = fluid_expansion(1.0, {2.0, 1.0}, exp1);
    REQUIRE(crit.critical_x.has_value());
    CHECK(*crit.critical_x == doctest::Approx(1.0));
    for (double x = 0.0; x < 0.95; x += 0.05)
        CHECK(crit.pi_bar(x + 0.05) < crit.pi_bar(x));
    // h=0.5: pi_bar = x + 0.5(1-x) increasing, argmin at 0.
    const auto under = fluid_expansion(1.0, {0.5, 1.0}, exp1);
    for (double x = 0.0; x < 1.4; x += 0.05)
        CHECK(under.pi_bar(x + 0.05) > under.pi_bar(x));
    // h=0 degenerates the waiting term entirely.
    const auto zero = fluid_expansion(1.0, {0.0, 1.0}, exp1);
    CHECK(zero.pi_bar(0.0) == doctest::Approx(0.0));
    CHECK(zero.pi_bar(0.5) == doctest::Approx(0.5));
    CHECK(crit.g_of_n(100.0, 0.8) == doctest::Approx(80.0));
    CHECK(crit.g_inverse(100.0, 80.0) == doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("erlang_a_H anchors") {
    CHECK(rel_err(erlang_a_H(0.0, 1.0, 1.0), 0.79788456080286536) < 1e-12);
    CHECK(rel_err(erlang_a_H(0.0, 3.0, 0.2), 0.79788456080286536) < 1e-12);
    for (double x : {-2.0, -0.5, 0.0, 0.5, 2.0})
        CHECK(erlang_a_H(x, 1.0, 1.0) == doctest::Approx(gaplab::numerics::hazard(x)).epsilon(1e-14));
    // Scaled Mills inequality guards the qhat1 reciprocal.
    for (double x = -6.0; x <= 6.0; x += 0.1) {
        for (auto [mu, g] : std::vector<std::pair<double, double>>{{1.0, 1.0}, {2.0, 0.5}, {0.5, 3.0}})
            CHECK(std::sqrt(g / mu) * erlang_a_H(x, mu, g) - x > 0.0);
    }
}

TEST_CASE("erlang_a_Astar identities") {
    CHECK(erlang_a_Astar(0.0, 1.0, 1.0) == doctest::Approx(0.5).epsilon(1e-14));
    for (double x = -5.0; x <= 5.0; x += 0.25) {
        // gamma = mu: Astar(x) = Phi(-x).
        CHECK(rel_err(erlang_a_Astar(x, 2.0, 2.0), normal(-x).second) < 1e-12);
        CHECK(erlang_a_Astar(x, 1.0, 0.5) > 0.0);
        CHECK(erlang_a_Astar(x, 1.0, 0.5) < 1.0);
    }
    CHECK(erlang_a_Astar(-30.0, 1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rel_err(erlang_a_Astar(1.0, 2.0, 0.5), 0.19508781812259666) < 1e-12);
}

TEST_CASE("erlang_a_qbar1 identity at gamma = mu") {
    CHECK(rel_err(erlang_a_qbar1(0.0, 1.0, 1.0), 0.39894228040143268) < 1e-12);
    CHECK(rel_err(erlang_a_qbar1(1.0, 1.0, 1.0), 0.083315470587686298) < 1e-12);
    for (double x = -5.0; x <= 5.0; x += 0.125) {
        auto [pdf, cdf_neg] = normal(-x);
        (void)cdf_neg;
        const double want = normal(x).first - x * normal(-x).second;
        CHECK(std::abs(erlang_a_qbar1(x, 3.0, 3.0) - want) < 1e-12 * (1.0 + std::abs(want)));
        CHECK(erlang_a_qbar1(x, 3.0, 3.0) > 0.0);
    }
    CHECK(erlang_a_qbar1(40.0, 1.0, 1.0) < 1e-10);
    CHECK(rel_err(erlang_a_qbar1(1.0, 2.0, 0.5), 0.14561960797574076) < 1e-12);
}

TEST_CASE("erlang_a_qhat1 against the extended-precision oracle") {
    CHECK(std::abs(erlang_a_qhat1(0.0, 1.0, 1.0)) < 1e-15);
    CHECK(std::abs(erlang_a_qhat1(0.0, 2.0, 0.3)) < 1e-15);
    CHECK(rel_err(erlang_a_qhat1(1.0, 1.0, 1.0), 0.040328454086523892) < 1e-12);
    CHECK(rel_err(erlang_a_qhat1(0.5, 1.0, 1.0), 0.029338777230358290) < 1e-12);
    CHECK(rel_err(erlang_a_qhat1(-2.0, 1.0, 1.0), -0.017996988837729351) < 1e-12);
    CHECK(rel_err(erlang_a_qhat1(1.0, 2.0, 0.5), 0.15773608462288293) < 1e-12);
}

TEST_CASE("erlang_a_qhat1 has no poles on [-3, 3]") {
    double prev = erlang_a_qhat1(-3.0, 1.0, 2.0);
    for (int i = 1; i <= 600; ++i) {
        const double x = -3.0 + 6.0 * i / 600.0;
        const double v = erlang_a_qhat1(x, 1.0, 2.0);
        CHECK(std::isfinite(v));
        CHECK(std::abs(v - prev) < 0.1);  // continuity at grid resolution
        prev = v;
    }
}

TEST_CASE("erlang_a_diffusion_expansion structure") {
    const auto spec = erlang_a_diffusion_expansion(1.0, 1.0, {1.0, 1.0});
    CHECK(spec.domain_lo(100.0) == doctest::Approx(-10.0));
    CHECK(spec.domain_lo(400.0) < spec.domain_lo(100.0));  // nested domains
    CHECK(spec.g_of_n(100.0, spec.domain_lo(100.0)) == doctest::Approx(0.0));  // zero servers
    // h = c, gamma = mu: pi_bar_1 is monotone increasing (derivative
    // c - h*Phi(-x) > 0), so no interior minimizer exists for this instance.
    double prev = spec.pi_bar(-6.0);
    for (int i = 1; i <= 240; ++i) {
        const double x = -6.0 + 12.0 * i / 240.0;
        const double v = spec.pi_bar(x);
        CHECK(v > prev);
        prev = v;
    }
    // c < h gives the interior minimizer at Phi(-x) = c/h, i.e. x = 0 for c = h/2.
    const auto spec2 = erlang_a_diffusion_expansion(1.0, 1.0, {1.0, 0.5});
    const auto r = gaplab::numerics::minimize_scalar(spec2.pi_bar, {-6.0, 6.0});
    CHECK(std::abs(r.x) < 1e-6);
}

TEST_CASE("expansion structural invariants on the experiment grid") {
    const std::vector<double> n_grid{1e2, 1e3, 1e4, 1e5, 1e6};
    for (const auto& spec :
         {hw_expansion(1.0, {1.0, 1.0}),
          erlang_a_diffusion_expansion(1.0, 1.0, {1.0, 0.5}),
          fluid_expansion(1.0, {2.0, 1.0}, exponential_patience(1.0))}) {
        for (std::size_t i = 0; i + 1 < n_grid.size(); ++i) {
            CHECK(spec.b_of_n(n_grid[i + 1]) > spec.b_of_n(n_grid[i]));
            CHECK(spec.c_of_n(n_grid[i]) / spec.b_of_n(n_grid[i]) >=
                  spec.c_of_n(n_grid[i + 1]) / spec.b_of_n(n_grid[i + 1]));
            CHECK(spec.domain_lo(n_grid[i + 1]) <= spec.domain_lo(n_grid[i]));
        }
        for (double n : n_grid) {
            double prev = -1e300;
            for (double x = 0.1; x <= 2.0; x += 0.1) {
                const double u = spec.g_of_n(n, x);
                CHECK(u > prev);
                prev = u;
                CHECK(std::abs(spec.g_inverse(n, u) - x) < 1e-12 * (1.0 + x));
            }
        }
    }
}
