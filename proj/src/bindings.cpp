#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gaplab/experiments.hpp"

namespace py = pybind11;
namespace num = gaplab::numerics;
namespace exq = gaplab::exact_queues;
namespace exs = gaplab::expansions;
namespace pre = gaplab::prescription;
namespace xp = gaplab::experiments;

namespace {

// Shared keyword plumbing for the experiment-level entry points.
xp::ExperimentConfig make_config(const std::string& model, const std::vector<double>& n_grid,
                                 double mu, std::optional<double> gamma, double h, double c,
                                 const std::string& patience, const std::string& rho,
                                 bool refined, std::optional<double> alpha,
                                 const std::vector<double>& x) {
    xp::ExperimentConfig cfg;
    xp::apply_config_entry("model", model, cfg);
    cfg.n_grid = n_grid;
    cfg.mu = mu;
    cfg.gamma = gamma;
    cfg.h = h;
    cfg.c = c;
    xp::apply_config_entry("patience", patience, cfg);
    xp::apply_config_entry("rho-convention", rho, cfg);
    cfg.refined = refined;
    cfg.alpha = alpha;
    cfg.x_probe = x;
    return cfg;
}

}  // namespace

PYBIND11_MODULE(gaplab, m) {
    m.doc() = "asymptotic staffing prescriptions and exact queueing evaluators";

    py::register_exception<xp::ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<exq::InstabilityError>(m, "InstabilityError", PyExc_ValueError);
    py::register_exception<num::DomainError>(m, "DomainError", PyExc_ValueError);

    m.def("mills_ratio", &num::mills_ratio, py::arg("x"),
          "Phi(x)/phi(x), stable across the whole real line");
    m.def("hazard", &num::hazard, py::arg("x"), "phi(x)/Phi(-x)");

    m.def("erlang_c_integer", &exq::erlang_c_integer, py::arg("servers"), py::arg("load"));
    m.def(
        "erlang_c_real",
        [](double x, double load) { return exq::erlang_c_real(x, load); }, py::arg("servers"),
        py::arg("load"), "real-server extension of the Erlang-C delay probability");
    m.def(
        "mmn_expected_queue",
        [](double n, double mu, double servers) {
            return exq::mmn_expected_queue({n, mu, {}}, servers);
        },
        py::arg("n"), py::arg("mu"), py::arg("servers"));
    m.def(
        "mmn_optimal",
        [](double n, double mu, double h, double c) {
            const auto o = exq::mmn_optimal({n, mu, {}}, {h, c});
            return py::make_tuple(o.staffing, o.cost);
        },
        py::arg("n"), py::arg("mu"), py::arg("h"), py::arg("c"),
        "returns (staffing, cost) minimizing h*E[Q] + c*servers");
    m.def(
        "mmn_min_servers_wait_prob",
        [](double n, double mu, double alpha) {
            return exq::mmn_min_servers_wait_prob({n, mu, {}}, alpha);
        },
        py::arg("n"), py::arg("mu"), py::arg("alpha"));
    m.def(
        "erlang_a_expected_queue",
        [](double n, double mu, double gamma, long servers) {
            return exq::erlang_a_expected_queue({n, mu, gamma}, servers);
        },
        py::arg("n"), py::arg("mu"), py::arg("gamma"), py::arg("servers"));
    m.def(
        "erlang_a_optimal",
        [](double n, double mu, double gamma, double h, double c) {
            const auto o = exq::erlang_a_optimal_integer({n, mu, gamma}, {h, c});
            return py::make_tuple(o.staffing, o.cost);
        },
        py::arg("n"), py::arg("mu"), py::arg("gamma"), py::arg("h"), py::arg("c"));

    m.def("hw_qbar", &exs::hw_qbar, py::arg("x"));
    m.def("hw_qhat", &exs::hw_qhat, py::arg("x"));
    m.def("erlang_a_qbar1", &exs::erlang_a_qbar1, py::arg("x"), py::arg("mu"),
          py::arg("gamma"));
    m.def("erlang_a_qhat1", &exs::erlang_a_qhat1, py::arg("x"), py::arg("mu"),
          py::arg("gamma"));

    m.def(
        "prescribe",
        [](const std::string& model, double mu, std::optional<double> gamma, double h,
           double c, const std::string& patience, const std::string& rho) {
            auto cfg = make_config(model, {1.0}, mu, gamma, h, c, patience, rho, false, {},
                                   {});
            const auto spec = xp::build_spec(cfg);
            const auto p = pre::select_prescription(spec, xp::probe_bracket(cfg));
            py::dict out;
            out["x_star"] = p.x_star;
            out["pi_bar"] = p.pi_bar_value;
            out["pi_hat"] = p.pi_hat_value;
            out["argmin_set"] = p.argmin_set;
            out["flags"] = p.regime_flags;
            return out;
        },
        py::arg("model"), py::arg("mu") = 1.0, py::arg("gamma") = std::nullopt,
        py::arg("h") = 1.0, py::arg("c") = 1.0, py::arg("patience") = "exp:1",
        py::arg("rho") = "utilization");

    m.def(
        "gap_table",
        [](const std::string& model, const std::vector<double>& n_grid, double mu,
           std::optional<double> gamma, double h, double c, const std::string& patience,
           const std::string& rho, bool refined) {
            const auto res = xp::run_gap_table(make_config(model, n_grid, mu, gamma, h, c,
                                                           patience, rho, refined, {}, {}));
            return py::make_tuple(xp::emit_csv(res.table), res.warnings);
        },
        py::arg("model"), py::arg("n_grid"), py::arg("mu") = 1.0,
        py::arg("gamma") = std::nullopt, py::arg("h") = 1.0, py::arg("c") = 1.0,
        py::arg("patience") = "exp:1", py::arg("rho") = "utilization",
        py::arg("refined") = false, "returns (csv_text, warning_count)");

    m.def(
        "approx_check",
        [](const std::string& model, const std::vector<double>& n_grid,
           const std::vector<double>& x, double mu, std::optional<double> gamma, double h,
           double c, const std::string& patience, const std::string& rho) {
            const auto res = xp::run_approx_check(
                make_config(model, n_grid, mu, gamma, h, c, patience, rho, false, {}, x));
            return py::make_tuple(xp::emit_csv(res.table), res.warnings);
        },
        py::arg("model"), py::arg("n_grid"), py::arg("x"), py::arg("mu") = 1.0,
        py::arg("gamma") = std::nullopt, py::arg("h") = 1.0, py::arg("c") = 1.0,
        py::arg("patience") = "exp:1", py::arg("rho") = "utilization");

    m.def(
        "constrained_report",
        [](const std::vector<double>& n_grid, double alpha, double mu) {
            auto cfg = make_config("mmn-hw", n_grid, mu, {}, 1.0, 1.0, "exp:1",
                                   "utilization", false, alpha, {});
            const auto res = xp::run_constrained_report(cfg);
            return xp::emit_csv(res.table);
        },
        py::arg("n_grid"), py::arg("alpha"), py::arg("mu") = 1.0);
}
