#include <cmath>
#include <cstdlib>
#include <map>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gaplab/experiments.hpp"

namespace xp = gaplab::experiments;
namespace pre = gaplab::prescription;

namespace {

bool verbose() {
    const char* v = std::getenv("GAPLAB_VERBOSE");
    return v != nullptr && std::string(v) != "0" && std::string(v) != "";
}

void log(const std::string& msg) {
    if (verbose()) std::cerr << "gaplab: " << msg << "\n";
}

// Every flag funnels through the same key=value channel the config file
// uses, so file values and flag overrides cannot drift apart.
struct ConfigBinding {
    std::string config_path;
    std::vector<std::pair<std::string, std::string>> values;  // key -> raw text
    std::vector<std::pair<std::string, CLI::Option*>> opts;
    bool refined = false;
    CLI::Option* refined_opt = nullptr;

    void attach(CLI::App* cmd) {
        // the long-only help flag frees "-h"/"--h" for the holding cost
        cmd->set_help_flag("--help", "print help");
        cmd->add_option("--config", config_path, "flat key = value config file");
        values.reserve(16);
        auto bind = [this, cmd](const std::string& key, const std::string& desc) {
            values.emplace_back(key, "");
            auto& slot = values.back().second;
            opts.emplace_back(key, cmd->add_option("--" + key, slot, desc));
        };
        bind("model", "mmn-hw | mmna-diffusion | mmng-fluid");
        bind("n", "single system scale n");
        bind("n-grid", "comma list of n values, strictly increasing");
        bind("mu", "service rate (default 1)");
        bind("gamma", "abandonment rate (mmna-diffusion)");
        bind("h", "holding cost rate (default 1)");
        bind("c", "staffing cost rate (default 1)");
        bind("alpha", "delay-probability target in (0,1)");
        bind("x", "comma list of scaled decisions");
        bind("rho-convention", "utilization | unit (fluid correction term)");
        bind("patience", "exp:rate | hyperexp:p,a,b");
        bind("out", "output file path (default stdout)");
        refined_opt = cmd->add_flag("--refined", refined, "also run the finite-n refinement");
    }

    xp::ExperimentConfig resolve() const {
        xp::ExperimentConfig cfg;
        if (!config_path.empty()) xp::load_config_file(config_path, cfg);
        for (size_t i = 0; i < opts.size(); ++i)
            if (opts[i].second->count() > 0)
                xp::apply_config_entry(opts[i].first, values[i].second, cfg);
        if (refined_opt->count() > 0) cfg.refined = refined;
        return cfg;
    }
};

void write_result(const xp::ExperimentConfig& cfg, const xp::RunResult& res) {
    const std::string text = xp::emit_csv(res.table);
    if (cfg.output_path.empty()) {
        std::cout << text;
    } else {
        xp::write_text_file(cfg.output_path, text);
    }
    if (res.warnings > 0)
        std::cerr << "gaplab: " << res.warnings << " flagged row(s)\n";
}

int run_prescribe(const xp::ExperimentConfig& cfg) {
    const auto spec = xp::build_spec(cfg);
    const auto p = pre::select_prescription(spec, xp::probe_bracket(cfg));
    std::cout << "model=" << cfg.model << "\n"
              << "x_star=" << xp::format_number(p.x_star) << "\n"
              << "pi_bar=" << xp::format_number(p.pi_bar_value) << "\n"
              << "pi_hat=" << xp::format_number(p.pi_hat_value) << "\n";
    std::cout << "argmin_set=";
    for (size_t i = 0; i < p.argmin_set.size(); ++i)
        std::cout << (i ? ";" : "") << xp::format_number(p.argmin_set[i]);
    std::cout << "\nflags=";
    for (size_t i = 0; i < p.regime_flags.size(); ++i)
        std::cout << (i ? ";" : "") << p.regime_flags[i];
    std::cout << "\n";
    if (cfg.refined) {
        for (double n : cfg.n_grid)
            std::cout << "refined_x[" << xp::format_number(n) << "]="
                      << xp::format_number(
                             pre::refined_prescription(spec, n, xp::probe_bracket(cfg)))
                      << "\n";
    }
    return 0;
}

int run_evaluate(const xp::ExperimentConfig& cfg) {
    if (cfg.n_grid.empty()) throw xp::ConfigError("evaluate requires --n");
    if (cfg.x_probe.empty()) throw xp::ConfigError("evaluate requires --x");
    const auto spec = xp::build_spec(cfg);
    const auto exact = xp::build_exact_evaluator(cfg);
    std::cout << "n,x,staffing,expected_queue,cost\n";
    for (double n : cfg.n_grid) {
        for (double x : cfg.x_probe) {
            double u = spec.g_of_n(n, x);
            if (exact.integer_staffing) u = std::round(u);
            const double eq = exact.expected_queue(n, u);
            std::cout << xp::format_number(n) << "," << xp::format_number(x) << ","
                      << xp::format_number(u) << "," << xp::format_number(eq) << ","
                      << xp::format_number(cfg.h * eq + cfg.c * u) << "\n";
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"asymptotic staffing prescriptions and their exact optimality gaps"};
    app.require_subcommand(1);

    struct Sub {
        CLI::App* cmd;
        ConfigBinding bind;
    };
    std::map<std::string, Sub> subs;
    for (const char* name : {"prescribe", "evaluate", "gap-table", "approx-check",
                             "constrained"}) {
        auto* cmd = app.add_subcommand(name, "");
        subs[name].cmd = cmd;
        subs[name].bind.attach(cmd);
    }
    subs["prescribe"].cmd->description("select the scale-free decision x*");
    subs["evaluate"].cmd->description("exact performance at a given n and x");
    subs["gap-table"].cmd->description("optimality gap of the prescription over an n grid");
    subs["approx-check"].cmd->description("expansion residuals against exact evaluation");
    subs["constrained"].cmd->description("square-root vs exact constrained staffing");

    std::string plot_csv, plot_out;
    auto* plot = app.add_subcommand("plot-script", "emit a plotting script for a CSV");
    plot->add_option("csv", plot_csv, "input CSV path")->required();
    plot->add_option("--out", plot_out, "script output path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (plot->parsed()) {
            xp::emit_plot_script(plot_csv, plot_out);
            return 0;
        }
        for (auto& [name, sub] : subs) {
            if (!sub.cmd->parsed()) continue;
            log("running " + name);
            const auto cfg = sub.bind.resolve();
            if (name == "prescribe") return run_prescribe(cfg);
            if (name == "evaluate") return run_evaluate(cfg);
            xp::RunResult res;
            if (name == "gap-table") {
                res = xp::run_gap_table(cfg);
            } else if (name == "approx-check") {
                res = xp::run_approx_check(cfg);
            } else {
                res = xp::run_constrained_report(cfg);
            }
            write_result(cfg, res);
            log(name + " done");
            return 0;
        }
    } catch (const xp::ConfigError& e) {
        std::cerr << "gaplab: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "gaplab: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
