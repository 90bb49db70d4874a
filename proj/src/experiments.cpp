#include "gaplab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace gaplab::experiments {

namespace exq = exact_queues;
namespace exs = expansions;
namespace pre = prescription;

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& s, const std::string& what) {
    try {
        size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(what + ": cannot parse number '" + s + "'");
    }
}

std::vector<double> parse_list(const std::string& s, const std::string& what) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = trim(tok);
        if (!tok.empty()) out.push_back(parse_double(tok, what));
    }
    if (out.empty()) throw ConfigError(what + ": empty list");
    return out;
}

std::string join_flags(const std::vector<std::string>& flags) {
    std::string out;
    for (size_t i = 0; i < flags.size(); ++i) {
        if (i) out += ';';
        out += flags[i];
    }
    return out;
}

exs::PatienceDist make_patience(const PatienceSpec& p) {
    if (p.family == "exp") return exs::exponential_patience(p.gamma);
    if (p.family == "hyperexp") return exs::hyperexponential_patience(p.p, p.a, p.b);
    throw ConfigError("unknown patience family '" + p.family + "'");
}

// Abandonment rate of the exact M/M/N+M evaluator backing each model, when
// one exists.
std::optional<double> exact_gamma(const ExperimentConfig& cfg) {
    if (cfg.model == "mmna-diffusion") {
        if (!cfg.gamma) throw ConfigError("mmna-diffusion requires gamma");
        return *cfg.gamma;
    }
    if (cfg.model == "mmng-fluid" && cfg.patience.family == "exp") return cfg.patience.gamma;
    return std::nullopt;
}

}  // namespace

void apply_config_entry(const std::string& key, const std::string& value,
                        ExperimentConfig& cfg) {
    if (key == "model") {
        cfg.model = value;
    } else if (key == "n") {
        cfg.n_grid = {parse_double(value, key)};
    } else if (key == "n_grid" || key == "n-grid") {
        cfg.n_grid = parse_list(value, key);
    } else if (key == "mu") {
        cfg.mu = parse_double(value, key);
    } else if (key == "gamma") {
        cfg.gamma = parse_double(value, key);
    } else if (key == "h") {
        cfg.h = parse_double(value, key);
    } else if (key == "c") {
        cfg.c = parse_double(value, key);
    } else if (key == "alpha") {
        cfg.alpha = parse_double(value, key);
    } else if (key == "x" || key == "x_probe") {
        cfg.x_probe = parse_list(value, key);
    } else if (key == "refined") {
        if (value == "true" || value == "1") {
            cfg.refined = true;
        } else if (value == "false" || value == "0") {
            cfg.refined = false;
        } else {
            throw ConfigError("refined: expected true/false, got '" + value + "'");
        }
    } else if (key == "rho_convention" || key == "rho-convention") {
        if (value == "utilization") {
            cfg.rho_convention = exs::RhoConvention::Utilization;
        } else if (value == "unit") {
            cfg.rho_convention = exs::RhoConvention::Unit;
        } else {
            throw ConfigError("rho-convention: expected utilization|unit, got '" + value + "'");
        }
    } else if (key == "patience") {
        // exp:rate  or  hyperexp:p,a,b
        const auto colon = value.find(':');
        if (colon == std::string::npos) throw ConfigError("patience: expected family:params");
        PatienceSpec p;
        p.family = trim(value.substr(0, colon));
        const auto params = parse_list(value.substr(colon + 1), "patience");
        if (p.family == "exp" && params.size() == 1) {
            p.gamma = params[0];
        } else if (p.family == "hyperexp" && params.size() == 3) {
            p.p = params[0];
            p.a = params[1];
            p.b = params[2];
        } else {
            throw ConfigError("patience: bad spec '" + value + "'");
        }
        cfg.patience = p;
    } else if (key == "out" || key == "output") {
        cfg.output_path = value;
    } else {
        throw ConfigError("unknown config key '" + key + "'");
    }
}

void load_config_file(const std::string& path, ExperimentConfig& cfg) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
        apply_config_entry(trim(line.substr(0, eq)), trim(line.substr(eq + 1)), cfg);
    }
}

void validate(const ExperimentConfig& cfg) {
    if (cfg.model != "mmn-hw" && cfg.model != "mmna-diffusion" && cfg.model != "mmng-fluid")
        throw ConfigError("unknown model '" + cfg.model + "'");
    if (cfg.n_grid.empty()) throw ConfigError("n_grid is required");
    for (size_t i = 0; i < cfg.n_grid.size(); ++i) {
        if (!(cfg.n_grid[i] > 0)) throw ConfigError("n_grid entries must be positive");
        if (i && !(cfg.n_grid[i] > cfg.n_grid[i - 1]))
            throw ConfigError("n_grid must be strictly increasing");
    }
    if (!(cfg.mu > 0)) throw ConfigError("mu must be positive");
    if (cfg.h < 0 || cfg.c < 0) throw ConfigError("costs must be nonnegative");
    if (cfg.alpha && !(*cfg.alpha > 0 && *cfg.alpha < 1))
        throw ConfigError("alpha must lie in (0,1)");
    if (cfg.model == "mmna-diffusion" && !cfg.gamma)
        throw ConfigError("mmna-diffusion requires gamma");
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string emit_csv(const CsvTable& table) {
    std::string out;
    auto emit_row = [&out](const std::vector<std::string>& row) {
        for (size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += row[i];
        }
        out += '\n';
    };
    emit_row(table.header);
    for (const auto& row : table.rows) emit_row(row);
    return out;
}

CsvTable parse_csv(const std::string& text) {
    CsvTable table;
    std::stringstream ss(text);
    std::string line;
    bool first = true;
    while (std::getline(ss, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::vector<std::string> row;
        std::string field;
        std::stringstream ls(line);
        while (std::getline(ls, field, ',')) row.push_back(field);
        if (line.empty() || line.back() == ',') row.push_back("");
        if (first) {
            table.header = row;
            first = false;
        } else {
            table.rows.push_back(row);
        }
    }
    return table;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open output file '" + path + "'");
    out << text;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

exs::ExpansionSpec build_spec(const ExperimentConfig& cfg) {
    const exq::CostParams cost{cfg.h, cfg.c};
    if (cfg.model == "mmn-hw") return exs::hw_expansion(cfg.mu, cost);
    if (cfg.model == "mmna-diffusion") {
        if (!cfg.gamma) throw ConfigError("mmna-diffusion requires gamma");
        return exs::erlang_a_diffusion_expansion(cfg.mu, *cfg.gamma, cost);
    }
    if (cfg.model == "mmng-fluid")
        return exs::fluid_expansion(cfg.mu, cost, make_patience(cfg.patience),
                                    cfg.rho_convention);
    throw ConfigError("unknown model '" + cfg.model + "'");
}

pre::ExactEvaluator build_exact_evaluator(const ExperimentConfig& cfg) {
    pre::ExactEvaluator e;
    if (cfg.model == "mmn-hw") {
        const double mu = cfg.mu;
        e.expected_queue = [mu](double n, double u) {
            return exq::mmn_expected_queue({n, mu, {}}, u);
        };
        e.integer_staffing = false;
        return e;
    }
    const auto gamma = exact_gamma(cfg);
    if (!gamma)
        throw ConfigError("no exact evaluator for model '" + cfg.model + "' with " +
                          cfg.patience.family + " patience");
    const double mu = cfg.mu, g = *gamma;
    e.expected_queue = [mu, g](double n, double u) {
        return exq::erlang_a_expected_queue({n, mu, g}, std::lround(u));
    };
    e.integer_staffing = true;
    return e;
}

exq::ExactOptimum exact_optimum(const ExperimentConfig& cfg, double n) {
    const exq::CostParams cost{cfg.h, cfg.c};
    if (cfg.model == "mmn-hw") return exq::mmn_optimal({n, cfg.mu, {}}, cost);
    const auto gamma = exact_gamma(cfg);
    if (!gamma)
        throw ConfigError("no exact optimum for model '" + cfg.model + "' with " +
                          cfg.patience.family + " patience");
    const exq::QueueParams q{n, cfg.mu, *gamma};
    long window = static_cast<long>(std::max(10.0, std::ceil(5.0 * std::sqrt(n / cfg.mu))));
    for (int attempt = 0; attempt < 8; ++attempt) {
        try {
            return exq::erlang_a_optimal_integer(q, cost, window);
        } catch (const exq::WindowTooSmallError&) {
            window *= 4;
        }
    }
    return exq::erlang_a_optimal_integer(q, cost, window);
}

numerics::Bracket probe_bracket(const ExperimentConfig& cfg) {
    if (cfg.model == "mmna-diffusion") return {-8.0, 8.0};
    if (cfg.model == "mmng-fluid") return {1e-4, 3.0 / cfg.mu};
    return {1e-4, 50.0};
}

RunResult run_gap_table(const ExperimentConfig& cfg) {
    validate(cfg);
    RunResult res;
    res.table.header = {"n",       "model",          "x_star",           "variant",
                        "staffing", "cost_prescribed", "staffing_optimal", "cost_optimal",
                        "gap",     "normalized_gap", "flags"};

    const auto spec = build_spec(cfg);
    const auto bracket = probe_bracket(cfg);
    const exq::CostParams cost{cfg.h, cfg.c};
    const auto presc = pre::select_prescription(spec, bracket);

    pre::ExactEvaluator exact;
    bool has_exact = true;
    try {
        exact = build_exact_evaluator(cfg);
    } catch (const ConfigError&) {
        has_exact = false;
    }

    std::vector<std::pair<double, double>> plain_gaps, refined_gaps;
    auto emit = [&](double n, double x, const std::string& variant) {
        std::vector<std::string> flags;
        pre::GapRecord rec{n, kNan, kNan, kNan, kNan, kNan, kNan, {}};
        if (!has_exact) {
            flags.push_back("no-exact-evaluator");
            ++res.warnings;
        } else {
            try {
                const auto opt = exact_optimum(cfg, n);
                rec = pre::optimality_gap(spec, exact, cost, opt, n, x);
                flags = rec.flags;
                if (std::isnan(rec.gap)) ++res.warnings;
            } catch (const std::exception&) {
                flags.push_back("optimum-evaluation-failed");
                ++res.warnings;
            }
        }
        if (std::isfinite(rec.gap)) {
            (variant == "plain" ? plain_gaps : refined_gaps).emplace_back(n, rec.gap);
        }
        res.table.rows.push_back({format_number(n), cfg.model, format_number(x), variant,
                                  format_number(rec.staffing_prescribed),
                                  format_number(rec.cost_prescribed),
                                  format_number(rec.staffing_optimal),
                                  format_number(rec.cost_optimal), format_number(rec.gap),
                                  format_number(rec.normalized_gap), join_flags(flags)});
    };

    for (double n : cfg.n_grid) {
        emit(n, presc.x_star, "plain");
        if (cfg.refined) emit(n, pre::refined_prescription(spec, n, bracket), "refined");
    }

    auto summary = [&](const std::vector<std::pair<double, double>>& gaps,
                       const std::string& variant) {
        double slope = kNan, r2 = kNan;
        std::string flag = "summary";
        try {
            const auto fit = pre::rate_fit(gaps);
            slope = fit.slope;
            r2 = fit.r_squared;
        } catch (const pre::InsufficientDataError&) {
            flag = "summary;insufficient-data";
        }
        res.table.rows.push_back({"nan", cfg.model, format_number(presc.x_star), variant,
                                  "nan", "nan", "nan", "nan", format_number(slope),
                                  format_number(r2), flag});
    };
    summary(plain_gaps, "rate-fit");
    if (cfg.refined) summary(refined_gaps, "rate-fit-refined");
    return res;
}

RunResult run_approx_check(const ExperimentConfig& cfg) {
    validate(cfg);
    if (cfg.x_probe.empty()) throw ConfigError("approx-check requires an x probe list");
    if (!(cfg.h > 0)) throw ConfigError("approx-check requires h > 0");
    RunResult res;
    res.table.header = {"n", "x", "exact_EQ", "leading", "correction", "residual", "flags"};

    const auto spec = build_spec(cfg);
    const auto exact = build_exact_evaluator(cfg);
    // Queue-length terms recovered from the cost expansion: the staffing cost
    // c*x is shared by both sides, so E[Q] = b_n qbar + qhat + e_n with
    // qbar = (pi_bar - c x)/h and qhat = pi_hat/h.
    auto qbar = [&](double x) { return (spec.pi_bar(x) - cfg.c * x) / cfg.h; };
    auto qhat = [&](double x) { return spec.pi_hat(x) / cfg.h; };

    std::map<double, std::vector<std::pair<double, double>>> residuals;
    for (double n : cfg.n_grid) {
        for (double x : cfg.x_probe) {
            std::vector<std::string> flags;
            double x_used = x;
            double u = spec.g_of_n(n, x);
            if (exact.integer_staffing) {
                u = std::round(u);
                x_used = spec.g_inverse(n, u);
                if (x_used != x) flags.push_back("lattice");
            }
            double eq = kNan, lead = kNan, corr = kNan, resid = kNan;
            try {
                eq = exact.expected_queue(n, u);
                lead = spec.b_of_n(n) * qbar(x_used);
                try {
                    corr = spec.c_of_n(n) * qhat(x_used);
                    resid = eq - lead - corr;
                } catch (const exs::RegimeError&) {
                    flags.push_back("pi-hat-undefined");
                    resid = eq - lead;
                    ++res.warnings;
                }
                if (std::isfinite(resid)) residuals[x].emplace_back(n, std::abs(resid));
            } catch (const std::exception&) {
                flags.push_back("evaluation-failed");
                ++res.warnings;
            }
            res.table.rows.push_back({format_number(n), format_number(x_used),
                                      format_number(eq), format_number(lead),
                                      format_number(corr), format_number(resid),
                                      join_flags(flags)});
        }
    }
    for (const auto& [x, pts] : residuals) {
        double slope = kNan;
        std::string flag = "summary";
        try {
            slope = pre::rate_fit(pts).slope;
        } catch (const pre::InsufficientDataError&) {
            flag = "summary;insufficient-data";
        }
        res.table.rows.push_back(
            {"nan", format_number(x), "nan", "nan", "nan", format_number(slope), flag});
    }
    return res;
}

RunResult run_constrained_report(const ExperimentConfig& cfg) {
    validate(cfg);
    if (!cfg.alpha) throw ConfigError("constrained report requires alpha");
    const double alpha = *cfg.alpha;
    RunResult res;
    res.table.header = {"n", "alpha", "x_star", "staffing_sqrt", "staffing_exact",
                        "server_gap"};

    // Halfin-Whitt delay formula: P(wait) -> (1 + x Phi(x)/phi(x))^-1 = alpha.
    const double target = 1.0 / alpha - 1.0;
    double x_star = 0.0;
    if (target > 0.0) {
        x_star = numerics::find_root(
            [target](double x) { return x * numerics::mills_ratio(x) - target; }, {0.0, 38.0});
    }

    for (double n : cfg.n_grid) {
        const double r = n / cfg.mu;
        const long sqrt_staff =
            static_cast<long>(std::ceil(r + std::sqrt(r) * x_star));
        const long exact_staff = exq::mmn_min_servers_wait_prob({n, cfg.mu, {}}, alpha);
        res.table.rows.push_back(
            {format_number(n), format_number(alpha), format_number(x_star),
             format_number(static_cast<double>(sqrt_staff)),
             format_number(static_cast<double>(exact_staff)),
             format_number(static_cast<double>(sqrt_staff - exact_staff))});
    }
    return res;
}

void emit_plot_script(const std::string& csv_path, const std::string& script_path) {
    const auto table = parse_csv(read_text_file(csv_path));
    std::string kind;
    const auto& h = table.header;
    if (h.size() == 11 && h[0] == "n" && h[1] == "model" && h[3] == "variant") {
        kind = "gap-table";
    } else if (h.size() == 7 && h[0] == "n" && h[1] == "x" && h[2] == "exact_EQ") {
        kind = "approx-check";
    } else if (h.size() == 6 && h[0] == "n" && h[1] == "alpha" && h[3] == "staffing_sqrt") {
        kind = "constrained";
    } else {
        throw ConfigError("unrecognized CSV schema in '" + csv_path + "'");
    }

    namespace fs = std::filesystem;
    std::string rel;
    try {
        rel = fs::relative(fs::path(csv_path),
                           fs::absolute(fs::path(script_path)).parent_path())
                  .string();
    } catch (const std::exception&) {
        rel = csv_path;
    }
    if (rel.empty()) rel = csv_path;

    const bool empty_data = table.rows.empty();
    std::ostringstream s;
    s << "#!/usr/bin/env python3\n";
    if (empty_data) s << "# warning: source CSV has no data rows; plot will be empty\n";
    s << "import csv\nimport math\n\nimport matplotlib.pyplot as plt\n\n"
      << "rows = []\nwith open(" << '"' << rel << '"' << ", newline=\"\") as f:\n"
      << "    for row in csv.DictReader(f):\n        rows.append(row)\n\n"
      << "def num(s):\n    try:\n        return float(s)\n"
      << "    except ValueError:\n        return math.nan\n\n";
    if (kind == "gap-table") {
        s << "fig, ax = plt.subplots()\n"
          << "for variant in (\"plain\", \"refined\"):\n"
          << "    pts = [(num(r[\"n\"]), num(r[\"gap\"])) for r in rows\n"
          << "           if r[\"variant\"] == variant]\n"
          << "    pts = [(n, g) for n, g in pts if g > 0 and math.isfinite(n)]\n"
          << "    if not pts:\n        continue\n"
          << "    ax.loglog(*zip(*pts), marker=\"o\", label=variant)\n"
          << "fits = [r for r in rows if r[\"variant\"].startswith(\"rate-fit\")]\n"
          << "if fits:\n"
          << "    slopes = \", \".join(\"%s slope=%s\" % (r[\"variant\"], r[\"gap\"]) for r in fits)\n"
          << "    ax.set_title(\"optimality gap vs n (\" + slopes + \")\")\n"
          << "else:\n    ax.set_title(\"optimality gap vs n\")\n"
          << "ax.set_xlabel(\"n\")\nax.set_ylabel(\"gap\")\nax.legend()\n";
    } else if (kind == "approx-check") {
        s << "fig, ax = plt.subplots()\n"
          << "xs = sorted({r[\"x\"] for r in rows if \"summary\" not in r[\"flags\"]})\n"
          << "for x in xs:\n"
          << "    pts = [(num(r[\"n\"]), abs(num(r[\"residual\"]))) for r in rows\n"
          << "           if r[\"x\"] == x and \"summary\" not in r[\"flags\"]]\n"
          << "    pts = [(n, e) for n, e in pts if e > 0 and math.isfinite(n)]\n"
          << "    if not pts:\n        continue\n"
          << "    ax.loglog(*zip(*pts), marker=\"o\", label=\"x=\" + x)\n"
          << "ax.set_title(\"expansion residual vs n\")\n"
          << "ax.set_xlabel(\"n\")\nax.set_ylabel(\"|residual|\")\nax.legend()\n";
    } else {
        s << "fig, ax = plt.subplots()\n"
          << "pts = [(num(r[\"n\"]), num(r[\"server_gap\"])) for r in rows]\n"
          << "if pts:\n    ax.semilogx(*zip(*pts), marker=\"o\")\n"
          << "ax.set_title(\"square-root minus exact staffing\")\n"
          << "ax.set_xlabel(\"n\")\nax.set_ylabel(\"server gap\")\n";
    }
    s << "fig.tight_layout()\nplt.show()\n";
    write_text_file(script_path, s.str());
}

}  // namespace gaplab::experiments
