#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gaplab/exact_queues.hpp"
#include "gaplab/expansions.hpp"
#include "gaplab/prescription.hpp"

// Experiment configuration, the CSV-producing runners behind the CLI
// subcommands, and plot-script templating.

namespace gaplab::experiments {

struct PatienceSpec {
    std::string family = "exp";  // "exp" or "hyperexp"
    double gamma = 1.0;          // exp rate
    double p = 0.5, a = 1.0, b = 1.0;
};

struct ExperimentConfig {
    std::string model = "mmn-hw";  // mmn-hw | mmna-diffusion | mmng-fluid
    std::vector<double> n_grid;
    double mu = 1.0;
    std::optional<double> gamma;
    double h = 1.0;
    double c = 1.0;
    PatienceSpec patience;
    expansions::RhoConvention rho_convention = expansions::RhoConvention::Utilization;
    std::vector<double> x_probe;
    bool refined = false;
    std::optional<double> alpha;
    std::string output_path;
};

class ConfigError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Parse a flat key=value file ('#' comments, blank lines skipped) into cfg.
/// Unknown keys are a ConfigError.
void load_config_file(const std::string& path, ExperimentConfig& cfg);
void apply_config_entry(const std::string& key, const std::string& value, ExperimentConfig& cfg);
void validate(const ExperimentConfig& cfg);

/// 12 significant digits, "." separator; nan/inf spelled out.
std::string format_number(double v);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

std::string emit_csv(const CsvTable& table);
CsvTable parse_csv(const std::string& text);
void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

/// Model plumbing shared by the runners and the CLI one-shot subcommands.
expansions::ExpansionSpec build_spec(const ExperimentConfig& cfg);
prescription::ExactEvaluator build_exact_evaluator(const ExperimentConfig& cfg);
exact_queues::ExactOptimum exact_optimum(const ExperimentConfig& cfg, double n);
numerics::Bracket probe_bracket(const ExperimentConfig& cfg);

struct RunResult {
    CsvTable table;
    int warnings = 0;  // flagged rows; never changes the exit status
};

RunResult run_gap_table(const ExperimentConfig& cfg);
RunResult run_approx_check(const ExperimentConfig& cfg);
RunResult run_constrained_report(const ExperimentConfig& cfg);

/// Write a standalone matplotlib script for a known CSV schema. The schema
/// is detected from the header row; unknown headers are a ConfigError.
void emit_plot_script(const std::string& csv_path, const std::string& script_path);

}  // namespace gaplab::experiments
