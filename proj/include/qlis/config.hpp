#pragma once

#include <string>
#include <vector>

#include "qlis/photon_states.hpp"

namespace qlis {

inline constexpr int kConfigSchemaVersion = 1;

enum class Experiment { hom_scan, spdc_otoc, phase_cycle, td_gate, tf_map, algebra_check };

Experiment parse_experiment(const std::string& name);
std::string experiment_name(Experiment e);

struct AxisSpec {
    std::string name;
    double min = 0.0, max = 0.0;
    int points = 1;

    std::vector<double> values() const;
};

struct StateSpec {
    std::string kind; // gaussian_pair, delta_pair, spdc
    int grid_points = 256;
    double grid_center_rad_per_s = 0.0;
    double grid_spacing_rad_per_s = 0.1;
    double center_a_rad_per_s = 0.0;
    double center_b_rad_per_s = 0.0;
    double sigma_rad_per_s = 1.0;
    double arrival_a_s = 0.0;
    double arrival_b_s = 0.0;
    double eps_s = 0.0;
    double sigma_p_rad_per_s = 0.0;
    double entanglement_time_s = 0.0;
    double pump_center_rad_per_s = 0.0;
    double chirp_a_s2 = 0.0;
};

struct MatterSpec {
    std::string file; // resolved path; empty when a built-in model is used
    std::string model; // v_system, two_level
    double w1_rad_per_s = 1.0, w2_rad_per_s = 0.6, coupling_rad_per_s = 0.5;
    double w0_rad_per_s = 1.0;
    double mu_a = 1.0, mu_b = 1.0;
    bool decoupled = false;
};

struct InteractionSpec {
    double lambda = 1e-2;
    double bs_delay_s = 0.0;
    double wavepacket_delay_s = 0.0;
    double r_a_s = 0.0, r_b_s = 0.0;
    double t_a_s = 0.0, t_b_s = 0.0;
    bool beam_splitter = true;
    bool has_t_star = false;
    double t_star_s = 0.0;
    double theta_rad = 0.0;
    std::vector<std::string> contributions{"otoc_term"};
    // Scans of tau_s also set T = tau / 2 and t_a = t_b + tau.
    bool bs_delay_follows_tau = false;
    bool t_a_follows_tau = false;
};

struct GateSpec {
    std::string mode = "window"; // window, fixed_delay
    double width_a_s = 1.0, width_b_s = 1.0;
    double idler_width_rad_per_s = 1.0;
    double tstar_margin_widths = 5.0;
};

struct ExperimentConfig {
    Experiment experiment = Experiment::hom_scan;
    StateSpec state;
    MatterSpec matter;
    InteractionSpec interaction;
    GateSpec gates;
    std::vector<AxisSpec> scan;
    int algebra_n_max = 4;
    double narrowband_dt_s = 0.01;
    std::string output_path;
    std::string output_format = "csv";

    std::string canonical_json; // config echo (paths resolved); feeding it back reproduces the run
    std::string hash() const;
};

// TOML (.toml) or JSON (anything else) config file. Throws ConfigError with
// the offending field and, for TOML, its line.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config_toml(const std::string& text, const std::string& origin, const std::string& base_dir);
ExperimentConfig parse_config_json(const std::string& text, const std::string& origin, const std::string& base_dir);

// The same experiment with the time step halved (twice the grid points at the
// same frequency spacing; the narrowband quadrature step is halved too).
ExperimentConfig refined(const ExperimentConfig& cfg);

} // namespace qlis
