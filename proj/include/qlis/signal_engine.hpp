#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "qlis/matter.hpp"
#include "qlis/photon_states.hpp"
#include "qlis/scattering.hpp"

namespace qlis {

// Gaussian detector gate exp(-(x - center)^2 / (2 width^2)). An infinite width
// is an open gate (weight 1 everywhere).
struct DetectionGate {
    enum class Kind { time, frequency };
    Kind kind = Kind::time;
    double center = 0.0;
    double width = 1.0;

    static DetectionGate time(double center_s, double width_s);
    static DetectionGate frequency(double center_rad_per_s, double width_rad_per_s);
    static DetectionGate open_time();

    bool open() const { return std::isinf(width); }
    double weight(double x) const;
    void validate() const;
};

// Two-photon HOM setup. Photon a enters channel a, photon b channel b; the
// matter sits before a balanced beam splitter whose port delay is T. Detector
// positions enter as light-travel times r_a, r_b; detection times are t_a, t_b.
struct HomConfig {
    HomConfig(TwoPhotonAmplitude state, MatterSystem matter);

    TwoPhotonAmplitude state;
    MatterSystem matter;
    double bs_delay_s = 0.0;
    double wavepacket_delay_s = 0.0; // photon a delayed by tau
    double r_a_s = 0.0;
    double r_b_s = 0.0;
    double t_a_s = 0.0;
    double t_b_s = 0.0;
    double lambda = 1e-2;
    // Upper limit of the interaction integrals; NaN means the end of the grid.
    double t_star_s = std::numeric_limits<double>::quiet_NaN();
    bool beam_splitter = true;
    // Treat the input as one period of a stationary field. Only allowed for
    // decoupled matter without delays; skips the wavepacket coverage check.
    bool stationary = false;
    ScatteringRoute route = ScatteringRoute::interaction_order;

    TimeGrid time_grid() const;
};

// Throws CoverageError when the grid does not hold the delayed wavepackets
// with max(|T|, |tau|) plus three envelope widths of padding.
void check_hom_coverage(const HomConfig& cfg);

enum class Contribution { otoc_term, all_fourth_order };

cplx hom_coincidence(const HomConfig& cfg, Contribution contribution);

struct LabeledTerm {
    std::string label;
    double value;
};

struct FourthOrderBreakdown {
    double total = 0.0;      // lambda^4 (|A2|^2 + 2 Re <A0, A4>)
    double background = 0.0; // |A0|^2
    double order2 = 0.0;     // lambda^2 * 2 Re <A0, A2>
    std::vector<LabeledTerm> terms;
    // lambda^4 coefficient read off |A0 + mu A2 + mu^2 A4|^2 by a five-point
    // stencil in mu, times lambda^4.
    double stencil_total = 0.0;
};

FourthOrderBreakdown fourth_order_breakdown(const HomConfig& cfg);

// Prepared scattering problem for a config: theta-symmetrised, delayed input
// and the channel maps of the configured route.
ScatteringSetup prepare_setup(const HomConfig& cfg, std::optional<double> theta, int t_star_index);
// Same, for an explicit input amplitude in place of cfg.state.
ScatteringSetup prepare_setup_for(const HomConfig& cfg, const TwoPhotonAmplitude& phi, int t_star_index);
int t_star_index(const HomConfig& cfg, double t_star_field);

struct NarrowbandOptions {
    double t_a_s = 0.0; // detection times at the matter (retardation removed)
    double t_b_s = 0.0;
    double lambda = 1e-2;
    double dt_s = 0.01;
};

struct NarrowbandResult {
    cplx otoc = 0.0;
    cplx toc = 0.0;
    bool timescale_warning = false;
    std::string warning;
};

NarrowbandResult narrowband_spdc_coincidence(const SpdcParameters& spdc, const MatterSystem& matter, double T,
    double tau, const NarrowbandOptions& opt = {});

struct GateOptions {
    double tstar_margin_widths = 5.0;
};

double gated_coincidence(const HomConfig& cfg, double theta, const DetectionGate& gate_a,
    const DetectionGate& gate_b, const GateOptions& opt = {});

// Re <Psi[Phi], Psi[P Phi]> under the gates, P the exchange of the two
// frequency arguments; the theta-dependent part of the gated count.
double exchange_cross_term(const HomConfig& cfg, const DetectionGate& gate_a, const DetectionGate& gate_b,
    const GateOptions& opt = {});

// Gated counts from a single evaluation of the coincidence density, for scans.
class GatedSignal {
public:
    // No theta: the configured state is used as is.
    GatedSignal(const HomConfig& cfg, std::optional<double> theta, double t_star_field);

    enum class Part { total, background, order2, order4 };
    double count(const DetectionGate& gate_a, const DetectionGate& gate_b, Part part = Part::total) const;
    double ungated() const;
    // S(tau) with the gate centre summed over one period of the time grid
    // and periodised gates.
    double fixed_delay(double tau, double width_a, double width_b, bool swap_roles = false) const;
    const Eigen::MatrixXd& density() const { return W_; }
    const DensityParts& parts() const { return parts_; }
    const TimeGrid& grid() const { return grid_; }

private:
    TimeGrid grid_;
    double r_a_, r_b_;
    DensityParts parts_;
    Eigen::MatrixXd W_;
};

struct FixedDelayOptions {
    bool swap_roles = false;
    // Restrict the gate-centre integration to [first, second] (detection time).
    std::optional<std::pair<double, double>> scan_range;
};

double fixed_delay_signal(const HomConfig& cfg, double theta, double tau, const DetectionGate& gate_a,
    const DetectionGate& gate_b, const FixedDelayOptions& opt = {});

// Photon a (signal) time-gated at detector 1, photon b (idler) frequency-gated
// at detector 2.
double time_frequency_coincidence(const HomConfig& cfg, const DetectionGate& gate_signal,
    const DetectionGate& gate_idler);

struct TimeFrequencyMap {
    std::vector<double> t_centers;
    std::vector<double> w_centers;
    Eigen::MatrixXd values; // rows: t_centers
};

TimeFrequencyMap time_frequency_map(const HomConfig& cfg, const std::vector<double>& t_centers,
    const std::vector<double>& w_centers, double width_t, double width_w);

struct PhaseCycleSolution {
    double population = 0.0; // theta-independent part
    double cross_re = 0.0;
    double cross_im = 0.0;
    double residual = 0.0;
};

// Least-squares solve of C(theta) = P + X_re cos(theta) - X_im sin(theta).
PhaseCycleSolution solve_phase_cycle(const std::vector<double>& thetas, const std::vector<double>& signals);

double phase_matching(double delta_k, double L);

// -i * series(t - r/c) for t >= r/c, zero before.
cplx retarded_field_contribution(const std::function<cplx(double)>& series, double r_over_c, double t);

} // namespace qlis
