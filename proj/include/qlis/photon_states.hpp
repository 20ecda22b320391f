#pragma once

#include <array>
#include <string>
#include <vector>

#include "qlis/interferometer.hpp"
#include "qlis/types.hpp"

namespace qlis {

struct FrequencyGrid {
    int n_points = 0;
    double omega_min = 0.0;
    double omega_max = 0.0;

    static FrequencyGrid make(int n_points, double omega_min, double omega_max);
    // Grid with a given spacing, centred on `center`.
    static FrequencyGrid centered(int n_points, double center, double spacing);

    double spacing() const { return (omega_max - omega_min) / (n_points - 1); }
    double omega(int k) const { return omega_min + k * spacing(); }
    bool operator==(const FrequencyGrid& o) const
    {
        return n_points == o.n_points && omega_min == o.omega_min && omega_max == o.omega_max;
    }
};

// Uniform time grid t_j = t0 + j*dt.
struct TimeGrid {
    int n_points = 0;
    double t0 = 0.0;
    double dt = 0.0;

    double t(int j) const { return t0 + j * dt; }
    double t_end() const { return t0 + (n_points - 1) * dt; }
    // Nearest index, or -1 if t is outside the grid.
    int index_of(double t) const;
};

// Conjugate grid of the unitary discrete transform: dt = 2 pi / (N d_omega),
// t_j = (j - N/2) dt.
TimeGrid conjugate_time_grid(const FrequencyGrid& g);

// phi(t) = (1/sqrt(2 pi)) int d_omega phi(omega) e^{-i omega t}, discretised so
// that sum |phi(t)|^2 dt = sum |phi(omega)|^2 d_omega.
CVector spectrum_to_time(const FrequencyGrid& g, const CVector& spectrum);
CVector time_to_spectrum(const FrequencyGrid& g, const CVector& samples);

struct SpectralEnvelope {
    FrequencyGrid grid;
    CVector values;

    double norm() const;
};

// exp(-(w-center)^2/(4 sigma^2)) e^{i w delay} e^{i gdd (w-center)^2 / 2}; the
// intensity has standard deviation sigma, the pulse arrives at t = delay.
SpectralEnvelope gaussian_envelope(const FrequencyGrid& g, double center, double sigma, double delay = 0.0,
    double gdd = 0.0);
// Flat single-bin envelope (monochromatic photon at grid index k).
SpectralEnvelope single_bin_envelope(const FrequencyGrid& g, int k);
// Normalised Gaussian temporal envelope of rms width eps (of |phi(t)|^2)
// centred at t_center; the discrete stand-in for a delta pulse.
SpectralEnvelope delta_epsilon_envelope(const FrequencyGrid& g, double t_center, double eps);

cplx overlap(const SpectralEnvelope& a, const SpectralEnvelope& b);

// Joint spectral amplitude Phi(omega_a, omega_b); rows index omega_a.
class TwoPhotonAmplitude {
public:
    TwoPhotonAmplitude() = default;
    TwoPhotonAmplitude(FrequencyGrid grid_a, FrequencyGrid grid_b, CMatrix values);

    const FrequencyGrid& grid_a() const { return grid_a_; }
    const FrequencyGrid& grid_b() const { return grid_b_; }
    const CMatrix& values() const { return values_; }
    bool square() const { return grid_a_ == grid_b_; }

    // Spectral centroids of the two marginals.
    double center_a() const;
    double center_b() const;

    double norm() const;
    TwoPhotonAmplitude normalized() const;
    TwoPhotonAmplitude scaled(cplx s) const;
    // Photon a arrives later by tau: Phi(w_a, w_b) e^{i w_a tau}.
    TwoPhotonAmplitude delayed_a(double tau) const;

    // Exact band-limited evaluation of the time-domain amplitude at (t1, t2).
    cplx evaluate_time(double t1, double t2) const;

private:
    FrequencyGrid grid_a_, grid_b_;
    CMatrix values_;
};

struct TimeAmplitude {
    TimeGrid grid_a, grid_b;
    CMatrix values;

    double norm() const;
};

TwoPhotonAmplitude product_amplitude(const SpectralEnvelope& phi_a, const SpectralEnvelope& phi_b);
TwoPhotonAmplitude theta_symmetrize(const TwoPhotonAmplitude& phi, double theta);
TimeAmplitude to_time_domain(const TwoPhotonAmplitude& phi);
TwoPhotonAmplitude from_time_domain(const TimeAmplitude& t, const FrequencyGrid& ga, const FrequencyGrid& gb);

// Adds quadratic spectral phase exp(i gdd (w - w_a0)^2 / 2) to photon a.
TwoPhotonAmplitude chirp_a(const TwoPhotonAmplitude& phi, double gdd);

struct SpdcParameters {
    double sigma_p = 0.0;
    double T_e = 0.0;
    double omega_p0 = 0.0;
    double omega_a0 = 0.0;
    double omega_b0 = 0.0;

    void validate() const;
};

// Gaussian pump envelope in the sum frequency times a sinc in the difference
// frequency. The sinc argument (w_a - w_b - (w_a0 - w_b0)) T_e / 4 makes the
// arrival-time difference a box of full width T_e.
TwoPhotonAmplitude spdc_amplitude(const SpdcParameters& p, const FrequencyGrid& grid);
// Half-width (in rad/s) that the grid must cover on either side of each centre.
double spdc_required_half_span(const SpdcParameters& p);

// n-photon amplitude on a common grid; values stored row-major, axis 0 slowest.
class NPhotonAmplitude {
public:
    NPhotonAmplitude(int n, FrequencyGrid grid, std::vector<cplx> values,
        Eigen::MatrixXd theta = Eigen::MatrixXd());

    static NPhotonAmplitude product(const std::vector<SpectralEnvelope>& envelopes);

    int n() const { return n_; }
    const FrequencyGrid& grid() const { return grid_; }
    const std::vector<cplx>& values() const { return values_; }
    const Eigen::MatrixXd& theta_matrix() const { return theta_; }

    // Exchange of arguments i and j.
    NPhotonAmplitude transposed(int i, int j) const;
    double norm() const;

private:
    int n_;
    FrequencyGrid grid_;
    std::vector<cplx> values_;
    Eigen::MatrixXd theta_;
};

NPhotonAmplitude exchange_phase_amplitude(const NPhotonAmplitude& phi, const Eigen::MatrixXd& theta);

// Two photons distributed over two spatial modes:
// |psi> = sum_{ij} int int C_ij(x, y) c_i^dag(x) c_j^dag(y) |0>, i, j in {a, b}.
struct TwoModeState {
    FrequencyGrid grid;
    std::array<std::array<CMatrix, 2>, 2> block;

    static TwoModeState from_amplitude(const TwoPhotonAmplitude& phi);

    // <0| b(y) a(x) |psi>: the part with one photon in each mode.
    TwoPhotonAmplitude two_mode_part() const;
    // <0| a(y) a(x) |psi> and <0| b(y) b(x) |psi>.
    CMatrix bunched_a() const;
    CMatrix bunched_b() const;
    double norm() const;
};

// Creation operators of the input modes expressed through the output modes,
// c_in,i^dag(w) = sum_j R_ji(w) c_out,j^dag(w), with R = transform.matrix_at(w).
TwoModeState apply_transform(const TwoModeState& s, const ModeTransform& t);

// Amplitude files: <base>.json header plus <base>.bin (little-endian f64
// re/im pairs) or <base>.csv (one "re,im" row per entry), row-major Phi[a][b].
enum class PayloadFormat { binary, csv };
void write_amplitude(const TwoPhotonAmplitude& phi, const std::string& base_path, PayloadFormat fmt);
TwoPhotonAmplitude read_amplitude(const std::string& header_path);

} // namespace qlis
