#pragma once

#include <array>
#include <string>
#include <vector>

#include "qlis/interferometer.hpp"
#include "qlis/matter.hpp"
#include "qlis/photon_states.hpp"

namespace qlis {

// Linear map between two-channel fields sampled on a time grid: the target
// channel e at grid index w receives coef[e][c] times source channel c at
// index w + shift[e][c]. Channel 0 is "a" (detector 1), channel 1 is "b".
struct ChannelMap {
    std::array<std::array<cplx, 2>, 2> coef{};
    std::array<std::array<int, 2>, 2> shift{};

    static ChannelMap identity();
    // Map of a passive mode transform whose port delay is an integer number
    // of steps of dt.
    static ChannelMap from_transform(const ModeTransform& t, double dt);

    bool is_identity() const;
    bool operator==(const ChannelMap& o) const { return coef == o.coef && shift == o.shift; }
};

// block[p][q](i, j): photon 1 in channel p at t_i, photon 2 in channel q at t_j.
struct TimeDomainInput {
    TimeGrid grid;
    std::array<std::array<CMatrix, 2>, 2> block;

    static TimeDomainInput from_state(const TwoModeState& s);
    cplx at(int p, int q, int i, int j) const
    {
        const int n = grid.n_points;
        if (i < 0 || j < 0 || i >= n || j >= n || block[p][q].size() == 0)
            return 0.0;
        return block[p][q](i, j);
    }
    bool has_block(int p, int q) const { return block[p][q].size() != 0; }
};

enum class ScatteringRoute {
    // Matter sees the input channels; free and emitted photons then pass the
    // interferometer (observable rotated backwards).
    interaction_order,
    // Input rotated to the detection basis first; matter absorbs through the
    // inverse interferometer map.
    arrival_order,
};

// Interaction integrals run over grid indices [0, t_star]. Emission events
// after t_star do not reach the detectors; an emission exactly at t_star
// counts with weight 1/2.
struct ScatteringSetup {
    TimeDomainInput input;
    ChannelMap absorption;
    ChannelMap free;
    ChannelMap emission;
    int t_star = 0;
};

ScatteringSetup make_scattering_setup(const TwoModeState& state, const ModeTransform& interferometer,
    ScatteringRoute route, int t_star);

// Fourth-order amplitude classes, named by the time order of absorptions (X)
// and emissions (Y), earliest first.
inline constexpr int kA4Classes = 6;
const std::array<std::string, kA4Classes>& a4_class_labels();

// Detection amplitude <0| E_1(w1) E_2(w2) |Psi> at one grid point, expanded
// as A0 + lambda^2 A2 + lambda^4 A4 (lambda not included). One entry per
// state of the matter ensemble; vectors are in the energy eigenbasis.
struct PointAmplitudes {
    std::vector<CVector> a0;
    std::vector<std::array<CVector, 2>> a2; // emitted photon seen by detector 1 / 2
    std::vector<std::array<CVector, kA4Classes>> a4;

    CVector a2_total(size_t k) const { return a2[k][0] + a2[k][1]; }
    CVector a4_total(size_t k) const;
};

// Direct evaluation with arbitrary channel maps. Serial.
PointAmplitudes scatter_point(const ScatteringSetup& setup, const MatterSystem& matter, int w1, int w2);

// Amplitudes on the whole detection grid, stored as
// data[((k * n + w1) * n + w2) * dim + m].
struct GridAmplitudes {
    int n = 0;
    int dim = 0;
    int n_states = 0;
    std::vector<cplx> a0, a2, a4;

    size_t offset(int k, int w1, int w2) const { return ((size_t(k) * n + w1) * n + w2) * size_t(dim); }
};

// Prefix-table kernel, OpenMP parallel. Needs the interaction-order maps
// (identity absorption, free map equal to the emission map).
GridAmplitudes scatter_grid(const ScatteringSetup& setup, const MatterSystem& matter);
// scatter_point at every grid point; O(N^4), for validation only.
GridAmplitudes scatter_grid_reference(const ScatteringSetup& setup, const MatterSystem& matter);

struct DensityParts {
    Eigen::MatrixXd total;      // sum_k p_k |A0 + l^2 A2 + l^4 A4|^2
    Eigen::MatrixXd background; // sum_k p_k |A0|^2
    Eigen::MatrixXd order2;     // l^2 * 2 Re <A0, A2>
    Eigen::MatrixXd order4;     // l^4 * (|A2|^2 + 2 Re <A0, A4>)
};

DensityParts coincidence_density(const GridAmplitudes& g, const std::vector<double>& weights, double lambda);
// sum_k p_k <A[g1], A[g2]> at every grid point.
CMatrix cross_density(const GridAmplitudes& g1, const GridAmplitudes& g2, const std::vector<double>& weights,
    double lambda);

} // namespace qlis
