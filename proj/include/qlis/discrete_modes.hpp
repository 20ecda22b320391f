#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "qlis/oracle.hpp"

namespace qlis {

// Weak-coupling expansion of the discrete two-mode coincidence signal,
// <O>(t) = S0 + lambda S1 + lambda^2 S2 + ..., with the Dyson terms of
// exp(-i (H0 + lambda V) t) taken from one block-triangular matrix exponential.
struct DiscreteProblem {
    DiscreteProblem(MatterSystem matter, double omega_a0, double omega_b0);

    MatterSystem matter;
    double omega_a0, omega_b0;
    int n_max = 2;
    CouplingForm form = CouplingForm::rwa;
    ModeTransform interferometer = balanced_bs();
    int n_a = 1, n_b = 1;
    double t = 1.0;

    static ModeTransform balanced_bs() { return delayed_balanced_bs(0.0); }
};

enum class DetectionRoute {
    // Propagate with H, then measure the rotated observable U^dag n_a n_b U.
    interaction_order,
    // Rotate the input by U and propagate with U H U^dag; measure n_a n_b.
    arrival_order,
};

// U_k with exp(-i (H0 + lambda V) t) = sum_k lambda^k U_k + O(lambda^(max+1)).
std::vector<CMatrix> dyson_orders(const CMatrix& H0, const CMatrix& V, double t, int max_order);

struct DiscreteSeries {
    std::array<double, 5> s{}; // S0 .. S4
    double background() const { return s[0]; }
    double all_fourth_order(double lambda) const { return std::pow(lambda, 4) * s[4]; }
    // S0 + l^2 S2 + l^4 S4 (odd orders vanish for a two-photon observable).
    double through_fourth(double lambda) const;
};

DiscreteSeries discrete_series(const DiscreteProblem& p, DetectionRoute route = DetectionRoute::interaction_order);

// Exact non-perturbative coincidence for the same problem (oracle).
double discrete_exact(const DiscreteProblem& p, double lambda);

// Fourth-order response split into its sixteen Liouville pathways (L = the
// interaction acts on the ket, R = on the bra) and compared with the nested
// commutator, both on the same grid of ordered time tuples in [0, t].
struct PathwayCheck {
    std::vector<std::string> labels;
    std::vector<double> values;
    double pathway_sum = 0.0;
    double commutator = 0.0;
};

PathwayCheck pathway_completeness(const DiscreteProblem& p, int n_steps);

} // namespace qlis
