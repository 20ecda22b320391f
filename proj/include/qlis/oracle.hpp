#pragma once

#include "qlis/interferometer.hpp"
#include "qlis/matter.hpp"

namespace qlis {

enum class CouplingForm { full, rwa };

// Matter coupled to two discrete field modes a and b. Joint basis index is
// m * (n_max+1)^2 + n_a * (n_max+1) + n_b. Channel "a" couples to mode a and
// channel "b" to mode b.
class JointModel {
public:
    JointModel(const MatterSystem& matter, double omega_a0, double omega_b0, int n_max, double lambda,
        CouplingForm form = CouplingForm::full);

    int dim() const { return int(H_.rows()); }
    int field_dim() const { return (n_max_ + 1) * (n_max_ + 1); }
    int n_max() const { return n_max_; }
    double lambda() const { return lambda_; }
    const MatterSystem& matter() const { return matter_; }
    const CMatrix& hamiltonian() const { return H_; }

    // |matter> (x) |n_a, n_b>
    CVector product_state(const CVector& matter_state, int n_a, int n_b) const;
    // Matter excitation numbers (one per matter basis level) plus n_a + n_b.
    CMatrix excitation_number(const RVector& matter_excitation) const;
    // I (x) op for a field operator on the (n_max+1)^2 space.
    CMatrix lift_field(const CMatrix& op) const;

private:
    MatterSystem matter_;
    double omega_a0_, omega_b0_;
    int n_max_;
    double lambda_;
    CMatrix H_;
    RVector evals_;
    CMatrix evecs_;

    friend CVector propagate(const JointModel& model, const CVector& psi, double t);
};

CVector propagate(const JointModel& model, const CVector& psi, double t);

// <psi(t)| U^dag a^dag b^dag b a U |psi(t)>, U the Fock unitary of the
// interferometer (evaluated at the mean mode frequency).
double exact_coincidence(const JointModel& model, const CVector& initial, const ModeTransform& interferometer,
    double t);
// Matter starts in its configured initial state (pure or mixed), the field in |n_a, n_b>.
double exact_coincidence(const JointModel& model, int n_a, int n_b, const ModeTransform& interferometer, double t);

// Rotated coincidence observable on the field space.
CMatrix coincidence_observable(const ModeTransform& interferometer, int n_max, double omega_ref);

} // namespace qlis
