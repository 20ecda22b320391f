#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "qlis/types.hpp"

namespace qlis {

enum class Flavor { full, lowering, raising };
enum class Side { left, right };

struct Insertion {
    std::string channel;
    double time = 0.0;
    Flavor flavor = Flavor::full;
    Side side = Side::left;
};

// Insertions in the order they act: insertions[0] is the rightmost operator.
// Left insertions multiply the density operator from the left, right
// insertions from the right; the all-left case is <psi0| O_m ... O_1 |psi0>.
struct CorrelatorSpec {
    std::vector<Insertion> insertions;
};

class MatterSystem {
public:
    MatterSystem(const CMatrix& hamiltonian, const std::map<std::string, CMatrix>& channels,
        const CVector& initial_state);
    MatterSystem(const CMatrix& hamiltonian, const std::map<std::string, CMatrix>& channels,
        const CMatrix& initial_density);

    int dim() const { return int(H_.rows()); }
    const CMatrix& hamiltonian() const { return H_; }
    const RVector& energies() const { return E_; }
    const CMatrix& eigenvectors() const { return W_; }

    std::vector<std::string> channel_names() const;
    bool has_channel(const std::string& c) const { return channels_.count(c) > 0; }
    const CMatrix& dipole(const std::string& c) const;
    bool has_split(const std::string& c) const;
    // mu_c (removes energy) and mu_c^dagger in the original basis.
    CMatrix lowering(const std::string& c) const;
    CMatrix raising(const std::string& c) const;

    // Operator of the given flavor in the energy eigenbasis (ascending energies).
    const CMatrix& eigen_operator(const std::string& c, Flavor f) const;

    // Initial state as a mixture sum_k p_k |k><k| with |k> in eigenbasis coordinates.
    const std::vector<double>& ensemble_weights() const { return weights_; }
    const std::vector<CVector>& ensemble_states() const { return states_e_; }
    const CMatrix& initial_density() const { return rho0_; }
    bool is_pure() const { return weights_.size() == 1; }

    // Largest |E_m - E_n|.
    double max_transition_frequency() const;

    MatterSystem with_initial_state(const CVector& psi) const;
    MatterSystem with_initial_density(const CMatrix& rho) const;
    // Same Hamiltonian, all dipole operators set to zero.
    MatterSystem decoupled() const;

private:
    void init(const CMatrix& rho);

    CMatrix H_;
    RVector E_;
    CMatrix W_;
    std::map<std::string, CMatrix> channels_;
    std::map<std::string, std::array<CMatrix, 3>> eigen_ops_; // full, lowering, raising
    std::map<std::string, bool> split_;
    CMatrix rho0_;
    std::vector<double> weights_;
    std::vector<CVector> states_e_;
};

CMatrix heisenberg_dipole(const MatterSystem& sys, const std::string& channel, double t, Flavor f = Flavor::full);

cplx multipoint_correlator(const MatterSystem& sys, const CorrelatorSpec& spec);
// Same contract; every insertion must use the lowering or raising flavor.
cplx rwa_correlator(const MatterSystem& sys, const CorrelatorSpec& spec);

// Superoperators act on row-major vectorised operators, vec(A)[i*dim + j] = A(i, j).
CMatrix liouville_propagator(const MatterSystem& sys, double t); // U(t) (x) U*(t)
CMatrix liouville_green(const MatterSystem& sys, double t);      // -i theta(t) U (x) U*
CMatrix left_multiplication(const CMatrix& a);
CMatrix right_multiplication(const CMatrix& a);
CVector vectorize(const CMatrix& a);
CMatrix unvectorize(const CVector& v, int dim);

// Ground state |g> plus two excited states |e1>, |e2> (energies w1, w2) with
// excited-state coupling J; channel a drives g-e1, channel b drives g-e2.
MatterSystem v_system(double w1, double w2, double J, double mu_a = 1.0, double mu_b = 1.0);
MatterSystem two_level(double w0, double mu = 1.0);

// Matter model file (JSON). See configs/ for examples.
MatterSystem load_matter_json(const std::string& path);
MatterSystem matter_from_json_text(const std::string& text);
std::string matter_to_json_text(const MatterSystem& sys);

} // namespace qlis
