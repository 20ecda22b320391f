#pragma once

#include <vector>

#include "qlis/types.hpp"

namespace qlis {

enum class TransformKind { passive, active };

// 2x2 transformation of mode operators. Passive transforms mix (a1, a2) and
// are unitary; active transforms mix (a1, a2^dagger) and satisfy the
// Bogoliubov constraint. The delay is a relative port delay: when the
// transform acts on a frequency grid, the off-diagonal entries pick up
// e^{-i w delay} (upper) and e^{+i w delay} (lower).
class ModeTransform {
public:
    ModeTransform(const CMatrix2& matrix, TransformKind kind, double delay = 0.0);

    const CMatrix2& matrix() const { return matrix_; }
    TransformKind kind() const { return kind_; }
    double delay() const { return delay_; }

    // Matrix seen by a single frequency component.
    CMatrix2 matrix_at(double omega) const;

    ModeTransform inverse() const;

private:
    CMatrix2 matrix_;
    TransformKind kind_;
    double delay_;
};

ModeTransform beam_splitter(double T, double R, double phi);
ModeTransform delayed_balanced_bs(double T_delay);
ModeTransform squeezer(double beta, double delta);
ModeTransform identity_transform();

// Product M1*M2 (M2 acts first on the operator vector). Both must share a kind
// and carry no delay, since a composite of delayed elements is not a single
// delayed element.
ModeTransform compose(const ModeTransform& m1, const ModeTransform& m2);

double unitarity_residual(const CMatrix2& m);
double bogoliubov_residual(const CMatrix2& m);

// Operators on the truncated two-mode Fock space. Basis index of |n1,n2> is
// n1*(n_max+1) + n2.
struct TwoModeFockOperators {
    int n_max = 0;
    CMatrix a1, a2, a1_dag, a2_dag;
    CMatrix Jx, Jy, Jz, Kx, Ky, Kz, N;

    int dim() const { return (n_max + 1) * (n_max + 1); }
    int index(int n1, int n2) const { return n1 * (n_max + 1) + n2; }

    CMatrix J2() const;
    CMatrix K2() const;

    // Indices of basis states with n1+n2 <= total.
    std::vector<int> sector_up_to(int total) const;
    std::vector<int> sector(int total) const;
};

TwoModeFockOperators build_fock_operators(int n_max);

// Fock-space unitary U with U^dagger a U = M a for passive M, or
// U^dagger (a1, a2^dag) U = M (a1, a2^dag) for active M.
// Active transforms are built on an enlarged working space and the result is
// returned on the (n_max+1)^2 space; the columns for states with
// n1+n2 <= safe_total are exact up to the reported leakage.
struct FockUnitary {
    CMatrix U;
    double leakage = 0.0;
};

FockUnitary fock_unitary(const ModeTransform& t, int n_max, int safe_total);

// Frobenius-norm change of J^2 (passive) or K^2 (active) under conjugation by
// the induced Fock unitary, restricted to the sector n1+n2 <= safe_total.
double casimir_check(const ModeTransform& t, const TwoModeFockOperators& ops, int safe_total = 2);

struct AlgebraReport {
    struct Entry {
        std::string name;
        double residual;
    };
    std::vector<Entry> entries;
    double max_residual() const;
};

// Commutation relations, Casimir eigenvalues and transform diagnostics used by
// the algebra-check experiment.
AlgebraReport algebra_report(int n_max);

} // namespace qlis
