#include "qlis/oracle.hpp"

#include <sstream>

namespace qlis {

namespace {

CMatrix kron(const CMatrix& a, const CMatrix& b)
{
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

} // namespace

JointModel::JointModel(const MatterSystem& matter, double omega_a0, double omega_b0, int n_max, double lambda,
    CouplingForm form)
    : matter_(matter), omega_a0_(omega_a0), omega_b0_(omega_b0), n_max_(n_max), lambda_(lambda)
{
    if (n_max < 2)
        throw ValidationError("JointModel: n_max must be at least 2");
    const long total = long(matter.dim()) * (n_max + 1) * (n_max + 1);
    if (total > 4096) {
        std::ostringstream os;
        os << "JointModel: joint dimension " << total << " exceeds 4096";
        throw CapabilityError(os.str());
    }
    for (const auto& name : matter.channel_names())
        if (name != "a" && name != "b")
            throw ValidationError("JointModel: channels must be labelled 'a' or 'b', got '" + name + "'");

    TwoModeFockOperators f = build_fock_operators(n_max);
    const int fd = field_dim();
    const int md = matter.dim();
    CMatrix Im = CMatrix::Identity(md, md);
    CMatrix If = CMatrix::Identity(fd, fd);

    CMatrix Hf = omega_a0 * f.a1_dag * f.a1 + omega_b0 * f.a2_dag * f.a2;
    H_ = kron(matter.hamiltonian(), If) + kron(Im, Hf);
    for (const auto& name : matter.channel_names()) {
        const CMatrix& a = name == "a" ? f.a1 : f.a2;
        if (form == CouplingForm::full) {
            H_ += lambda * kron(matter.dipole(name), a + a.adjoint());
        } else {
            CMatrix mu = matter.lowering(name);
            H_ += lambda * (kron(mu, a.adjoint()) + kron(mu.adjoint(), a));
        }
    }
    double herm = (H_ - H_.adjoint()).norm();
    if (herm > 1e-12)
        throw ValidationError("JointModel: joint Hamiltonian is not Hermitian");
    H_ = 0.5 * (H_ + H_.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(H_);
    evals_ = es.eigenvalues();
    evecs_ = es.eigenvectors();
}

CVector JointModel::product_state(const CVector& matter_state, int n_a, int n_b) const
{
    if (matter_state.size() != matter_.dim())
        throw ValidationError("JointModel: matter state has the wrong dimension");
    if (n_a < 0 || n_b < 0 || n_a > n_max_ || n_b > n_max_)
        throw TruncationOverflowError("JointModel: photon numbers exceed the cutoff");
    CVector field = CVector::Zero(field_dim());
    field[n_a * (n_max_ + 1) + n_b] = 1.0;
    CVector out(dim());
    for (int m = 0; m < matter_.dim(); ++m)
        out.segment(m * field_dim(), field_dim()) = matter_state[m] * field;
    return out;
}

CMatrix JointModel::lift_field(const CMatrix& op) const
{
    if (op.rows() != field_dim())
        throw ValidationError("JointModel: field operator has the wrong dimension");
    return kron(CMatrix::Identity(matter_.dim(), matter_.dim()), op);
}

CMatrix JointModel::excitation_number(const RVector& matter_excitation) const
{
    if (matter_excitation.size() != matter_.dim())
        throw ValidationError("JointModel: excitation vector has the wrong dimension");
    TwoModeFockOperators f = build_fock_operators(n_max_);
    CMatrix Nm = matter_excitation.cast<cplx>().asDiagonal();
    return kron(Nm, CMatrix::Identity(field_dim(), field_dim())) + lift_field(f.N);
}

CVector propagate(const JointModel& model, const CVector& psi, double t)
{
    if (psi.size() != model.dim())
        throw ValidationError("propagate: state has the wrong dimension");
    CVector c = model.evecs_.adjoint() * psi;
    for (Eigen::Index k = 0; k < c.size(); ++k)
        c[k] *= std::exp(-kI * model.evals_[k] * t);
    return model.evecs_ * c;
}

CMatrix coincidence_observable(const ModeTransform& interferometer, int n_max, double omega_ref)
{
    TwoModeFockOperators f = build_fock_operators(n_max);
    CMatrix nn = f.a1_dag * f.a2_dag * f.a2 * f.a1;
    ModeTransform fixed(interferometer.matrix_at(omega_ref), interferometer.kind());
    if (fixed.kind() != TransformKind::passive)
        throw KindMismatchError("coincidence_observable: interferometer must be passive");
    CMatrix U = fock_unitary(fixed, f.n_max, f.n_max).U;
    return U.adjoint() * nn * U;
}

double exact_coincidence(const JointModel& model, const CVector& initial, const ModeTransform& interferometer,
    double t)
{
    CVector psi = propagate(model, initial, t);
    CMatrix O = model.lift_field(coincidence_observable(interferometer, model.n_max(), 0.0));
    return psi.dot(O * psi).real();
}

double exact_coincidence(const JointModel& model, int n_a, int n_b, const ModeTransform& interferometer, double t)
{
    const MatterSystem& m = model.matter();
    CMatrix O = model.lift_field(coincidence_observable(interferometer, model.n_max(), 0.0));
    double total = 0.0;
    for (size_t k = 0; k < m.ensemble_weights().size(); ++k) {
        CVector ms = m.eigenvectors() * m.ensemble_states()[k];
        CVector psi = propagate(model, model.product_state(ms, n_a, n_b), t);
        total += m.ensemble_weights()[k] * psi.dot(O * psi).real();
    }
    return total;
}

} // namespace qlis
