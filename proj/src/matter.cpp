#include "qlis/matter.hpp"

#include <cmath>
#include <sstream>

namespace qlis {

namespace {

double hermiticity(const CMatrix& m)
{
    return (m - m.adjoint()).norm();
}

CMatrix kron(const CMatrix& a, const CMatrix& b)
{
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

int flavor_index(Flavor f)
{
    switch (f) {
    case Flavor::full:
        return 0;
    case Flavor::lowering:
        return 1;
    case Flavor::raising:
        return 2;
    }
    return 0;
}

} // namespace

MatterSystem::MatterSystem(const CMatrix& hamiltonian, const std::map<std::string, CMatrix>& channels,
    const CVector& initial_state)
    : H_(hamiltonian), channels_(channels)
{
    if (initial_state.size() != H_.rows())
        throw ValidationError("MatterSystem: initial state dimension does not match the Hamiltonian");
    double n = initial_state.norm();
    if (std::abs(n - 1.0) > 1e-12) {
        std::ostringstream os;
        os << "MatterSystem: initial state norm is " << n << ", expected 1";
        throw ValidationError(os.str());
    }
    init(initial_state * initial_state.adjoint());
}

MatterSystem::MatterSystem(const CMatrix& hamiltonian, const std::map<std::string, CMatrix>& channels,
    const CMatrix& initial_density)
    : H_(hamiltonian), channels_(channels)
{
    init(initial_density);
}

void MatterSystem::init(const CMatrix& rho)
{
    const int d = int(H_.rows());
    if (d < 1 || H_.cols() != d)
        throw ValidationError("MatterSystem: Hamiltonian must be square and non-empty");
    if (!H_.allFinite() || hermiticity(H_) > 1e-12)
        throw ValidationError("MatterSystem: Hamiltonian is not Hermitian within 1e-12");
    if (channels_.empty())
        throw ValidationError("MatterSystem: at least one dipole channel is required");
    for (const auto& [name, V] : channels_) {
        if (V.rows() != d || V.cols() != d)
            throw ValidationError("MatterSystem: dipole '" + name + "' has the wrong dimension");
        if (!V.allFinite() || hermiticity(V) > 1e-12)
            throw ValidationError("MatterSystem: dipole '" + name + "' is not Hermitian within 1e-12");
    }
    if (rho.rows() != d || rho.cols() != d)
        throw ValidationError("MatterSystem: initial density has the wrong dimension");
    if (hermiticity(rho) > 1e-12)
        throw ValidationError("MatterSystem: initial density is not Hermitian");
    if (std::abs(rho.trace() - cplx(1.0)) > 1e-12)
        throw ValidationError("MatterSystem: initial density must have unit trace");

    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (H_ + H_.adjoint()));
    E_ = es.eigenvalues();
    W_ = es.eigenvectors();

    for (const auto& [name, V] : channels_) {
        CMatrix Ve = W_.adjoint() * V * W_;
        double scale = std::max(1.0, Ve.cwiseAbs().maxCoeff());
        bool splittable = Ve.diagonal().cwiseAbs().maxCoeff() <= 1e-12 * scale;
        CMatrix low = CMatrix::Zero(d, d), up = CMatrix::Zero(d, d);
        if (splittable) {
            // Ascending energies: elements above the diagonal take |n> to a
            // lower level m < n, so they form the lowering part.
            for (int m = 0; m < d; ++m)
                for (int n = 0; n < d; ++n) {
                    if (m < n)
                        low(m, n) = Ve(m, n);
                    else if (m > n)
                        up(m, n) = Ve(m, n);
                }
        }
        eigen_ops_[name] = {Ve, low, up};
        split_[name] = splittable;
    }

    rho0_ = 0.5 * (rho + rho.adjoint());
    CMatrix rho_e = W_.adjoint() * rho0_ * W_;
    Eigen::SelfAdjointEigenSolver<CMatrix> rs(0.5 * (rho_e + rho_e.adjoint()));
    if (rs.eigenvalues().minCoeff() < -1e-12)
        throw ValidationError("MatterSystem: initial density is not positive semidefinite");
    weights_.clear();
    states_e_.clear();
    for (int k = d - 1; k >= 0; --k) {
        double p = rs.eigenvalues()[k];
        if (p > 1e-14) {
            weights_.push_back(p);
            states_e_.push_back(rs.eigenvectors().col(k));
        }
    }
}

std::vector<std::string> MatterSystem::channel_names() const
{
    std::vector<std::string> out;
    for (const auto& kv : channels_)
        out.push_back(kv.first);
    return out;
}

const CMatrix& MatterSystem::dipole(const std::string& c) const
{
    auto it = channels_.find(c);
    if (it == channels_.end())
        throw LookupError("MatterSystem: unknown channel '" + c + "'");
    return it->second;
}

bool MatterSystem::has_split(const std::string& c) const
{
    dipole(c);
    return split_.at(c);
}

CMatrix MatterSystem::lowering(const std::string& c) const
{
    return W_ * eigen_operator(c, Flavor::lowering) * W_.adjoint();
}

CMatrix MatterSystem::raising(const std::string& c) const
{
    return W_ * eigen_operator(c, Flavor::raising) * W_.adjoint();
}

const CMatrix& MatterSystem::eigen_operator(const std::string& c, Flavor f) const
{
    auto it = eigen_ops_.find(c);
    if (it == eigen_ops_.end())
        throw LookupError("MatterSystem: unknown channel '" + c + "'");
    if (f != Flavor::full && !split_.at(c))
        throw ConfigurationError("MatterSystem: channel '" + c
            + "' has diagonal elements in the energy basis, so no raising/lowering split exists");
    return it->second[flavor_index(f)];
}

double MatterSystem::max_transition_frequency() const
{
    return E_.maxCoeff() - E_.minCoeff();
}

MatterSystem MatterSystem::with_initial_state(const CVector& psi) const
{
    return MatterSystem(H_, channels_, psi);
}

MatterSystem MatterSystem::with_initial_density(const CMatrix& rho) const
{
    return MatterSystem(H_, channels_, rho);
}

MatterSystem MatterSystem::decoupled() const
{
    std::map<std::string, CMatrix> zero;
    for (const auto& kv : channels_)
        zero[kv.first] = CMatrix::Zero(dim(), dim());
    return MatterSystem(H_, zero, rho0_);
}

CMatrix heisenberg_dipole(const MatterSystem& sys, const std::string& channel, double t, Flavor f)
{
    const CMatrix& Oe = sys.eigen_operator(channel, f);
    CVector ph = (kI * t * sys.energies().cast<cplx>()).array().exp();
    CMatrix Ot = ph.asDiagonal() * Oe * ph.conjugate().asDiagonal();
    CMatrix out = sys.eigenvectors() * Ot * sys.eigenvectors().adjoint();
    if (f == Flavor::full)
        out = 0.5 * (out + out.adjoint());
    return out;
}

cplx multipoint_correlator(const MatterSystem& sys, const CorrelatorSpec& spec)
{
    if (spec.insertions.empty())
        throw ValidationError("multipoint_correlator: empty insertion list");
    const int d = sys.dim();
    const auto& E = sys.energies();
    cplx total = 0.0;
    const auto& ws = sys.ensemble_weights();
    const auto& ss = sys.ensemble_states();
    for (size_t k = 0; k < ws.size(); ++k) {
        // sigma = |k><k|, kept as ket and bra factors as long as possible.
        CMatrix sigma = ss[k] * ss[k].adjoint();
        for (const Insertion& ins : spec.insertions) {
            if (!std::isfinite(ins.time))
                throw ValidationError("multipoint_correlator: non-finite insertion time");
            const CMatrix& Oe = sys.eigen_operator(ins.channel, ins.flavor);
            CMatrix O(d, d);
            for (int m = 0; m < d; ++m)
                for (int n = 0; n < d; ++n)
                    O(m, n) = Oe(m, n) * std::exp(kI * (E[m] - E[n]) * ins.time);
            if (ins.side == Side::left)
                sigma = O * sigma;
            else
                sigma = sigma * O;
        }
        total += ws[k] * sigma.trace();
    }
    return total;
}

cplx rwa_correlator(const MatterSystem& sys, const CorrelatorSpec& spec)
{
    for (const Insertion& ins : spec.insertions) {
        if (ins.flavor == Flavor::full)
            throw ValidationError("rwa_correlator: every insertion must be a lowering or raising operator");
        if (!sys.has_split(ins.channel))
            throw ConfigurationError("rwa_correlator: channel '" + ins.channel + "' has no raising/lowering split");
    }
    return multipoint_correlator(sys, spec);
}

CMatrix liouville_propagator(const MatterSystem& sys, double t)
{
    CVector ph = (-kI * t * sys.energies().cast<cplx>()).array().exp();
    CMatrix U = sys.eigenvectors() * ph.asDiagonal() * sys.eigenvectors().adjoint();
    return kron(U, U.conjugate());
}

CMatrix liouville_green(const MatterSystem& sys, double t)
{
    const int d = sys.dim();
    if (t < 0.0)
        return CMatrix::Zero(d * d, d * d);
    return -kI * liouville_propagator(sys, t);
}

CMatrix left_multiplication(const CMatrix& a)
{
    return kron(a, CMatrix::Identity(a.rows(), a.cols()));
}

CMatrix right_multiplication(const CMatrix& a)
{
    return kron(CMatrix::Identity(a.rows(), a.cols()), a.transpose());
}

CVector vectorize(const CMatrix& a)
{
    CVector v(a.size());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            v[i * a.cols() + j] = a(i, j);
    return v;
}

CMatrix unvectorize(const CVector& v, int dim)
{
    if (v.size() != dim * dim)
        throw ValidationError("unvectorize: size mismatch");
    CMatrix a(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
            a(i, j) = v[i * dim + j];
    return a;
}

MatterSystem v_system(double w1, double w2, double J, double mu_a, double mu_b)
{
    CMatrix H = CMatrix::Zero(3, 3);
    H(1, 1) = w1;
    H(2, 2) = w2;
    H(1, 2) = J;
    H(2, 1) = J;
    CMatrix Va = CMatrix::Zero(3, 3), Vb = CMatrix::Zero(3, 3);
    Va(0, 1) = Va(1, 0) = mu_a;
    Vb(0, 2) = Vb(2, 0) = mu_b;
    CVector g = CVector::Zero(3);
    g[0] = 1.0;
    return MatterSystem(H, {{"a", Va}, {"b", Vb}}, g);
}

MatterSystem two_level(double w0, double mu)
{
    CMatrix H = CMatrix::Zero(2, 2);
    H(1, 1) = w0;
    CMatrix V = CMatrix::Zero(2, 2);
    V(0, 1) = V(1, 0) = mu;
    CVector g = CVector::Zero(2);
    g[0] = 1.0;
    return MatterSystem(H, {{"a", V}, {"b", V}}, g);
}

} // namespace qlis
