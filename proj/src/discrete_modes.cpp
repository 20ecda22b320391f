#include "qlis/discrete_modes.hpp"

#include <unsupported/Eigen/MatrixFunctions>

namespace qlis {

DiscreteProblem::DiscreteProblem(MatterSystem matter_, double omega_a0_, double omega_b0_)
    : matter(std::move(matter_)), omega_a0(omega_a0_), omega_b0(omega_b0_)
{
}

std::vector<CMatrix> dyson_orders(const CMatrix& H0, const CMatrix& V, double t, int max_order)
{
    if (H0.rows() != H0.cols() || V.rows() != H0.rows() || V.cols() != H0.cols())
        throw ValidationError("dyson_orders: H0 and V must be square and of equal size");
    if (max_order < 0 || max_order > 8)
        throw CapabilityError("dyson_orders: max_order must lie in [0, 8]");
    const Eigen::Index d = H0.rows();
    const int b = max_order + 1;
    if (d * b > 4096)
        throw CapabilityError("dyson_orders: block matrix too large");
    CMatrix M = CMatrix::Zero(d * b, d * b);
    for (int k = 0; k < b; ++k) {
        M.block(k * d, k * d, d, d) = -kI * t * H0;
        if (k + 1 < b)
            M.block(k * d, (k + 1) * d, d, d) = -kI * t * V;
    }
    CMatrix E = M.exp();
    std::vector<CMatrix> out;
    for (int k = 0; k < b; ++k)
        out.push_back(E.block(0, k * d, d, d));
    return out;
}

double DiscreteSeries::through_fourth(double lambda) const
{
    double l2 = lambda * lambda;
    return s[0] + l2 * s[2] + l2 * l2 * s[4];
}

namespace {

struct Operators {
    CMatrix H0, V, O;
    std::vector<CVector> psi0;
    std::vector<double> weights;
};

Operators build(const DiscreteProblem& p, DetectionRoute route)
{
    if (p.interferometer.kind() != TransformKind::passive)
        throw KindMismatchError("discrete model: interferometer must be passive");
    JointModel m0(p.matter, p.omega_a0, p.omega_b0, p.n_max, 0.0, p.form);
    JointModel m1(p.matter, p.omega_a0, p.omega_b0, p.n_max, 1.0, p.form);
    Operators o;
    o.H0 = m0.hamiltonian();
    o.V = m1.hamiltonian() - m0.hamiltonian();
    o.weights = p.matter.ensemble_weights();
    for (const auto& s : p.matter.ensemble_states())
        o.psi0.push_back(m0.product_state(p.matter.eigenvectors() * s, p.n_a, p.n_b));
    if (route == DetectionRoute::interaction_order) {
        o.O = m0.lift_field(coincidence_observable(p.interferometer, p.n_max, 0.0));
        return o;
    }
    if (p.form != CouplingForm::rwa)
        throw CapabilityError("arrival-order route needs the RWA coupling (photon number stays within n_max)");
    ModeTransform fixed(p.interferometer.matrix_at(0.0), TransformKind::passive);
    CMatrix U = m0.lift_field(fock_unitary(fixed, p.n_max, p.n_max).U);
    o.H0 = U * o.H0 * U.adjoint();
    o.V = U * o.V * U.adjoint();
    for (auto& v : o.psi0)
        v = U * v;
    o.O = m0.lift_field(coincidence_observable(identity_transform(), p.n_max, 0.0));
    return o;
}

} // namespace

DiscreteSeries discrete_series(const DiscreteProblem& p, DetectionRoute route)
{
    Operators o = build(p, route);
    std::vector<CMatrix> U = dyson_orders(o.H0, o.V, p.t, 4);
    DiscreteSeries out;
    for (size_t k = 0; k < o.psi0.size(); ++k) {
        std::vector<CVector> psi;
        for (const auto& u : U)
            psi.push_back(u * o.psi0[k]);
        for (int order = 0; order <= 4; ++order) {
            cplx acc = 0.0;
            for (int j = 0; j <= order; ++j)
                acc += psi[size_t(j)].dot(o.O * psi[size_t(order - j)]);
            out.s[size_t(order)] += o.weights[k] * acc.real();
        }
    }
    return out;
}

double discrete_exact(const DiscreteProblem& p, double lambda)
{
    JointModel m(p.matter, p.omega_a0, p.omega_b0, p.n_max, lambda, p.form);
    return exact_coincidence(m, p.n_a, p.n_b, p.interferometer, p.t);
}

PathwayCheck pathway_completeness(const DiscreteProblem& p, int n_steps)
{
    if (n_steps < 4 || n_steps > 40)
        throw ValidationError("pathway_completeness: n_steps must lie in [4, 40]");
    Operators o = build(p, DetectionRoute::interaction_order);
    const Eigen::Index d = o.H0.rows();
    Eigen::SelfAdjointEigenSolver<CMatrix> es(o.H0);
    auto evolve = [&](double s) {
        CVector ph(d);
        for (Eigen::Index i = 0; i < d; ++i)
            ph[i] = std::exp(-kI * es.eigenvalues()[i] * s);
        return CMatrix(es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint());
    };
    const double h = p.t / n_steps;
    std::vector<CMatrix> VI(size_t(n_steps + 1));
    for (int j = 0; j <= n_steps; ++j) {
        CMatrix u = evolve(j * h);
        VI[size_t(j)] = u.adjoint() * o.V * u;
    }
    CMatrix ut = evolve(p.t);
    CMatrix OI = ut.adjoint() * o.O * ut;
    CMatrix rho0 = CMatrix::Zero(d, d);
    for (size_t k = 0; k < o.psi0.size(); ++k)
        rho0 += o.weights[k] * o.psi0[k] * o.psi0[k].adjoint();

    PathwayCheck out;
    for (int pat = 0; pat < 16; ++pat) {
        std::string l;
        for (int q = 0; q < 4; ++q)
            l += (pat >> q) & 1 ? 'R' : 'L';
        out.labels.push_back(l);
    }
    out.values.assign(16, 0.0);
    const double w = h * h * h * h; // (-i)^4 = 1
    auto comm = [](const CMatrix& v, const CMatrix& x) { return CMatrix(v * x - x * v); };
    for (int i1 = 0; i1 <= n_steps; ++i1)
        for (int i2 = i1 + 1; i2 <= n_steps; ++i2)
            for (int i3 = i2 + 1; i3 <= n_steps; ++i3)
                for (int i4 = i3 + 1; i4 <= n_steps; ++i4) {
                    const std::array<const CMatrix*, 4> v{&VI[size_t(i1)], &VI[size_t(i2)], &VI[size_t(i3)],
                        &VI[size_t(i4)]};
                    std::vector<CMatrix> level{rho0};
                    for (int q = 0; q < 4; ++q) {
                        std::vector<CMatrix> next(level.size() * 2);
                        for (size_t a = 0; a < level.size(); ++a) {
                            next[a] = *v[size_t(q)] * level[a];
                            next[a + level.size()] = -(level[a] * *v[size_t(q)]);
                        }
                        level = std::move(next);
                    }
                    for (int pat = 0; pat < 16; ++pat)
                        out.values[size_t(pat)] += w * (OI * level[size_t(pat)]).trace().real();
                    CMatrix c = comm(*v[3], comm(*v[2], comm(*v[1], comm(*v[0], rho0))));
                    out.commutator += w * (OI * c).trace().real();
                }
    for (double x : out.values)
        out.pathway_sum += x;
    return out;
}

} // namespace qlis
