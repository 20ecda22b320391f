#include <algorithm>
#include <cmath>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "qlis/interferometer.hpp"

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

CMatrix commutator(const CMatrix& a, const CMatrix& b)
{
    return a * b - b * a;
}

double restricted_norm(const CMatrix& m, const std::vector<int>& cols)
{
    double s = 0.0;
    for (int c : cols)
        s += m.col(c).squaredNorm();
    return std::sqrt(s);
}

// exp(-i H) for a Hermitian H.
CMatrix unitary_from_hermitian(const CMatrix& H)
{
    Eigen::SelfAdjointEigenSolver<CMatrix> es(H);
    CVector ph = (-kI * es.eigenvalues().cast<cplx>()).array().exp();
    return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

// Generator (a Hermitian 2x2 or su(1,1) element) from the mode matrix.
CMatrix2 matrix_log(const CMatrix2& m)
{
    return m.log();
}

} // namespace

CMatrix TwoModeFockOperators::J2() const
{
    return Jx * Jx + Jy * Jy + Jz * Jz;
}

CMatrix TwoModeFockOperators::K2() const
{
    return Kz * Kz - Kx * Kx - Ky * Ky;
}

std::vector<int> TwoModeFockOperators::sector_up_to(int total) const
{
    std::vector<int> out;
    for (int n1 = 0; n1 <= n_max; ++n1)
        for (int n2 = 0; n2 <= n_max; ++n2)
            if (n1 + n2 <= total)
                out.push_back(index(n1, n2));
    return out;
}

std::vector<int> TwoModeFockOperators::sector(int total) const
{
    std::vector<int> out;
    for (int n1 = 0; n1 <= n_max; ++n1)
        for (int n2 = 0; n2 <= n_max; ++n2)
            if (n1 + n2 == total)
                out.push_back(index(n1, n2));
    return out;
}

TwoModeFockOperators build_fock_operators(int n_max)
{
    if (n_max < 2)
        throw ValidationError("build_fock_operators: n_max must be at least 2");
    const int m = n_max + 1;
    CMatrix a = CMatrix::Zero(m, m);
    for (int n = 1; n < m; ++n)
        a(n - 1, n) = std::sqrt(double(n));
    CMatrix id = CMatrix::Identity(m, m);

    TwoModeFockOperators ops;
    ops.n_max = n_max;
    ops.a1 = kron(a, id);
    ops.a2 = kron(id, a);
    ops.a1_dag = ops.a1.adjoint();
    ops.a2_dag = ops.a2.adjoint();

    const CMatrix ad = a.adjoint();
    const CMatrix num = ad * a;
    CMatrix n1 = kron(num, id);
    CMatrix n2 = kron(id, num);
    CMatrix hop = kron(ad, a);
    CMatrix pair = kron(ad, ad);

    ops.Jx = 0.5 * (hop + hop.adjoint());
    ops.Jy = -0.5 * kI * (hop - hop.adjoint());
    ops.Jz = 0.5 * (n1 - n2);
    ops.Kx = 0.5 * (pair + pair.adjoint());
    ops.Ky = -0.5 * kI * (pair - pair.adjoint());
    // a2 a2^dag is built from n2 + 1 so the top rung is not clipped.
    ops.Kz = 0.5 * (n1 + n2 + CMatrix::Identity(ops.dim(), ops.dim()));
    ops.N = n1 + n2;
    return ops;
}

FockUnitary fock_unitary(const ModeTransform& t, int n_max, int safe_total)
{
    FockUnitary out;
    const int m = n_max + 1;
    if (t.kind() == TransformKind::passive) {
        // U = exp(-i sum G_ij a_i^dag a_j) with exp(-i G) = M gives U^dag a U = M a.
        CMatrix2 G = kI * matrix_log(t.matrix());
        G = 0.5 * (G + G.adjoint());
        TwoModeFockOperators ops = build_fock_operators(n_max);
        CMatrix H = G(0, 0) * ops.a1_dag * ops.a1 + G(0, 1) * ops.a1_dag * ops.a2
            + G(1, 0) * ops.a2_dag * ops.a1 + G(1, 1) * ops.a2_dag * ops.a2;
        out.U = unitary_from_hermitian(0.5 * (H + H.adjoint()));
        return out;
    }

    // Active: X = log M = ((i(phi+psi), c), (c*, i(psi-phi))) is generated by
    // A = c a1^dag a2^dag - c* a1 a2 + i phi (n1 + n2) + i psi (n1 - n2), U = exp(A).
    CMatrix2 X = matrix_log(t.matrix());
    double phi = 0.5 * (X(0, 0) - X(1, 1)).imag();
    double psi = 0.5 * (X(0, 0) + X(1, 1)).imag();
    cplx c = X(0, 1);
    double form_err = std::abs(X(0, 0).real()) + std::abs(X(1, 1).real()) + std::abs(X(1, 0) - std::conj(c));
    if (form_err > 1e-9)
        throw ValidationError("fock_unitary: active matrix is not generated by the two-mode squeezing algebra");

    // A conserves n1 - n2, so exponentiate each difference sector on an
    // enlarged ladder and keep the part that lands inside the cutoff.
    out.U = CMatrix::Zero(m * m, m * m);
    int pad = 8;
    const int max_pad = 400;
    for (;;) {
        const int W = n_max + pad;
        double tail = 0.0;
        double overflow = 0.0;
        CMatrix U = CMatrix::Zero(m * m, m * m);
        for (int d = -n_max; d <= n_max; ++d) {
            // sector states: n1 = k + max(d,0), n2 = k + max(-d,0), k = 0..L-1
            int o1 = std::max(d, 0), o2 = std::max(-d, 0);
            int L = W + 1 - std::max(o1, o2);
            CMatrix A = CMatrix::Zero(L, L);
            for (int k = 0; k < L; ++k) {
                int n1 = k + o1, n2 = k + o2;
                A(k, k) = kI * (phi * double(n1 + n2) + psi * double(n1 - n2));
                if (k + 1 < L) {
                    double amp = std::sqrt(double(n1 + 1) * double(n2 + 1));
                    A(k + 1, k) += c * amp;
                    A(k, k + 1) += -std::conj(c) * amp;
                }
            }
            CMatrix Uk = unitary_from_hermitian(0.5 * kI * (A - A.adjoint()));
            for (int k = 0; k < L; ++k) {
                int n1 = k + o1, n2 = k + o2;
                if (n1 > n_max || n2 > n_max)
                    continue;
                bool safe = n1 + n2 <= safe_total;
                for (int r = 0; r < L; ++r) {
                    int r1 = r + o1, r2 = r + o2;
                    if (r1 <= n_max && r2 <= n_max)
                        U(r1 * m + r2, n1 * m + n2) = Uk(r, k);
                    else if (safe)
                        overflow += std::norm(Uk(r, k));
                }
                if (safe)
                    tail = std::max(tail, std::norm(Uk(L - 1, k)) + (L > 1 ? std::norm(Uk(L - 2, k)) : 0.0));
            }
        }
        if (tail < 1e-28 || pad >= max_pad) {
            if (tail >= 1e-28)
                throw TruncationOverflowError("fock_unitary: active transform does not converge on any finite ladder");
            out.U = U;
            out.leakage = overflow;
            break;
        }
        pad *= 2;
    }
    return out;
}

double casimir_check(const ModeTransform& t, const TwoModeFockOperators& ops, int safe_total)
{
    if (safe_total < 0)
        throw ValidationError("casimir_check: safe_total must be non-negative");
    if (t.kind() == TransformKind::passive) {
        if (safe_total > ops.n_max)
            throw ValidationError("casimir_check: safe sector exceeds the photon cutoff");
        FockUnitary fu = fock_unitary(t, ops.n_max, safe_total);
        CMatrix J2 = ops.J2();
        CMatrix diff = fu.U.adjoint() * J2 * fu.U - J2;
        return restricted_norm(diff, ops.sector_up_to(safe_total));
    }

    if (safe_total > ops.n_max - 1)
        throw ValidationError("casimir_check: safe sector must leave one rung below the cutoff");
    // Work on a ladder large enough that the squeezed states of the safe
    // sector are fully contained, then compare K^2 there.
    FockUnitary probe = fock_unitary(t, ops.n_max, safe_total);
    if (probe.leakage > 1e-3) {
        std::ostringstream os;
        os << "casimir_check: active transform moves " << probe.leakage
           << " of the probability above n_max = " << ops.n_max << "; raise the cutoff";
        throw TruncationOverflowError(os.str());
    }
    int work = ops.n_max;
    FockUnitary fu;
    for (;;) {
        fu = fock_unitary(t, work, safe_total);
        if (fu.leakage < 1e-26)
            break;
        work += 4;
        if (work > 200)
            throw TruncationOverflowError("casimir_check: active transform needs more than 200 photons per mode");
    }
    TwoModeFockOperators big = build_fock_operators(work);
    auto K2 = [&](const CMatrix& x) -> CMatrix {
        CMatrix kz = big.Kz * x, kx = big.Kx * x, ky = big.Ky * x;
        return big.Kz * kz - big.Kx * kx - big.Ky * ky;
    };
    std::vector<int> cols = big.sector_up_to(safe_total);
    CMatrix basis = CMatrix::Zero(big.dim(), Eigen::Index(cols.size()));
    for (size_t k = 0; k < cols.size(); ++k)
        basis(cols[k], Eigen::Index(k)) = 1.0;
    CMatrix Ucols = fu.U * basis;
    CMatrix diff = fu.U.adjoint() * K2(Ucols) - K2(basis);
    return diff.norm();
}

double AlgebraReport::max_residual() const
{
    double m = 0.0;
    for (const auto& e : entries)
        m = std::max(m, e.residual);
    return m;
}

AlgebraReport algebra_report(int n_max)
{
    TwoModeFockOperators ops = build_fock_operators(n_max);
    AlgebraReport rep;
    auto add = [&](const std::string& name, double r) { rep.entries.push_back({name, r}); };

    std::vector<int> j_safe = ops.sector_up_to(n_max);
    std::vector<int> k_safe = ops.sector_up_to(n_max - 1);

    // [a_i, a_j^dag] = delta_ij below the truncation edge.
    {
        std::vector<int> below = ops.sector_up_to(n_max - 1);
        CMatrix id = CMatrix::Identity(ops.dim(), ops.dim());
        add("[a1,a1^dag]-1", restricted_norm(commutator(ops.a1, ops.a1_dag) - id, below));
        add("[a2,a2^dag]-1", restricted_norm(commutator(ops.a2, ops.a2_dag) - id, below));
        add("[a1,a2^dag]", restricted_norm(commutator(ops.a1, ops.a2_dag), below));
    }

    add("[Jx,Jy]-iJz", restricted_norm(commutator(ops.Jx, ops.Jy) - kI * ops.Jz, j_safe));
    add("[Jy,Jz]-iJx", restricted_norm(commutator(ops.Jy, ops.Jz) - kI * ops.Jx, j_safe));
    add("[Jz,Jx]-iJy", restricted_norm(commutator(ops.Jz, ops.Jx) - kI * ops.Jy, j_safe));
    add("[Kx,Ky]+iKz", restricted_norm(commutator(ops.Kx, ops.Ky) + kI * ops.Kz, k_safe));
    add("[Ky,Kz]-iKx", restricted_norm(commutator(ops.Ky, ops.Kz) - kI * ops.Kx, k_safe));
    add("[Kz,Kx]-iKy", restricted_norm(commutator(ops.Kz, ops.Kx) - kI * ops.Ky, k_safe));

    add("J hermiticity", (ops.Jx - ops.Jx.adjoint()).norm() + (ops.Jy - ops.Jy.adjoint()).norm()
            + (ops.Jz - ops.Jz.adjoint()).norm());
    add("K hermiticity", (ops.Kx - ops.Kx.adjoint()).norm() + (ops.Ky - ops.Ky.adjoint()).norm()
            + (ops.Kz - ops.Kz.adjoint()).norm());

    CMatrix J2 = ops.J2();
    for (int N = 0; N <= n_max; ++N) {
        std::vector<int> sec = ops.sector(N);
        double expect = 0.5 * N * (0.5 * N + 1.0);
        CMatrix col = CMatrix::Zero(ops.dim(), ops.dim());
        for (int c : sec)
            col(c, c) = expect;
        add("J^2 on N=" + std::to_string(N), restricted_norm(J2 - col, sec));
    }
    // Two-mode realisation: K^2 = Jz^2 - 1/4.
    {
        CMatrix target = ops.Jz * ops.Jz - 0.25 * CMatrix::Identity(ops.dim(), ops.dim());
        add("K^2-(Jz^2-1/4)", restricted_norm(ops.K2() - target, k_safe));
    }

    double h = 1.0 / std::sqrt(2.0);
    add("BS(0.6,0.8,0.3) unitarity", unitarity_residual(beam_splitter(0.6, 0.8, 0.3).matrix()));
    add("balanced BS unitarity", unitarity_residual(beam_splitter(h, h, 0.0).matrix()));
    add("balanced BS Casimir", casimir_check(beam_splitter(h, h, 0.0), ops, std::min(2, n_max)));
    if (n_max >= 3)
        add("squeezer(0.3) Casimir", casimir_check(squeezer(0.3, 0.0), ops, std::clamp(n_max - 4, 0, 2)));
    return rep;
}

} // namespace qlis
