#include <doctest.h>

#include "qlis/interferometer.hpp"
#include "qlis/photon_states.hpp"

using namespace qlis;

namespace {

CMatrix commutator(const CMatrix& a, const CMatrix& b)
{
    return a * b - b * a;
}

// Frobenius norm of m restricted to rows/columns with n1 + n2 <= total.
double sector_norm(const TwoModeFockOperators& ops, const CMatrix& m, int total)
{
    double s = 0.0;
    for (int r = 0; r < ops.dim(); ++r)
        for (int c = 0; c < ops.dim(); ++c) {
            int nr = r / (ops.n_max + 1) + r % (ops.n_max + 1);
            int nc = c / (ops.n_max + 1) + c % (ops.n_max + 1);
            if (nr <= total && nc <= total)
                s += std::norm(m(r, c));
        }
    return std::sqrt(s);
}

} // namespace

TEST_CASE("beam splitter matrices")
{
    ModeTransform id = beam_splitter(1.0, 0.0, 0.0);
    CHECK((id.matrix() - CMatrix2::Identity()).norm() < 1e-15);

    const double h = 1.0 / std::sqrt(2.0);
    ModeTransform bs = beam_splitter(h, h, 0.0);
    CMatrix2 expect;
    expect << h, kI * h, kI * h, h;
    CHECK((bs.matrix() - expect).norm() < 1e-15);

    ModeTransform b = beam_splitter(0.6, 0.8, 0.7);
    ModeTransform prod = compose(b, ModeTransform(b.matrix().adjoint(), TransformKind::passive));
    CHECK((prod.matrix() - CMatrix2::Identity()).norm() < 1e-12);

    CHECK_THROWS_AS(beam_splitter(0.6, 0.6, 0.0), ValidationError);
}

TEST_CASE("delayed balanced beam splitter")
{
    ModeTransform d = delayed_balanced_bs(0.0);
    const double h = 1.0 / std::sqrt(2.0);
    CHECK((d.matrix_at(1.3) - beam_splitter(h, h, 0.0).matrix()).norm() < 1e-15);

    ModeTransform dt = delayed_balanced_bs(0.8);
    CMatrix2 m = dt.matrix_at(2.0);
    CHECK(std::abs(m(0, 1) - kI * h * std::exp(-kI * 1.6)) < 1e-15);
    CHECK(std::abs(m(1, 0) - kI * h * std::exp(kI * 1.6)) < 1e-15);

    // Rotation followed by its inverse restores an amplitude.
    FrequencyGrid g = FrequencyGrid::centered(32, 3.0, 0.2);
    TwoPhotonAmplitude phi = product_amplitude(gaussian_envelope(g, 2.8, 0.5, 0.3), gaussian_envelope(g, 3.3, 0.4));
    TwoModeState s = TwoModeState::from_amplitude(phi);
    TwoModeState back = apply_transform(apply_transform(s, dt), dt.inverse());
    CHECK((back.two_mode_part().values() - phi.values()).norm() < 1e-12);
    CHECK(back.bunched_a().norm() < 1e-12);
    CHECK(back.bunched_b().norm() < 1e-12);
}

TEST_CASE("two-mode part after a delayed beam splitter")
{
    const double T = 0.7;
    FrequencyGrid g = FrequencyGrid::centered(24, 4.0, 0.25);
    TwoPhotonAmplitude phi = product_amplitude(gaussian_envelope(g, 3.5, 0.6), gaussian_envelope(g, 4.4, 0.5, 1.0));
    TwoModeState out = apply_transform(TwoModeState::from_amplitude(phi), delayed_balanced_bs(T));
    const CMatrix& v = phi.values();
    CMatrix expect(g.n_points, g.n_points);
    for (int i = 0; i < g.n_points; ++i)
        for (int j = 0; j < g.n_points; ++j)
            expect(i, j) = 0.5 * (v(i, j) - std::exp(kI * (g.omega(j) - g.omega(i)) * T) * v(j, i));
    CHECK((out.two_mode_part().values() - expect).norm() < 1e-12);
}

TEST_CASE("squeezer matrices")
{
    CHECK((squeezer(0.0, 1.1).matrix() - CMatrix2::Identity()).norm() < 1e-15);
    for (double beta : {0.1, 0.7, 1.5}) {
        CMatrix2 m = squeezer(beta, 0.4).matrix();
        CHECK(std::abs(std::norm(m(0, 0)) - std::norm(m(0, 1)) - 1.0) < 1e-12);
    }
    CMatrix2 m = squeezer(1.0, 0.0).matrix();
    CHECK(std::abs(m(0, 0) - std::cosh(1.0)) < 1e-15);
    CHECK(std::abs(m(0, 1) - std::sinh(1.0)) < 1e-15);
    CHECK(std::abs(m(1, 0) - std::sinh(1.0)) < 1e-15);
    CHECK(std::abs(m(1, 1) - std::cosh(1.0)) < 1e-15);

    CMatrix2 c = compose(squeezer(0.3, 0.0), squeezer(0.5, 0.0)).matrix();
    CHECK(bogoliubov_residual(c) < 1e-12);
}

TEST_CASE("Fock operators and Lie algebra")
{
    CHECK_THROWS_AS(build_fock_operators(1), ValidationError);
    TwoModeFockOperators ops = build_fock_operators(4);

    CVector v = CVector::Zero(ops.dim());
    v[ops.index(1, 0)] = 1.0;
    CHECK((ops.Jz * v - 0.5 * v).norm() < 1e-15);

    CHECK(sector_norm(ops, commutator(ops.Jx, ops.Jy) - kI * ops.Jz, ops.n_max - 1) < 1e-12);
    CHECK(sector_norm(ops, commutator(ops.Jy, ops.Jz) - kI * ops.Jx, ops.n_max - 1) < 1e-12);
    CHECK(sector_norm(ops, commutator(ops.Kx, ops.Ky) + kI * ops.Kz, ops.n_max - 1) < 1e-12);

    CMatrix J2 = ops.J2();
    for (int N = 0; N <= 3; ++N)
        for (int r : ops.sector(N)) {
            CVector e = CVector::Zero(ops.dim());
            e[r] = 1.0;
            CHECK((J2 * e - 0.5 * N * (0.5 * N + 1.0) * e).norm() < 1e-12);
        }
    for (const CMatrix* m : {&ops.Jx, &ops.Jy, &ops.Jz, &ops.Kx, &ops.Ky, &ops.Kz})
        CHECK((*m - m->adjoint()).norm() < 1e-15);
}

TEST_CASE("Casimir invariance under transforms")
{
    TwoModeFockOperators ops4 = build_fock_operators(4);
    CHECK(casimir_check(identity_transform(), ops4) < 1e-14);
    const double h = 1.0 / std::sqrt(2.0);
    CHECK(casimir_check(beam_splitter(h, h, 0.0), ops4, 2) <= 1e-10);
    CHECK(casimir_check(beam_splitter(h, h, 1.2), ops4, 2) <= 1e-10);
    TwoModeFockOperators ops6 = build_fock_operators(6);
    CHECK(casimir_check(squeezer(0.3, 0.0), ops6, 2) <= 1e-8);
}

TEST_CASE("passive transforms preserve photon number")
{
    TwoModeFockOperators ops = build_fock_operators(3);
    FockUnitary fu = fock_unitary(beam_splitter(0.6, 0.8, 0.4), 3, 3);
    CVector psi = CVector::Zero(ops.dim());
    psi[ops.index(1, 1)] = 0.6;
    psi[ops.index(2, 0)] = cplx(0.0, 0.8);
    CVector out = fu.U * psi;
    double n_in = psi.dot(ops.N * psi).real(), n_out = out.dot(ops.N * out).real();
    CHECK(std::abs(n_in - n_out) < 1e-12);
}

TEST_CASE("algebra report at n_max = 4")
{
    AlgebraReport rep = algebra_report(4);
    CHECK(rep.entries.size() > 10);
    CHECK(rep.max_residual() <= 1e-10);
}
