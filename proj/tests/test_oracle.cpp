#include <doctest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include "qlis/discrete_modes.hpp"

using namespace qlis;

namespace {

DiscreteProblem standard_problem()
{
    DiscreteProblem p(v_system(1.0, 0.6, 0.5, 1.0, 0.8), 0.8, 0.8);
    p.t = 2.0;
    return p;
}

} // namespace

TEST_CASE("joint propagation")
{
    MatterSystem vs = v_system(1.0, 0.6, 0.5, 1.0, 0.8);
    JointModel m(vs, 0.8, 0.9, 2, 0.3);
    CHECK(m.dim() == 27);
    CVector g = CVector::Zero(3);
    g[0] = 1.0;
    CVector psi = m.product_state(g, 1, 1);
    CVector out = propagate(m, psi, 1.7);
    CHECK(std::abs(out.norm() - 1.0) < 1e-12);
    double e0 = psi.dot(m.hamiltonian() * psi).real(), e1 = out.dot(m.hamiltonian() * out).real();
    CHECK(std::abs(e0 - e1) < 1e-12);
    CVector ref = (CMatrix(-kI * 1.7 * m.hamiltonian())).exp() * psi;
    CHECK((out - ref).norm() < 1e-11);

    // Decoupled: the product state only picks up phases.
    JointModel free(vs, 0.8, 0.9, 2, 0.0);
    CVector f = propagate(free, psi, 1.1);
    CHECK(std::abs(std::abs(psi.dot(f)) - 1.0) < 1e-12);

    CHECK_THROWS_AS(JointModel(vs, 0.8, 0.9, 1, 0.1), ValidationError);
    CHECK_THROWS_AS(m.product_state(g, 3, 0), TruncationOverflowError);
}

TEST_CASE("exact coincidence without coupling")
{
    MatterSystem vs = v_system(1.0, 0.6, 0.5);
    JointModel m(vs, 0.8, 0.8, 2, 0.0);
    CHECK(std::abs(exact_coincidence(m, 1, 1, identity_transform(), 0.7) - 1.0) < 1e-12);
    // Hong-Ou-Mandel: |1,1> on a balanced beam splitter never gives a coincidence.
    CHECK(std::abs(exact_coincidence(m, 1, 1, delayed_balanced_bs(0.0), 0.7)) < 1e-12);
    CHECK(std::abs(exact_coincidence(m, 1, 0, identity_transform(), 0.7)) < 1e-15);
    CHECK_THROWS_AS(coincidence_observable(squeezer(0.2, 0.0), 2, 0.0), KindMismatchError);
}

TEST_CASE("RWA coupling conserves excitations")
{
    MatterSystem vs = v_system(1.0, 0.6, 0.5, 1.0, 0.8);
    JointModel m(vs, 0.8, 0.8, 3, 0.4, CouplingForm::rwa);
    RVector exc(3);
    exc << 0.0, 1.0, 1.0;
    CMatrix N = m.excitation_number(exc);
    CHECK((N * m.hamiltonian() - m.hamiltonian() * N).norm() < 1e-12);

    JointModel full(vs, 0.8, 0.8, 3, 0.4, CouplingForm::full);
    CHECK((N * full.hamiltonian() - full.hamiltonian() * N).norm() > 0.1);
}

TEST_CASE("Dyson orders")
{
    CMatrix H0 = CMatrix::Random(4, 4), V = CMatrix::Random(4, 4);
    H0 = 0.5 * (H0 + H0.adjoint());
    V = 0.5 * (V + V.adjoint());
    const double t = 0.9;
    std::vector<CMatrix> u = dyson_orders(H0, V, t, 4);
    CHECK((u[0] - CMatrix(-kI * t * H0).exp()).norm() < 1e-12);
    // The truncated series misses the fifth order: the error falls as l^5.
    auto err = [&](double l) {
        CMatrix sum = CMatrix::Zero(4, 4);
        for (int k = 4; k >= 0; --k)
            sum = sum * l + u[size_t(k)];
        return (sum - CMatrix(-kI * t * (H0 + l * V)).exp()).norm();
    };
    const double bound = std::pow(t * V.norm(), 5) / 120.0;
    CHECK(err(0.05) < 2.0 * bound * std::pow(0.05, 5));
    CHECK(err(0.05) / err(0.025) == doctest::Approx(32.0).epsilon(0.1));
    CHECK_THROWS_AS(dyson_orders(H0, V, t, 9), CapabilityError);
}

TEST_CASE("discrete weak-coupling series against the exact oracle")
{
    DiscreteProblem p = standard_problem();
    DiscreteSeries s = discrete_series(p);
    CHECK(std::abs(s.s[0]) < 1e-12);
    CHECK(std::abs(s.s[1]) < 1e-12);
    CHECK(std::abs(s.s[2]) < 1e-12);
    CHECK(std::abs(s.s[3]) < 1e-12);
    CHECK(std::abs(s.s[4]) > 1e-3);

    double prev = 0.0;
    for (double l : {1e-3, 3e-3, 1e-2}) {
        double ex = discrete_exact(p, l);
        double rel = std::abs(ex - s.all_fourth_order(l)) / std::abs(ex);
        CHECK(rel < 1e-3);
        if (prev > 0.0)
            CHECK(rel > prev);
        prev = rel;
    }
}

TEST_CASE("detection routes agree")
{
    DiscreteProblem p = standard_problem();
    DiscreteSeries a = discrete_series(p, DetectionRoute::interaction_order);
    DiscreteSeries b = discrete_series(p, DetectionRoute::arrival_order);
    for (int k = 0; k < 5; ++k)
        CHECK(std::abs(a.s[size_t(k)] - b.s[size_t(k)]) < 1e-10);

    p.form = CouplingForm::full;
    CHECK_THROWS_AS(discrete_series(p, DetectionRoute::arrival_order), CapabilityError);
}

TEST_CASE("Liouville pathways add up to the nested commutator")
{
    DiscreteProblem p = standard_problem();
    PathwayCheck c = pathway_completeness(p, 8);
    CHECK(c.labels.size() == 16);
    CHECK(c.values.size() == 16);
    CHECK(std::abs(c.pathway_sum - c.commutator) <= 1e-10 * std::max(1.0, std::abs(c.commutator)));
    CHECK(std::abs(c.commutator) > 1e-6);
    CHECK_THROWS_AS(pathway_completeness(p, 2), ValidationError);
}
