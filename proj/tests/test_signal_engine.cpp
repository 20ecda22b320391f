#include <doctest.h>

#include "qlis/signal_engine.hpp"

using namespace qlis;

namespace {

HomConfig small_config(const MatterSystem& m)
{
    FrequencyGrid g = FrequencyGrid::centered(32, 1.0, 0.5);
    TwoPhotonAmplitude phi = product_amplitude(gaussian_envelope(g, 1.0, 0.6, -0.4), gaussian_envelope(g, 0.9, 0.6));
    HomConfig c(phi, m);
    const TimeGrid tg = c.time_grid();
    c.bs_delay_s = 2 * tg.dt;
    c.t_a_s = tg.t(18);
    c.t_b_s = tg.t(17);
    c.lambda = 0.05;
    return c;
}

SpdcParameters narrow_spdc()
{
    SpdcParameters p;
    p.sigma_p = 0.5;
    p.T_e = 0.25;
    p.omega_a0 = 0.8;
    p.omega_b0 = 0.8;
    p.omega_p0 = 1.6;
    return p;
}

} // namespace

TEST_CASE("OTOC term vanishes for decoupled matter and scales as lambda^4")
{
    MatterSystem vs = v_system(1.0, 0.6, 0.5, 1.0, 0.8);
    HomConfig c = small_config(vs.decoupled());
    CHECK(hom_coincidence(c, Contribution::otoc_term) == cplx(0.0));

    HomConfig d = small_config(vs);
    cplx o1 = hom_coincidence(d, Contribution::otoc_term);
    CHECK(std::abs(o1) > 0.0);
    d.lambda *= 2.0;
    cplx o2 = hom_coincidence(d, Contribution::otoc_term);
    CHECK(std::abs(o2 - 16.0 * o1) <= 1e-12 * std::abs(o2));
}

TEST_CASE("fourth-order breakdown")
{
    HomConfig c = small_config(v_system(1.0, 0.6, 0.5, 1.0, 0.8));
    FourthOrderBreakdown b = fourth_order_breakdown(c);
    REQUIRE(b.terms.size() == 9);
    CHECK(b.terms[0].label == "A2[det1]*A2[det1]");
    CHECK(b.terms[2].label == "2Re A2[det1]*A2[det2]");
    CHECK(b.terms[3].label == "2Re A0*A4[XXYY]");
    double sum = 0.0;
    for (const auto& t : b.terms)
        sum += t.value;
    CHECK(sum == doctest::Approx(b.total).epsilon(1e-14));
    CHECK(std::abs(b.total) > 0.0);
    CHECK(std::abs(b.stencil_total - b.total) <= 1e-9 * std::abs(b.total));
    CHECK(hom_coincidence(c, Contribution::all_fourth_order).real() == b.total);
    CHECK(b.terms[0].value >= 0.0);
    CHECK(b.terms[1].value >= 0.0);

    HomConfig free = small_config(v_system(1.0, 0.6, 0.5).decoupled());
    FourthOrderBreakdown f = fourth_order_breakdown(free);
    CHECK(f.total == 0.0);
    CHECK(f.order2 == 0.0);
    CHECK(f.background >= 0.0);
}

TEST_CASE("HOM configuration checks")
{
    MatterSystem vs = v_system(1.0, 0.6, 0.5, 1.0, 0.8);
    HomConfig c = small_config(vs);
    c.t_a_s += 0.1234;
    CHECK_THROWS_AS(hom_coincidence(c, Contribution::otoc_term), ValidationError);
    CHECK_THROWS_AS(hom_coincidence(c, Contribution::all_fourth_order), ValidationError);

    HomConfig far = small_config(vs);
    far.bs_delay_s = 20 * far.time_grid().dt;
    CHECK_THROWS_AS(hom_coincidence(far, Contribution::otoc_term), CoverageError);
    CHECK_THROWS_AS(fourth_order_breakdown(far), CoverageError);

    HomConfig nobs = small_config(vs);
    nobs.beam_splitter = false;
    CHECK_THROWS_AS(fourth_order_breakdown(nobs), ValidationError);

    HomConfig st = small_config(vs);
    st.stationary = true;
    st.bs_delay_s = 0.0;
    CHECK_THROWS_AS(fourth_order_breakdown(st), CapabilityError);

    HomConfig late = small_config(vs);
    late.t_star_s = late.time_grid().t_end() + 1.0;
    CHECK_THROWS_AS(fourth_order_breakdown(late), CoverageError);

    HomConfig neg = small_config(vs);
    neg.lambda = -0.1;
    CHECK_THROWS_AS(fourth_order_breakdown(neg), ValidationError);
}

TEST_CASE("narrowband SPDC window")
{
    MatterSystem vs = v_system(1.0, 0.6, 0.5, 1.0, 0.8);
    SpdcParameters p = narrow_spdc();
    NarrowbandOptions o;
    o.t_b_s = 0.0;
    o.dt_s = 0.02;
    const double tau = 0.5;

    o.t_a_s = tau + 0.14; // argument 0.56, outside
    NarrowbandResult out = narrowband_spdc_coincidence(p, vs, 1.0, tau, o);
    CHECK(out.otoc == cplx(0.0));
    CHECK(out.toc == cplx(0.0));

    o.t_a_s = tau + 0.05; // argument 0.2, inside
    NarrowbandResult in = narrowband_spdc_coincidence(p, vs, 1.0, tau, o);
    CHECK(std::abs(in.otoc) > 0.0);
    CHECK(std::abs(in.toc) > 0.0);
    CHECK_FALSE(in.timescale_warning);

    o.t_a_s = 0.625; // argument exactly 1/2: half weight
    NarrowbandResult edge = narrowband_spdc_coincidence(p, vs, 1.0, tau, o);
    o.t_a_s = 0.625 - 1e-9;
    NarrowbandResult inner = narrowband_spdc_coincidence(p, vs, 1.0, tau, o);
    CHECK(std::abs(edge.otoc - 0.5 * inner.otoc) < 1e-6 * std::abs(inner.otoc));

    o.t_a_s = tau;
    CHECK(narrowband_spdc_coincidence(p, vs, 0.0, tau, o).otoc == cplx(0.0));

    SpdcParameters slow = p;
    slow.T_e = 3.0;
    o.t_a_s = tau;
    CHECK(narrowband_spdc_coincidence(slow, vs, 1.0, tau, o).timescale_warning);
    CHECK_THROWS_AS(narrowband_spdc_coincidence(p, vs, -1.0, tau, o), ValidationError);
}

TEST_CASE("phase matching and retarded fields")
{
    CHECK(phase_matching(0.0, 2.0) == doctest::Approx(1.0));
    CHECK(std::abs(phase_matching(2.0 * kPi / 3.0, 3.0)) < 1e-15);
    CHECK(phase_matching(1.0, 2.0) == doctest::Approx(std::sin(1.0)));
    CHECK_THROWS_AS(phase_matching(1.0, 0.0), ValidationError);

    auto series = [](double t) { return cplx(std::cos(t), t); };
    CHECK(retarded_field_contribution(series, 1.5, 1.0) == cplx(0.0));
    cplx v = retarded_field_contribution(series, 1.5, 2.0);
    CHECK(std::abs(v - (-kI * series(0.5))) < 1e-15);
    CHECK_THROWS_AS(retarded_field_contribution(series, -1.0, 2.0), ValidationError);
}

TEST_CASE("phase-cycle solve")
{
    const double P = 2.5, xr = 0.7, xi = -0.3;
    std::vector<double> th{0.0, kPi / 2, kPi, 3 * kPi / 2}, s;
    for (double t : th)
        s.push_back(P + xr * std::cos(t) - xi * std::sin(t));
    PhaseCycleSolution sol = solve_phase_cycle(th, s);
    CHECK(sol.population == doctest::Approx(P).epsilon(1e-14));
    CHECK(sol.cross_re == doctest::Approx(xr).epsilon(1e-14));
    CHECK(sol.cross_im == doctest::Approx(xi).epsilon(1e-14));
    CHECK(sol.residual < 1e-14);

    CHECK_THROWS_AS(solve_phase_cycle({0.0, kPi}, {1.0, 2.0}), ValidationError);
    CHECK_THROWS_AS(solve_phase_cycle({0.0, 0.0, 2 * kPi}, {1.0, 1.0, 1.0}), ValidationError);
}
