#include <doctest.h>

#include <limits>

#include "qlis/signal_engine.hpp"

using namespace qlis;

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

HomConfig gate_config(const MatterSystem& m)
{
    FrequencyGrid g = FrequencyGrid::centered(32, 1.0, 0.5);
    TwoPhotonAmplitude phi = product_amplitude(gaussian_envelope(g, 1.0, 0.6, -0.4), gaussian_envelope(g, 0.9, 0.6, 0.3));
    HomConfig c(phi, m);
    c.bs_delay_s = c.time_grid().dt;
    c.lambda = 0.05;
    return c;
}

HomConfig symmetric_config(const MatterSystem& m)
{
    FrequencyGrid g = FrequencyGrid::centered(32, 1.0, 0.5);
    SpectralEnvelope e = gaussian_envelope(g, 0.9, 0.6);
    HomConfig c(product_amplitude(e, e), m);
    c.lambda = 0.05;
    return c;
}

// Frequency-anticorrelated pair without a beam splitter, photon a chirped.
HomConfig epr_config(const MatterSystem& m)
{
    SpdcParameters p;
    p.sigma_p = 0.3;
    p.T_e = 4.0;
    p.omega_a0 = 2.0;
    p.omega_b0 = 2.0;
    p.omega_p0 = 4.0;
    FrequencyGrid g = FrequencyGrid::centered(64, 2.0, 0.1);
    HomConfig c(chirp_a(spdc_amplitude(p, g), 6.0), m);
    c.beam_splitter = false;
    c.lambda = 0.05;
    return c;
}

const MatterSystem& vsys()
{
    static const MatterSystem m = v_system(1.0, 0.6, 0.5, 1.0, 0.8);
    return m;
}

} // namespace

TEST_CASE("gate kinds")
{
    HomConfig c = gate_config(vsys());
    DetectionGate t = DetectionGate::time(0.0, 0.5), w = DetectionGate::frequency(1.0, 0.2);
    CHECK_THROWS_AS(gated_coincidence(c, 0.0, w, t), KindMismatchError);
    CHECK_THROWS_AS(exchange_cross_term(c, t, w), KindMismatchError);
    CHECK_THROWS_AS(time_frequency_coincidence(c, t, t), KindMismatchError);
    CHECK_THROWS_AS(time_frequency_coincidence(c, w, w), KindMismatchError);
    CHECK_THROWS_AS(DetectionGate::time(0.0, 0.0), ValidationError);
    CHECK(DetectionGate::open_time().weight(1e9) == 1.0);
}

TEST_CASE("gates away from the signal see nothing")
{
    HomConfig c = gate_config(vsys());
    const double end = c.time_grid().t_end() + 40.0;
    double v = gated_coincidence(c, 0.0, DetectionGate::time(end, 0.3), DetectionGate::time(end, 0.3));
    CHECK(std::abs(v) <= 1e-12);
    double tf = time_frequency_coincidence(c, DetectionGate::time(0.0, 0.5), DetectionGate::frequency(60.0, 0.2));
    CHECK(std::abs(tf) <= 1e-12);
}

TEST_CASE("wide gates recover the ungated count")
{
    HomConfig c = gate_config(vsys());
    GatedSignal s(c, 0.0, kNaN);
    double wide = gated_coincidence(c, 0.0, DetectionGate::time(0.0, 1e3), DetectionGate::time(0.0, 1e3));
    CHECK(std::abs(wide - s.ungated()) <= 0.01 * std::abs(s.ungated()));
    double open = gated_coincidence(c, 0.0, DetectionGate::open_time(), DetectionGate::open_time());
    CHECK(std::abs(open - s.ungated()) <= 1e-14 * std::abs(s.ungated()));
}

TEST_CASE("theta half-difference isolates the exchange cross term")
{
    HomConfig c = gate_config(vsys());
    DetectionGate ga = DetectionGate::time(0.4, 0.6), gb = DetectionGate::time(0.0, 0.6);
    double c0 = gated_coincidence(c, 0.0, ga, gb);
    double cpi = gated_coincidence(c, kPi, ga, gb);
    double x = exchange_cross_term(c, ga, gb);
    CHECK(std::abs(x) > 0.0);
    CHECK(std::abs(0.5 * (c0 - cpi) - x) <= 1e-6 * std::abs(x));

    // The gated count is linear in the exchange phase's cos/sin.
    std::vector<double> th{0.0, kPi / 3, 2 * kPi / 3, kPi, 4 * kPi / 3};
    std::vector<double> sig;
    for (double t : th)
        sig.push_back(gated_coincidence(c, t, ga, gb));
    PhaseCycleSolution sol = solve_phase_cycle(th, sig);
    CHECK(std::abs(sol.cross_re - x) <= 1e-6 * std::abs(x));
    CHECK(sol.residual <= 1e-10 * std::abs(sol.population));
}

TEST_CASE("symmetric input at theta = pi gives no two-mode coincidences")
{
    HomConfig c = symmetric_config(vsys().decoupled());
    GatedSignal s(c, kPi, kNaN);
    CHECK(s.ungated() <= 1e-24);
}

TEST_CASE("doubling the interaction margin leaves the gated count unchanged")
{
    HomConfig c = gate_config(vsys());
    DetectionGate ga = DetectionGate::time(0.2, 0.4), gb = DetectionGate::time(-0.2, 0.4);
    GateOptions o5, o10;
    o5.tstar_margin_widths = 5.0;
    o10.tstar_margin_widths = 10.0;
    double a = gated_coincidence(c, 0.0, ga, gb, o5), b = gated_coincidence(c, 0.0, ga, gb, o10);
    CHECK(std::abs(a - b) <= 1e-3 * std::abs(a));
}

TEST_CASE("fixed-delay signal")
{
    HomConfig c = gate_config(vsys());
    GatedSignal s(c, 0.0, kNaN);
    const double dt = s.grid().dt;
    for (int k : {1, 3, 6}) {
        double p = s.fixed_delay(k * dt, 0.3, 0.5, true), m = s.fixed_delay(-k * dt, 0.3, 0.5, false);
        CHECK(std::abs(p - m) <= 1e-9 * std::abs(m));
    }
    CHECK_THROWS_AS(s.fixed_delay(0.5 * dt, 0.3, 0.3), ValidationError);

    // Emission order: S(tau) and S(-tau) differ for nondegenerate channels.
    double asym = 0.0, scale = 0.0;
    for (int k = 1; k <= 6; ++k) {
        double p = s.fixed_delay(k * dt, 0.2, 0.2), m = s.fixed_delay(-k * dt, 0.2, 0.2);
        asym = std::max(asym, std::abs(p - m));
        scale = std::max(scale, std::abs(p) + std::abs(m));
    }
    CHECK(asym > 1e-6 * scale);

    // Explicit scan range: agrees with the periodic sum once it covers the support.
    DetectionGate ga = DetectionGate::time(0.0, 0.3), gb = DetectionGate::time(0.0, 0.3);
    FixedDelayOptions fo;
    const TimeGrid g = c.time_grid();
    fo.scan_range = std::make_pair(g.t0, g.t_end());
    double ranged = fixed_delay_signal(c, 0.0, 2 * dt, ga, gb, fo);
    double periodic = fixed_delay_signal(c, 0.0, 2 * dt, ga, gb);
    CHECK(std::abs(ranged - periodic) <= 1e-3 * std::abs(periodic));
    fo.scan_range = std::make_pair(0.5, 1.0);
    CHECK_THROWS_AS(fixed_delay_signal(c, 0.0, 2 * dt, ga, gb, fo), CoverageError);
}

TEST_CASE("decoupled matter with a stationary input gives a flat fixed-delay signal")
{
    FrequencyGrid g = FrequencyGrid::centered(32, 1.0, 0.5);
    HomConfig c(product_amplitude(single_bin_envelope(g, 14), single_bin_envelope(g, 18)), vsys().decoupled());
    c.beam_splitter = false;
    c.stationary = true;
    // Without exchange symmetrization: a symmetrized pair would beat at the
    // difference frequency.
    GatedSignal s(c, std::nullopt, kNaN);
    const double dt = s.grid().dt;
    double lo = 1e300, hi = -1e300, mean = 0.0;
    for (int k = -6; k <= 6; ++k) {
        double v = s.fixed_delay(k * dt, 0.3, 0.3);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        mean += v / 13.0;
    }
    CHECK(mean > 0.0);
    CHECK(hi - lo <= 1e-9 * mean);
}

TEST_CASE("time-frequency coincidences")
{
    HomConfig c = epr_config(vsys().decoupled());
    const FrequencyGrid& fg = c.state.grid_b();

    // Marginal over the idler frequency gate equals the time-gated count.
    const double wt = 1.0, ww = 0.15;
    DetectionGate gt = DetectionGate::time(1.0, wt);
    std::vector<double> all_w;
    for (int k = 0; k < fg.n_points; ++k)
        all_w.push_back(fg.omega(k));
    TimeFrequencyMap row = time_frequency_map(c, {gt.center}, all_w, wt, ww);
    double marg = fg.spacing() * row.values.sum() / (ww * std::sqrt(2.0 * kPi));
    CHECK(time_frequency_coincidence(c, gt, DetectionGate::frequency(all_w[20], ww))
        == doctest::Approx(row.values(0, 20)).epsilon(1e-12));
    GatedSignal s(c, std::nullopt, kNaN);
    double direct = s.count(gt, DetectionGate::open_time());
    CHECK(std::abs(marg - direct) <= 0.01 * std::abs(direct));

    // Map moments: chirped signal times track its frequency, which the
    // idler mirrors with the opposite sign.
    std::vector<double> ts, ws;
    for (int i = -6; i <= 6; ++i)
        ts.push_back(i * 3.0);
    for (int k = -6; k <= 6; ++k)
        ws.push_back(2.0 + 0.15 * k);
    TimeFrequencyMap m = time_frequency_map(c, ts, ws, 1.0, 0.1);
    CHECK(m.values.minCoeff() >= -1e-10);
    double s0 = 0, st = 0, sw = 0;
    for (size_t i = 0; i < ts.size(); ++i)
        for (size_t k = 0; k < ws.size(); ++k) {
            double v = m.values(Eigen::Index(i), Eigen::Index(k));
            s0 += v;
            st += v * ts[i];
            sw += v * ws[k];
        }
    double mt = st / s0, mw = sw / s0, ctw = 0, ctt = 0, cww = 0;
    for (size_t i = 0; i < ts.size(); ++i)
        for (size_t k = 0; k < ws.size(); ++k) {
            double v = m.values(Eigen::Index(i), Eigen::Index(k));
            ctw += v * (ts[i] - mt) * (ws[k] - mw);
            ctt += v * (ts[i] - mt) * (ts[i] - mt);
            cww += v * (ws[k] - mw) * (ws[k] - mw);
        }
    CHECK(ctw / std::sqrt(ctt * cww) < -0.5);
}

TEST_CASE("gated counts are non-negative")
{
    HomConfig c = gate_config(vsys());
    GatedSignal s(c, 0.7, kNaN);
    const TimeGrid& g = s.grid();
    for (int i = 4; i < g.n_points - 4; i += 5)
        for (int j = 4; j < g.n_points - 4; j += 5)
            CHECK(s.count(DetectionGate::time(g.t(i), 0.4), DetectionGate::time(g.t(j), 0.4)) >= -1e-10);
    CHECK(s.fixed_delay(0.0, 0.4, 0.4) >= -1e-10);
}
