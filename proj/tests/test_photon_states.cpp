#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "qlis/photon_states.hpp"

using namespace qlis;

namespace {

double grid_norm(const TwoPhotonAmplitude& phi)
{
    const double dw = phi.grid_a().spacing();
    return std::sqrt(phi.values().squaredNorm() * dw * dw);
}

} // namespace

TEST_CASE("frequency grid")
{
    FrequencyGrid g = FrequencyGrid::make(11, 1.0, 2.0);
    CHECK(g.spacing() == doctest::Approx(0.1).epsilon(1e-15));
    CHECK_THROWS_AS(FrequencyGrid::make(4, 0.0, 1.0), ValidationError);
    TimeGrid t = conjugate_time_grid(FrequencyGrid::centered(64, 0.0, 0.5));
    CHECK(t.dt == doctest::Approx(2.0 * kPi / (64 * 0.5)));
    CHECK(t.t(32) == doctest::Approx(0.0));
}

TEST_CASE("product amplitudes")
{
    FrequencyGrid g = FrequencyGrid::centered(64, 5.0, 0.15);
    TwoPhotonAmplitude same = product_amplitude(gaussian_envelope(g, 5.0, 0.8), gaussian_envelope(g, 5.0, 0.8));
    CHECK((same.values() - same.values().transpose()).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(std::abs(grid_norm(same) - 1.0) < 1e-10);

    SpectralEnvelope a = gaussian_envelope(g, 3.0, 0.2), b = gaussian_envelope(g, 7.0, 0.2);
    CHECK(std::abs(overlap(a, b)) < 1e-8);

    SpectralEnvelope zero{g, CVector::Zero(g.n_points)};
    CHECK_THROWS_AS(product_amplitude(zero, a), ValidationError);
}

TEST_CASE("theta symmetrisation")
{
    FrequencyGrid g = FrequencyGrid::centered(48, 4.0, 0.2);
    TwoPhotonAmplitude sym = product_amplitude(gaussian_envelope(g, 4.0, 0.7), gaussian_envelope(g, 4.0, 0.7));
    CHECK(grid_norm(theta_symmetrize(sym, kPi)) <= 1e-12);
    CHECK((theta_symmetrize(sym, 0.0).values() - std::sqrt(2.0) * sym.values()).norm() < 1e-14);

    TwoPhotonAmplitude orth = product_amplitude(gaussian_envelope(g, 2.5, 0.25), gaussian_envelope(g, 5.5, 0.25));
    for (double th : {0.0, 0.9, kPi})
        CHECK(std::abs(grid_norm(theta_symmetrize(orth, th)) - grid_norm(orth)) < 1e-10);

    // Global phase commutes with construction.
    cplx ph = std::exp(kI * 0.37);
    CHECK((theta_symmetrize(orth.scaled(ph), 0.4).values() - ph * theta_symmetrize(orth, 0.4).values()).norm()
        < 1e-14);
}

TEST_CASE("n-photon exchange phases")
{
    FrequencyGrid g = FrequencyGrid::centered(12, 4.0, 0.5);
    SpectralEnvelope e = gaussian_envelope(g, 4.0, 0.8);
    NPhotonAmplitude sym3 = NPhotonAmplitude::product({e, e, e});
    NPhotonAmplitude out = exchange_phase_amplitude(sym3, Eigen::MatrixXd::Zero(3, 3));
    double err = 0.0;
    for (size_t i = 0; i < out.values().size(); ++i)
        err = std::max(err, std::abs(out.values()[i] - 2.0 * sym3.values()[i]));
    CHECK(err < 1e-13);

    NPhotonAmplitude orth = NPhotonAmplitude::product(
        {gaussian_envelope(g, 2.0, 0.2), gaussian_envelope(g, 4.0, 0.2), gaussian_envelope(g, 6.0, 0.2)});
    Eigen::MatrixXd th(3, 3);
    th << 0, 0.3, 1.1, -0.3, 0, 2.0, -1.1, -2.0, 0;
    CHECK(std::abs(exchange_phase_amplitude(orth, th).norm() - orth.norm()) < 1e-10);

    // Two photons: same as theta_symmetrize.
    TwoPhotonAmplitude p2 = product_amplitude(gaussian_envelope(g, 3.5, 0.4), gaussian_envelope(g, 4.5, 0.6));
    std::vector<cplx> flat(p2.values().size());
    for (int i = 0; i < g.n_points; ++i)
        for (int j = 0; j < g.n_points; ++j)
            flat[size_t(i * g.n_points + j)] = p2.values()(i, j);
    Eigen::MatrixXd t2(2, 2);
    t2 << 0, 0.8, -0.8, 0;
    NPhotonAmplitude n2 = exchange_phase_amplitude(NPhotonAmplitude(2, g, flat), t2);
    TwoPhotonAmplitude ref = theta_symmetrize(p2, 0.8);
    double d = 0.0;
    for (int i = 0; i < g.n_points; ++i)
        for (int j = 0; j < g.n_points; ++j)
            d = std::max(d, std::abs(n2.values()[size_t(i * g.n_points + j)] - ref.values()(i, j)));
    CHECK(d < 1e-14);

    NPhotonAmplitude tt = orth.transposed(0, 2).transposed(0, 2);
    CHECK(tt.values() == orth.values());
    CHECK_THROWS_AS(NPhotonAmplitude(5, g, std::vector<cplx>(1)), CapabilityError);
}

TEST_CASE("time domain")
{
    FrequencyGrid g = FrequencyGrid::centered(128, 0.0, 0.1);
    const double sigma = 0.8;
    TwoPhotonAmplitude phi = product_amplitude(gaussian_envelope(g, 0.0, sigma), gaussian_envelope(g, 0.0, sigma));
    TimeAmplitude t = to_time_domain(phi);
    CHECK(std::abs(t.norm() - grid_norm(phi)) < 1e-9);

    // Temporal intensity width 1 / (2 sigma).
    double m0 = 0.0, m2 = 0.0;
    for (int i = 0; i < t.grid_a.n_points; ++i) {
        double w = (t.values.row(i).cwiseAbs2().sum());
        m0 += w;
        m2 += w * t.grid_a.t(i) * t.grid_a.t(i);
    }
    CHECK(std::sqrt(m2 / m0) == doctest::Approx(1.0 / (2.0 * sigma)).epsilon(0.02));

    // Round trip.
    TwoPhotonAmplitude back = from_time_domain(t, g, g);
    CHECK((back.values() - phi.values()).norm() < 1e-10);

    // A flat spectrum concentrates in one time bin.
    SpectralEnvelope flat{g, CVector::Ones(g.n_points)};
    CVector s = spectrum_to_time(g, flat.values);
    CHECK(s.cwiseAbs2().maxCoeff() / s.squaredNorm() > 0.95);
}

TEST_CASE("SPDC amplitude")
{
    SpdcParameters p;
    p.sigma_p = 0.05;
    p.T_e = 4.0;
    p.omega_a0 = 2.0;
    p.omega_b0 = 2.0;
    p.omega_p0 = 4.0;
    FrequencyGrid g = FrequencyGrid::centered(256, 2.0, 0.02);
    TwoPhotonAmplitude phi = spdc_amplitude(p, g);
    CHECK((phi.values() - phi.values().transpose()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(std::abs(grid_norm(phi) - 1.0) < 1e-10);

    // Sum-frequency marginal width.
    double m0 = 0.0, m1 = 0.0, m2 = 0.0;
    for (int i = 0; i < g.n_points; ++i)
        for (int j = 0; j < g.n_points; ++j) {
            double w = std::norm(phi.values()(i, j));
            double s = g.omega(i) + g.omega(j);
            m0 += w;
            m1 += w * s;
            m2 += w * s * s;
        }
    double sd = std::sqrt(m2 / m0 - (m1 / m0) * (m1 / m0));
    CHECK(sd == doctest::Approx(p.sigma_p).epsilon(0.1));

    FrequencyGrid narrow = FrequencyGrid::centered(16, 2.0, 0.02);
    CHECK_THROWS_AS(spdc_amplitude(p, narrow), CoverageError);
}

TEST_CASE("SPDC arrival-time difference is a box of width T_e")
{
    SpdcParameters p;
    p.sigma_p = 0.02;
    p.T_e = 3.0;
    p.omega_a0 = 2.0;
    p.omega_b0 = 2.0;
    p.omega_p0 = 4.0;
    FrequencyGrid g = FrequencyGrid::centered(256, 2.0, 0.04);
    TimeAmplitude t = to_time_domain(spdc_amplitude(p, g));
    const int n = t.grid_a.n_points;
    // Distribution of t1 - t2, summed over the mean time.
    std::vector<double> d(size_t(2 * n - 1), 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            d[size_t(i - j + n - 1)] += std::norm(t.values(i, j));
    double total = 0.0, inside = 0.0;
    for (int k = 0; k < 2 * n - 1; ++k) {
        double x = (k - n + 1) * t.grid_a.dt;
        total += d[size_t(k)];
        if (std::abs(x) <= 0.5 * p.T_e + t.grid_a.dt)
            inside += d[size_t(k)];
    }
    CHECK(inside / total > 0.9);
}

TEST_CASE("amplitude files round trip")
{
    FrequencyGrid g = FrequencyGrid::centered(16, 1.0, 0.1);
    TwoPhotonAmplitude phi = product_amplitude(gaussian_envelope(g, 0.9, 0.3, 0.5), gaussian_envelope(g, 1.1, 0.2));
    auto dir = std::filesystem::temp_directory_path() / "qlis_amp_test";
    std::filesystem::create_directories(dir);
    for (PayloadFormat f : {PayloadFormat::binary, PayloadFormat::csv}) {
        std::string base = (dir / (f == PayloadFormat::binary ? "bin_amp" : "csv_amp")).string();
        write_amplitude(phi, base, f);
        TwoPhotonAmplitude back = read_amplitude(base + ".json");
        CHECK(back.grid_a() == phi.grid_a());
        CHECK((back.values() - phi.values()).norm() <= (f == PayloadFormat::binary ? 0.0 : 1e-14));
    }
}
