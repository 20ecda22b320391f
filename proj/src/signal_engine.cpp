#include "qlis/signal_engine.hpp"

#include <cmath>
#include <sstream>

namespace qlis {

HomConfig::HomConfig(TwoPhotonAmplitude state_, MatterSystem matter_)
    : state(std::move(state_)), matter(std::move(matter_))
{
}

TimeGrid HomConfig::time_grid() const
{
    return conjugate_time_grid(state.grid_a());
}

namespace {

int grid_index_exact(const TimeGrid& g, double t, const char* what)
{
    double x = (t - g.t0) / g.dt;
    long j = std::lround(x);
    if (std::abs(x - double(j)) > 1e-6 || j < 0 || j >= g.n_points) {
        std::ostringstream os;
        os << what << " " << t << " s is not a point of the time grid (t0 = " << g.t0 << " s, dt = " << g.dt
           << " s, " << g.n_points << " points)";
        throw ValidationError(os.str());
    }
    return int(j);
}

bool matter_is_decoupled(const MatterSystem& m)
{
    for (const auto& name : m.channel_names())
        if (!m.dipole(name).isZero(0.0))
            return false;
    return true;
}

void coverage_from_input(const HomConfig& cfg, const TimeDomainInput& in)
{
    const TimeGrid& g = in.grid;
    const int n = g.n_points;
    RVector ma = RVector::Zero(n), mb = RVector::Zero(n);
    for (int p = 0; p < 2; ++p)
        for (int q = 0; q < 2; ++q) {
            if (!in.has_block(p, q))
                continue;
            Eigen::MatrixXd i2 = in.block[p][q].cwiseAbs2();
            ma += i2.rowwise().sum();
            mb += i2.colwise().sum().transpose();
        }
    const double pad = std::abs(cfg.bs_delay_s);
    for (const RVector* m : {&ma, &mb}) {
        double s = m->sum();
        if (!(s > 0.0))
            throw ValidationError("HomConfig: input amplitude vanishes on the time grid");
        double mu = 0.0, var = 0.0;
        for (int j = 0; j < n; ++j)
            mu += (*m)[j] * g.t(j);
        mu /= s;
        for (int j = 0; j < n; ++j)
            var += (*m)[j] * (g.t(j) - mu) * (g.t(j) - mu);
        double sigma = std::sqrt(var / s);
        double lo = mu - 3.0 * sigma - pad, hi = mu + 3.0 * sigma + pad;
        if (lo < g.t0 || hi > g.t_end()) {
            std::ostringstream os;
            os << "time grid [" << g.t0 << ", " << g.t_end() << "] s does not cover the wavepacket support ["
               << lo << ", " << hi << "] s (centre " << mu << " s, rms width " << sigma
               << " s, padded by |T| = " << pad
               << " s); use a finer frequency spacing or a smaller delay";
            throw CoverageError(os.str());
        }
    }
}

} // namespace

void check_hom_coverage(const HomConfig& cfg)
{
    TwoPhotonAmplitude phi = cfg.state.delayed_a(cfg.wavepacket_delay_s);
    coverage_from_input(cfg, TimeDomainInput::from_state(TwoModeState::from_amplitude(phi)));
}

int t_star_index(const HomConfig& cfg, double t_star_field)
{
    const TimeGrid g = cfg.time_grid();
    if (std::isnan(t_star_field))
        return g.n_points - 1;
    double x = (t_star_field - g.t0) / g.dt;
    if (x > g.n_points - 1 + 1e-9) {
        std::ostringstream os;
        os << "interaction limit t* = " << t_star_field << " s lies beyond the time grid end " << g.t_end()
           << " s; extend the grid (finer frequency spacing)";
        throw CoverageError(os.str());
    }
    int ts = int(std::floor(x + 1e-9));
    if (ts < 1)
        throw ValidationError("interaction limit t* lies before the start of the time grid");
    return ts;
}

ScatteringSetup prepare_setup_for(const HomConfig& cfg, const TwoPhotonAmplitude& phi_in, int ts)
{
    if (!phi_in.square())
        throw ValidationError("HomConfig: the two photons must share one frequency grid");
    if (!(cfg.lambda >= 0.0) || !std::isfinite(cfg.lambda))
        throw ValidationError("HomConfig: lambda must be a finite non-negative number");
    if (!cfg.beam_splitter && cfg.bs_delay_s != 0.0)
        throw ValidationError("HomConfig: a beam-splitter delay needs beam_splitter = true");
    if (cfg.stationary) {
        if (!matter_is_decoupled(cfg.matter))
            throw CapabilityError("HomConfig: stationary input is only supported for decoupled matter");
        if (cfg.bs_delay_s != 0.0 || cfg.wavepacket_delay_s != 0.0)
            throw ValidationError("HomConfig: stationary input requires zero delays");
    }
    TwoPhotonAmplitude phi = phi_in;
    if (cfg.wavepacket_delay_s != 0.0)
        phi = phi.delayed_a(cfg.wavepacket_delay_s);
    TwoModeState st = TwoModeState::from_amplitude(phi);
    ModeTransform bs = cfg.beam_splitter ? delayed_balanced_bs(cfg.bs_delay_s) : identity_transform();
    ScatteringSetup s = make_scattering_setup(st, bs, cfg.route, ts);
    if (!cfg.stationary) {
        if (cfg.route == ScatteringRoute::interaction_order)
            coverage_from_input(cfg, s.input);
        else
            check_hom_coverage(cfg);
    }
    return s;
}

ScatteringSetup prepare_setup(const HomConfig& cfg, std::optional<double> theta, int ts)
{
    if (theta)
        return prepare_setup_for(cfg, theta_symmetrize(cfg.state, *theta), ts);
    return prepare_setup_for(cfg, cfg.state, ts);
}

namespace {

cplx otoc_term(const HomConfig& cfg)
{
    const MatterSystem& m = cfg.matter;
    if (!cfg.state.square())
        throw ValidationError("hom_coincidence: the two photons must share one frequency grid");
    TwoPhotonAmplitude phi = cfg.state.delayed_a(cfg.wavepacket_delay_s);
    check_hom_coverage(cfg);
    TimeAmplitude td = to_time_domain(phi);
    const TimeGrid& g = td.grid_a;
    const int n = g.n_points;
    const double dt = g.dt;
    const double ta = cfg.t_a_s - cfg.r_a_s, tb = cfg.t_b_s - cfg.r_b_s;
    const int ia = grid_index_exact(g, ta, "detection time t_a - r_a");
    const int ib = grid_index_exact(g, tb, "detection time t_b - r_b");
    const double T2 = 2.0 * cfg.bs_delay_s;

    const CMatrix& Va = m.eigen_operator("a", Flavor::full);
    const CMatrix& Vb = m.eigen_operator("b", Flavor::full);
    const RVector& E = m.energies();
    const int d = m.dim();
    auto at = [&](const CMatrix& O, double t) {
        CMatrix out(d, d);
        for (int p = 0; p < d; ++p)
            for (int q = 0; q < d; ++q)
                out(p, q) = O(p, q) * std::exp(kI * (E[p] - E[q]) * t);
        return out;
    };
    auto ramp = [](double x) { return std::clamp(x + 0.5, 0.0, 1.0); };

    const CMatrix Va_ta = at(Va, ta), Vb_tb = at(Vb, tb);
    std::vector<CMatrix> Va_s(n);
    std::vector<double> r_outer(n);
    for (int i = 0; i < n; ++i) {
        r_outer[i] = ramp((tb + T2 - g.t(i)) / dt);
        if (r_outer[i] > 0.0)
            Va_s[i] = at(Va, g.t(i));
    }
    cplx sum = 0.0;
    const auto& ws = m.ensemble_weights();
    const auto& ss = m.ensemble_states();
    for (size_t k = 0; k < ws.size(); ++k) {
        const CVector& psi = ss[k];
        Eigen::RowVectorXcd bra = psi.adjoint() * Va_ta * Vb_tb;
        CMatrix vb(d, n);
        for (int j = 0; j < n; ++j)
            vb.col(j) = at(Vb, g.t(j)) * psi;
        cplx acc = 0.0;
        for (int i = 0; i < n; ++i) {
            if (r_outer[i] == 0.0)
                continue;
            Eigen::RowVectorXcd row = bra * Va_s[i];
            cplx inner = 0.0;
            for (int j = 0; j < n; ++j) {
                double r = ramp((g.t(i) - T2 - g.t(j)) / dt);
                if (r == 0.0)
                    continue;
                const cplx f = td.values(i, j);
                if (f == 0.0)
                    continue;
                inner += r * f * (row * vb.col(j))(0);
            }
            acc += r_outer[i] * inner;
        }
        sum += ws[k] * acc;
    }
    const double l2 = cfg.lambda * cfg.lambda;
    return l2 * l2 * std::conj(td.values(ia, ib)) * dt * dt * sum;
}

} // namespace

FourthOrderBreakdown fourth_order_breakdown(const HomConfig& cfg)
{
    const TimeGrid g = cfg.time_grid();
    const int ts = t_star_index(cfg, cfg.t_star_s);
    ScatteringSetup s = prepare_setup(cfg, std::nullopt, ts);
    const int w1 = grid_index_exact(g, cfg.t_a_s - cfg.r_a_s, "detection time t_a - r_a");
    const int w2 = grid_index_exact(g, cfg.t_b_s - cfg.r_b_s, "detection time t_b - r_b");
    PointAmplitudes p = scatter_point(s, cfg.matter, w1, w2);

    const double l2 = cfg.lambda * cfg.lambda, l4 = l2 * l2;
    const auto& wts = cfg.matter.ensemble_weights();
    FourthOrderBreakdown out;
    std::vector<double> term(3 + kA4Classes, 0.0);
    for (size_t k = 0; k < wts.size(); ++k) {
        const double w = wts[k];
        const CVector& a0 = p.a0[k];
        const CVector& x = p.a2[k][0];
        const CVector& y = p.a2[k][1];
        term[0] += w * x.squaredNorm();
        term[1] += w * y.squaredNorm();
        term[2] += w * 2.0 * x.dot(y).real();
        for (int c = 0; c < kA4Classes; ++c)
            term[3 + c] += w * 2.0 * a0.dot(p.a4[k][c]).real();
        out.background += w * a0.squaredNorm();
        out.order2 += w * l2 * 2.0 * a0.dot(p.a2_total(k)).real();
    }
    out.terms.push_back({"A2[det1]*A2[det1]", l4 * term[0]});
    out.terms.push_back({"A2[det2]*A2[det2]", l4 * term[1]});
    out.terms.push_back({"2Re A2[det1]*A2[det2]", l4 * term[2]});
    for (int c = 0; c < kA4Classes; ++c)
        out.terms.push_back({"2Re A0*A4[" + a4_class_labels()[size_t(c)] + "]", l4 * term[size_t(3 + c)]});
    for (const auto& t : out.terms)
        out.total += t.value;

    auto f = [&](double mu) {
        double s2 = 0.0;
        for (size_t k = 0; k < wts.size(); ++k)
            s2 += wts[k] * (p.a0[k] + mu * p.a2_total(k) + mu * mu * p.a4_total(k)).squaredNorm();
        return s2;
    };
    const double h = 1.0;
    double c2 = (-f(2 * h) + 16 * f(h) - 30 * f(0) + 16 * f(-h) - f(-2 * h)) / (24.0 * h * h);
    out.stencil_total = l4 * c2;
    return out;
}

cplx hom_coincidence(const HomConfig& cfg, Contribution contribution)
{
    if (contribution == Contribution::otoc_term)
        return otoc_term(cfg);
    return fourth_order_breakdown(cfg).total;
}

NarrowbandResult narrowband_spdc_coincidence(const SpdcParameters& spdc, const MatterSystem& matter, double T,
    double tau, const NarrowbandOptions& opt)
{
    spdc.validate();
    if (!(T >= 0.0) || !std::isfinite(T) || !std::isfinite(tau))
        throw ValidationError("narrowband_spdc_coincidence: T must be non-negative and finite");
    if (!(opt.dt_s > 0.0))
        throw ValidationError("narrowband_spdc_coincidence: quadrature step must be positive");

    NarrowbandResult res;
    const double wmax = matter.max_transition_frequency();
    if (wmax > 0.0 && 5.0 * spdc.T_e > 2.0 * kPi / wmax) {
        std::ostringstream os;
        os << "entanglement time " << spdc.T_e << " s is not 5x shorter than the fastest matter period "
           << 2.0 * kPi / wmax << " s";
        res.timescale_warning = true;
        res.warning = os.str();
    }
    const double x = (opt.t_a_s - opt.t_b_s - tau) / spdc.T_e;
    double window = std::abs(x) < 0.5 ? 1.0 : (std::abs(x) == 0.5 ? 0.5 : 0.0);
    if (window == 0.0)
        return res;

    const int d = matter.dim();
    const CMatrix La = left_multiplication(matter.dipole("a"));
    const CMatrix Lb = left_multiplication(matter.dipole("b"));
    const CMatrix Gt = liouville_green(matter, tau);
    const CVector rho0 = vectorize(matter.initial_density());

    auto K = [&](double t) {
        CVector v = liouville_propagator(matter, opt.t_b_s + t - tau) * rho0;
        v = Gt * (Lb * v);
        v = La * v;
        v = liouville_propagator(matter, -t) * v;
        v = Gt * (Lb * v);
        v = La * v;
        return unvectorize(v, d).trace();
    };
    auto gweight = [&](double t) {
        double u = opt.t_b_s + t - tau;
        return std::exp(kI * spdc.omega_p0 * (tau - t)) * std::exp(-spdc.sigma_p * spdc.sigma_p * u * u);
    };
    auto trapezoid = [&](double a, double b) {
        if (!(b > a))
            return cplx(0.0);
        int n = std::max(1, int(std::ceil((b - a) / opt.dt_s)));
        double h = (b - a) / n;
        cplx s = 0.0;
        for (int i = 0; i <= n; ++i) {
            double t = a + i * h;
            double w = (i == 0 || i == n) ? 0.5 : 1.0;
            s += w * gweight(t) * K(t);
        }
        return s * h;
    };
    const double l2 = opt.lambda * opt.lambda;
    const double scale = window * l2 * l2 * spdc.T_e;
    res.otoc = scale * trapezoid(0.0, 2.0 * T);
    // The pump envelope exp(-sigma_p^2 u^2) is below 1e-18 beyond |u| = 6.5 / sigma_p.
    const double t_lo = tau - opt.t_b_s - 6.5 / spdc.sigma_p;
    res.toc = scale * trapezoid(std::min(t_lo, 0.0), 0.0);
    return res;
}

PhaseCycleSolution solve_phase_cycle(const std::vector<double>& thetas, const std::vector<double>& signals)
{
    if (thetas.size() != signals.size() || thetas.size() < 3)
        throw ValidationError("solve_phase_cycle: need at least three (theta, signal) pairs");
    const int n = int(thetas.size());
    Eigen::MatrixXd A(n, 3);
    Eigen::VectorXd b(n);
    for (int i = 0; i < n; ++i) {
        A(i, 0) = 1.0;
        A(i, 1) = std::cos(thetas[size_t(i)]);
        A(i, 2) = -std::sin(thetas[size_t(i)]);
        b[i] = signals[size_t(i)];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    if (qr.rank() < 3)
        throw ValidationError("solve_phase_cycle: the exchange phases do not determine all three unknowns");
    Eigen::Vector3d x = qr.solve(b);
    PhaseCycleSolution s;
    s.population = x[0];
    s.cross_re = x[1];
    s.cross_im = x[2];
    s.residual = (A * x - b).norm();
    return s;
}

double phase_matching(double delta_k, double L)
{
    if (!(L > 0.0))
        throw ValidationError("phase_matching: L must be positive");
    return 0.5 * L * sinc(0.5 * delta_k * L);
}

cplx retarded_field_contribution(const std::function<cplx(double)>& series, double r_over_c, double t)
{
    if (!(r_over_c >= 0.0))
        throw ValidationError("retarded_field_contribution: r/c must be non-negative");
    if (t < r_over_c)
        return 0.0;
    return -kI * series(t - r_over_c);
}

} // namespace qlis
