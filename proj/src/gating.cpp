#include "qlis/signal_engine.hpp"

#include <cmath>
#include <sstream>

namespace qlis {

DetectionGate DetectionGate::time(double center_s, double width_s)
{
    DetectionGate g{Kind::time, center_s, width_s};
    g.validate();
    return g;
}

DetectionGate DetectionGate::frequency(double center_rad_per_s, double width_rad_per_s)
{
    DetectionGate g{Kind::frequency, center_rad_per_s, width_rad_per_s};
    g.validate();
    return g;
}

DetectionGate DetectionGate::open_time()
{
    return DetectionGate{Kind::time, 0.0, std::numeric_limits<double>::infinity()};
}

double DetectionGate::weight(double x) const
{
    if (open())
        return 1.0;
    double u = (x - center) / width;
    return std::exp(-0.5 * u * u);
}

void DetectionGate::validate() const
{
    if (!(width > 0.0))
        throw ValidationError("DetectionGate: width must be positive");
    if (!std::isfinite(center))
        throw ValidationError("DetectionGate: centre must be finite");
}

namespace {

void require_time(const DetectionGate& g, const char* who)
{
    g.validate();
    if (g.kind != DetectionGate::Kind::time)
        throw KindMismatchError(std::string(who) + ": expected a time gate");
}

TwoPhotonAmplitude exchanged(const TwoPhotonAmplitude& phi)
{
    return TwoPhotonAmplitude(phi.grid_b(), phi.grid_a(), phi.values().transpose());
}

// Interaction limit for a pair of time gates: a margin of gate widths after
// the latest gate centre, capped at the grid end (also used for open gates).
double gate_t_star(const HomConfig& cfg, const DetectionGate& ga, const DetectionGate& gb, const GateOptions& opt)
{
    if (ga.open() || gb.open())
        return std::numeric_limits<double>::quiet_NaN();
    if (!(opt.tstar_margin_widths > 0.0))
        throw ValidationError("gated_coincidence: the t* margin must be positive");
    double c = std::max(ga.center - cfg.r_a_s, gb.center - cfg.r_b_s);
    double t = c + opt.tstar_margin_widths * std::max(ga.width, gb.width);
    if (t >= cfg.time_grid().t_end())
        return std::numeric_limits<double>::quiet_NaN();
    return t;
}

RVector gate_vector(const TimeGrid& g, const DetectionGate& d, double r)
{
    RVector v(g.n_points);
    for (int i = 0; i < g.n_points; ++i)
        v[i] = d.weight(g.t(i) + r);
    return v;
}

double periodic_gauss(double x, double w, double L)
{
    if (std::isinf(w))
        return 1.0;
    double s = 0.0;
    double x0 = x - L * std::round(x / L);
    for (int m = -2; m <= 2; ++m) {
        double u = (x0 + m * L) / w;
        s += std::exp(-0.5 * u * u);
    }
    return s;
}

GridAmplitudes amplitudes_for(const HomConfig& cfg, const TwoPhotonAmplitude& phi, int ts)
{
    return scatter_grid(prepare_setup_for(cfg, phi, ts), cfg.matter);
}

} // namespace

GatedSignal::GatedSignal(const HomConfig& cfg, std::optional<double> theta, double t_star_field)
    : grid_(cfg.time_grid()), r_a_(cfg.r_a_s), r_b_(cfg.r_b_s)
{
    const int ts = t_star_index(cfg, t_star_field);
    GridAmplitudes g = scatter_grid(prepare_setup(cfg, theta, ts), cfg.matter);
    parts_ = coincidence_density(g, cfg.matter.ensemble_weights(), cfg.lambda);
    W_ = parts_.total;
}

double GatedSignal::count(const DetectionGate& gate_a, const DetectionGate& gate_b, Part part) const
{
    require_time(gate_a, "GatedSignal::count");
    require_time(gate_b, "GatedSignal::count");
    const Eigen::MatrixXd& D = part == Part::total ? W_
        : part == Part::background                 ? parts_.background
        : part == Part::order2                     ? parts_.order2
                                                   : parts_.order4;
    RVector da = gate_vector(grid_, gate_a, r_a_), db = gate_vector(grid_, gate_b, r_b_);
    return grid_.dt * grid_.dt * da.dot(D * db);
}

double GatedSignal::ungated() const
{
    return grid_.dt * grid_.dt * W_.sum();
}

double GatedSignal::fixed_delay(double tau, double width_a, double width_b, bool swap_roles) const
{
    if (!(width_a > 0.0) || !(width_b > 0.0))
        throw ValidationError("fixed_delay: gate widths must be positive");
    const int n = grid_.n_points;
    const double dt = grid_.dt, L = n * dt;
    double m = tau / dt;
    if (std::abs(m - std::round(m)) > 1e-6) {
        std::ostringstream os;
        os << "fixed_delay: tau = " << tau << " s must be a multiple of the time step " << dt << " s";
        throw ValidationError(os.str());
    }
    // Periodic gate profiles; the sum over centres runs over one period.
    RVector pa(n), pb(n);
    for (int j = 0; j < n; ++j) {
        pa[j] = periodic_gauss(j * dt, width_a, L);
        pb[j] = periodic_gauss(j * dt, width_b, L);
    }
    const long shift = std::lround(m);
    auto wrap = [n](long k) { return int(((k % n) + n) % n); };
    // S = sum_ij W(i, j) K(j - i -+ shift), K the circular cross-correlation
    // of the two gate profiles; the sign flips when the roles are swapped.
    RVector K = RVector::Zero(n), band = RVector::Zero(n);
    for (int u = 0; u < n; ++u)
        for (int k = 0; k < n; ++k)
            K[u] += pa[k] * pb[wrap(k + u)];
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            band[wrap(j - i)] += W_(i, j);
    double total = 0.0;
    for (int u = 0; u < n; ++u)
        total += band[u] * K[wrap(swap_roles ? u + shift : u - shift)];
    return dt * dt * dt * total;
}

double gated_coincidence(const HomConfig& cfg, double theta, const DetectionGate& gate_a,
    const DetectionGate& gate_b, const GateOptions& opt)
{
    require_time(gate_a, "gated_coincidence");
    require_time(gate_b, "gated_coincidence");
    GatedSignal s(cfg, theta, gate_t_star(cfg, gate_a, gate_b, opt));
    return s.count(gate_a, gate_b);
}

double exchange_cross_term(const HomConfig& cfg, const DetectionGate& gate_a, const DetectionGate& gate_b,
    const GateOptions& opt)
{
    require_time(gate_a, "exchange_cross_term");
    require_time(gate_b, "exchange_cross_term");
    const int ts = t_star_index(cfg, gate_t_star(cfg, gate_a, gate_b, opt));
    GridAmplitudes g1 = amplitudes_for(cfg, cfg.state, ts);
    GridAmplitudes g2 = amplitudes_for(cfg, exchanged(cfg.state), ts);
    CMatrix X = cross_density(g1, g2, cfg.matter.ensemble_weights(), cfg.lambda);
    const TimeGrid grid = cfg.time_grid();
    RVector da = gate_vector(grid, gate_a, cfg.r_a_s), db = gate_vector(grid, gate_b, cfg.r_b_s);
    cplx x = da.cast<cplx>().dot(X * db.cast<cplx>());
    return grid.dt * grid.dt * x.real();
}

double fixed_delay_signal(const HomConfig& cfg, double theta, double tau, const DetectionGate& gate_a,
    const DetectionGate& gate_b, const FixedDelayOptions& opt)
{
    require_time(gate_a, "fixed_delay_signal");
    require_time(gate_b, "fixed_delay_signal");
    GatedSignal s(cfg, theta, std::numeric_limits<double>::quiet_NaN());
    if (!opt.scan_range)
        return s.fixed_delay(tau, gate_a.width, gate_b.width, opt.swap_roles);

    const auto [lo, hi] = *opt.scan_range;
    if (!(hi > lo))
        throw ValidationError("fixed_delay_signal: empty scan range");
    const TimeGrid& g = s.grid();
    const int n = g.n_points;
    const Eigen::MatrixXd& W = s.density();
    // The scanned gate must see the whole marginal of its photon.
    const bool scan_b = opt.swap_roles;
    const double r = scan_b ? cfg.r_b_s : cfg.r_a_s;
    const double w = scan_b ? gate_b.width : gate_a.width;
    RVector marg = scan_b ? RVector(W.colwise().sum().transpose()) : RVector(W.rowwise().sum());
    double all = marg.sum(), outside = 0.0;
    for (int i = 0; i < n; ++i) {
        double td = g.t(i) + r;
        if (td < lo - 4.0 * w || td > hi + 4.0 * w)
            outside += marg[i];
    }
    if (all > 0.0 && outside / all > 1e-6) {
        std::ostringstream os;
        os << "fixed_delay_signal: scan range [" << lo << ", " << hi << "] s misses a fraction " << outside / all
           << " of the scanned photon's arrival distribution";
        throw CoverageError(os.str());
    }
    double total = 0.0;
    for (int k = 0; k < n; ++k) {
        double c = g.t(k) + r;
        if (c < lo - 1e-12 || c > hi + 1e-12)
            continue;
        DetectionGate a = gate_a, b = gate_b;
        if (scan_b) {
            b.center = c;
            a.center = c + tau;
        } else {
            a.center = c;
            b.center = c + tau;
        }
        total += s.count(a, b);
    }
    return g.dt * total;
}

namespace {

// Coincidence density with photon a in time and photon b in frequency:
// rows are time indices of detector 1, columns frequency bins of detector 2.
Eigen::MatrixXd time_frequency_density(const HomConfig& cfg)
{
    const int ts = t_star_index(cfg, std::numeric_limits<double>::quiet_NaN());
    GridAmplitudes g = scatter_grid(prepare_setup(cfg, std::nullopt, ts), cfg.matter);
    const FrequencyGrid& fg = cfg.state.grid_b();
    const int n = g.n, d = g.dim;
    const double l2 = cfg.lambda * cfg.lambda, l4 = l2 * l2;
    const auto& wts = cfg.matter.ensemble_weights();
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
#pragma omp parallel for schedule(dynamic)
    for (int w1 = 0; w1 < n; ++w1) {
        CVector row(n);
        for (int k = 0; k < g.n_states; ++k)
            for (int m = 0; m < d; ++m) {
                for (int w2 = 0; w2 < n; ++w2) {
                    size_t o = g.offset(k, w1, w2) + size_t(m);
                    row[w2] = g.a0[o] + l2 * g.a2[o] + l4 * g.a4[o];
                }
                CVector spec = time_to_spectrum(fg, row);
                D.row(w1) += wts[size_t(k)] * spec.cwiseAbs2().transpose();
            }
    }
    return D;
}

double tf_count(const Eigen::MatrixXd& D, const TimeGrid& tg, const FrequencyGrid& fg, double r_a,
    const DetectionGate& gs, const DetectionGate& gi)
{
    RVector dt(tg.n_points), dw(fg.n_points);
    for (int i = 0; i < tg.n_points; ++i)
        dt[i] = gs.weight(tg.t(i) + r_a);
    for (int k = 0; k < fg.n_points; ++k)
        dw[k] = gi.weight(fg.omega(k));
    return tg.dt * fg.spacing() * dt.dot(D * dw);
}

} // namespace

double time_frequency_coincidence(const HomConfig& cfg, const DetectionGate& gate_signal,
    const DetectionGate& gate_idler)
{
    require_time(gate_signal, "time_frequency_coincidence (signal)");
    gate_idler.validate();
    if (gate_idler.kind != DetectionGate::Kind::frequency)
        throw KindMismatchError("time_frequency_coincidence: the idler gate must be a frequency gate");
    Eigen::MatrixXd D = time_frequency_density(cfg);
    return tf_count(D, cfg.time_grid(), cfg.state.grid_b(), cfg.r_a_s, gate_signal, gate_idler);
}

TimeFrequencyMap time_frequency_map(const HomConfig& cfg, const std::vector<double>& t_centers,
    const std::vector<double>& w_centers, double width_t, double width_w)
{
    if (t_centers.empty() || w_centers.empty())
        throw ValidationError("time_frequency_map: empty centre lists");
    DetectionGate::time(0.0, width_t);
    DetectionGate::frequency(0.0, width_w);
    Eigen::MatrixXd D = time_frequency_density(cfg);
    TimeFrequencyMap out{t_centers, w_centers, Eigen::MatrixXd(t_centers.size(), w_centers.size())};
    const TimeGrid tg = cfg.time_grid();
    for (size_t i = 0; i < t_centers.size(); ++i)
        for (size_t k = 0; k < w_centers.size(); ++k)
            out.values(Eigen::Index(i), Eigen::Index(k)) = tf_count(D, tg, cfg.state.grid_b(), cfg.r_a_s,
                DetectionGate::time(t_centers[i], width_t), DetectionGate::frequency(w_centers[k], width_w));
    return out;
}

} // namespace qlis
