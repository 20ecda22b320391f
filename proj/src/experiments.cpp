#include "qlis/experiments.hpp"

#include <cmath>
#include <exception>
#include <iomanip>
#include <map>
#include <sstream>

#include <omp.h>

#include "qlis/interferometer.hpp"

namespace qlis {

TwoPhotonAmplitude build_state(const ExperimentConfig& cfg)
{
    const StateSpec& s = cfg.state;
    FrequencyGrid g = FrequencyGrid::centered(s.grid_points, s.grid_center_rad_per_s, s.grid_spacing_rad_per_s);
    TwoPhotonAmplitude phi = [&] {
        if (s.kind == "gaussian_pair")
            return product_amplitude(gaussian_envelope(g, s.center_a_rad_per_s, s.sigma_rad_per_s, s.arrival_a_s),
                gaussian_envelope(g, s.center_b_rad_per_s, s.sigma_rad_per_s, s.arrival_b_s));
        if (s.kind == "delta_pair")
            return product_amplitude(delta_epsilon_envelope(g, s.arrival_a_s, s.eps_s),
                delta_epsilon_envelope(g, s.arrival_b_s, s.eps_s));
        SpdcParameters p;
        p.sigma_p = s.sigma_p_rad_per_s;
        p.T_e = s.entanglement_time_s;
        p.omega_p0 = s.pump_center_rad_per_s;
        p.omega_a0 = s.center_a_rad_per_s;
        p.omega_b0 = s.center_b_rad_per_s;
        return spdc_amplitude(p, g);
    }();
    if (s.chirp_a_s2 != 0.0)
        phi = chirp_a(phi, s.chirp_a_s2);
    return phi.normalized();
}

MatterSystem build_matter(const ExperimentConfig& cfg)
{
    const MatterSpec& m = cfg.matter;
    MatterSystem sys = !m.file.empty()   ? load_matter_json(m.file)
        : m.model == "two_level"         ? two_level(m.w0_rad_per_s, m.mu_a)
                                         : v_system(m.w1_rad_per_s, m.w2_rad_per_s, m.coupling_rad_per_s, m.mu_a,
                                               m.mu_b);
    return m.decoupled ? sys.decoupled() : sys;
}

HomConfig build_hom(const ExperimentConfig& cfg)
{
    HomConfig h(build_state(cfg), build_matter(cfg));
    const InteractionSpec& in = cfg.interaction;
    h.lambda = in.lambda;
    h.bs_delay_s = in.bs_delay_s;
    h.wavepacket_delay_s = in.wavepacket_delay_s;
    h.r_a_s = in.r_a_s;
    h.r_b_s = in.r_b_s;
    h.t_a_s = in.t_a_s;
    h.t_b_s = in.t_b_s;
    h.beam_splitter = in.beam_splitter;
    if (in.has_t_star)
        h.t_star_s = in.t_star_s;
    return h;
}

namespace {

SignalScan make_scan(const ExperimentConfig& cfg)
{
    SignalScan s;
    for (const auto& a : cfg.scan)
        s.axes.push_back({a.name, a.values()});
    s.config_json = cfg.canonical_json;
    s.config_hash = cfg.hash();
    return s;
}

// Runs f(i) for every point; exceptions are rethrown for the lowest failing
// index so that error reports do not depend on the schedule.
template <class F>
void for_points(size_t n, int jobs, F&& f)
{
    std::vector<std::exception_ptr> errs(n);
    const int threads = jobs > 0 ? jobs : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (long i = 0; i < long(n); ++i) {
        try {
            f(size_t(i));
        } catch (...) {
            errs[size_t(i)] = std::current_exception();
        }
    }
    for (auto& e : errs)
        if (e)
            std::rethrow_exception(e);
}

double axis_value(const SignalScan& s, const std::vector<double>& p, const std::string& name, double fallback)
{
    for (size_t k = 0; k < s.axes.size(); ++k)
        if (s.axes[k].name == name)
            return p[k];
    return fallback;
}

void apply_point(HomConfig& h, const ExperimentConfig& cfg, const SignalScan& s, const std::vector<double>& p)
{
    const InteractionSpec& in = cfg.interaction;
    h.t_b_s = axis_value(s, p, "t_b_s", in.t_b_s);
    h.t_a_s = axis_value(s, p, "t_a_s", in.t_a_s);
    h.bs_delay_s = axis_value(s, p, "bs_delay_s", in.bs_delay_s);
    h.wavepacket_delay_s = axis_value(s, p, "tau_s", in.wavepacket_delay_s);
    if (in.bs_delay_follows_tau)
        h.bs_delay_s = 0.5 * h.wavepacket_delay_s;
    if (in.t_a_follows_tau)
        h.t_a_s = h.t_b_s + h.wavepacket_delay_s;
}

std::string summarize(const SignalScan& s)
{
    std::ostringstream os;
    os << std::setprecision(6);
    for (size_t c = 0; c < s.labels.size(); ++c) {
        const auto& v = s.columns[c];
        double lo = v[0].real(), hi = v[0].real(), imax = 0.0, amax = 0.0, asym = 0.0;
        for (size_t i = 0; i < v.size(); ++i) {
            lo = std::min(lo, v[i].real());
            hi = std::max(hi, v[i].real());
            imax = std::max(imax, std::abs(v[i].imag()));
            amax = std::max(amax, std::abs(v[i]));
            asym = std::max(asym, std::abs(v[i] - v[v.size() - 1 - i]));
        }
        // Mirror asymmetry over the point order (axis reversal).
        os << s.labels[c] << ": min " << lo << ", max " << hi << ", max |imag| " << imax << ", mirror asymmetry "
           << (amax > 0.0 ? asym / amax : 0.0) << "\n";
    }
    return os.str();
}

ExperimentResult run_hom_scan(const ExperimentConfig& cfg, const RunOptions& opt)
{
    const HomConfig base = build_hom(cfg);
    ExperimentResult r;
    r.scan = make_scan(cfg);
    const size_t n = r.scan.n_points();
    for (const auto& label : cfg.interaction.contributions) {
        Contribution c = label == "otoc_term" ? Contribution::otoc_term : Contribution::all_fourth_order;
        std::vector<cplx> vals(n);
        for_points(n, opt.jobs, [&](size_t i) {
            HomConfig h = base;
            apply_point(h, cfg, r.scan, r.scan.point(i));
            vals[i] = hom_coincidence(h, c);
        });
        r.scan.add_column(label, std::move(vals));
    }
    return r;
}

ExperimentResult run_spdc_otoc(const ExperimentConfig& cfg, const RunOptions& opt)
{
    const HomConfig base = build_hom(cfg);
    SpdcParameters p;
    p.sigma_p = cfg.state.sigma_p_rad_per_s;
    p.T_e = cfg.state.entanglement_time_s;
    p.omega_p0 = cfg.state.pump_center_rad_per_s;
    p.omega_a0 = cfg.state.center_a_rad_per_s;
    p.omega_b0 = cfg.state.center_b_rad_per_s;
    ExperimentResult r;
    r.scan = make_scan(cfg);
    const size_t n = r.scan.n_points();
    std::vector<cplx> otoc(n), toc(n);
    std::vector<std::string> warn(n);
    for_points(n, opt.jobs, [&](size_t i) {
        HomConfig h = base;
        apply_point(h, cfg, r.scan, r.scan.point(i));
        NarrowbandOptions o;
        o.t_a_s = h.t_a_s - h.r_a_s;
        o.t_b_s = h.t_b_s - h.r_b_s;
        o.lambda = h.lambda;
        o.dt_s = cfg.narrowband_dt_s;
        NarrowbandResult nb = narrowband_spdc_coincidence(p, h.matter, h.bs_delay_s, h.wavepacket_delay_s, o);
        otoc[i] = nb.otoc;
        toc[i] = nb.toc;
        warn[i] = nb.warning;
    });
    for (const auto& w : warn)
        if (!w.empty()) {
            r.warnings.push_back(w);
            break;
        }
    r.scan.add_column("otoc", std::move(otoc));
    r.scan.add_column("toc", std::move(toc));
    return r;
}

ExperimentResult run_phase_cycle(const ExperimentConfig& cfg, const RunOptions& opt)
{
    const HomConfig h = build_hom(cfg);
    ExperimentResult r;
    r.scan = make_scan(cfg);
    const std::vector<double>& thetas = r.scan.axes[0].values;
    if (thetas.size() < 3)
        throw ConfigError("phase-cycle needs at least three theta values");
    const DetectionGate ga = DetectionGate::time(cfg.interaction.t_a_s, cfg.gates.width_a_s);
    const DetectionGate gb = DetectionGate::time(cfg.interaction.t_b_s, cfg.gates.width_b_s);
    GateOptions go;
    go.tstar_margin_widths = cfg.gates.tstar_margin_widths;
    std::vector<double> counts(thetas.size());
    for_points(thetas.size(), opt.jobs, [&](size_t i) { counts[i] = gated_coincidence(h, thetas[i], ga, gb, go); });
    PhaseCycleSolution sol = solve_phase_cycle(thetas, counts);
    std::vector<cplx> c(thetas.size()), pop(thetas.size()), cross(thetas.size());
    for (size_t i = 0; i < thetas.size(); ++i) {
        c[i] = counts[i];
        pop[i] = sol.population;
        cross[i] = sol.cross_re * std::cos(thetas[i]) - sol.cross_im * std::sin(thetas[i]);
    }
    r.scan.add_column("gated_count", std::move(c));
    r.scan.add_column("population", std::move(pop));
    r.scan.add_column("cross_term", std::move(cross));
    std::ostringstream os;
    os << std::setprecision(8) << "solved cross term: re " << sol.cross_re << ", im " << sol.cross_im
       << ", population " << sol.population << ", residual " << sol.residual << "\n";
    r.summary = os.str();
    return r;
}

ExperimentResult run_td_gate(const ExperimentConfig& cfg, const RunOptions& opt)
{
    const HomConfig h = build_hom(cfg);
    const InteractionSpec& in = cfg.interaction;
    ExperimentResult r;
    r.scan = make_scan(cfg);
    const size_t n = r.scan.n_points();
    if (cfg.gates.mode == "fixed_delay") {
        GatedSignal s(h, in.theta_rad, h.t_star_s);
        std::vector<cplx> direct(n), swapped(n);
        for_points(n, opt.jobs, [&](size_t i) {
            double tau = r.scan.point(i)[0];
            direct[i] = s.fixed_delay(tau, cfg.gates.width_a_s, cfg.gates.width_b_s, false);
            swapped[i] = s.fixed_delay(tau, cfg.gates.width_a_s, cfg.gates.width_b_s, true);
        });
        r.scan.add_column("fixed_delay", std::move(direct));
        r.scan.add_column("fixed_delay_swapped", std::move(swapped));
        return r;
    }
    double t_star = h.t_star_s;
    if (!in.has_t_star) {
        double latest = -std::numeric_limits<double>::infinity();
        for (size_t i = 0; i < n; ++i) {
            std::vector<double> p = r.scan.point(i);
            latest = std::max(latest, axis_value(r.scan, p, "t_a_bar_s", in.t_a_s) - in.r_a_s);
            latest = std::max(latest, axis_value(r.scan, p, "t_b_bar_s", in.t_b_s) - in.r_b_s);
        }
        t_star = latest + cfg.gates.tstar_margin_widths * std::max(cfg.gates.width_a_s, cfg.gates.width_b_s);
        if (t_star >= h.time_grid().t_end())
            t_star = std::numeric_limits<double>::quiet_NaN();
    }
    GatedSignal s(h, in.theta_rad, t_star);
    const std::array<std::pair<const char*, GatedSignal::Part>, 4> parts{{{"total", GatedSignal::Part::total},
        {"background", GatedSignal::Part::background}, {"order2", GatedSignal::Part::order2},
        {"order4", GatedSignal::Part::order4}}};
    for (const auto& [label, part] : parts) {
        std::vector<cplx> vals(n);
        for_points(n, opt.jobs, [&](size_t i) {
            std::vector<double> p = r.scan.point(i);
            DetectionGate ga = DetectionGate::time(axis_value(r.scan, p, "t_a_bar_s", in.t_a_s), cfg.gates.width_a_s);
            DetectionGate gb = DetectionGate::time(axis_value(r.scan, p, "t_b_bar_s", in.t_b_s), cfg.gates.width_b_s);
            vals[i] = s.count(ga, gb, part);
        });
        r.scan.add_column(label, std::move(vals));
    }
    return r;
}

ExperimentResult run_tf_map(const ExperimentConfig& cfg)
{
    const HomConfig h = build_hom(cfg);
    ExperimentResult r;
    r.scan = make_scan(cfg);
    const bool time_first = r.scan.axes[0].name == "t_s_bar_s";
    const auto& tc = r.scan.axes[time_first ? 0 : 1].values;
    const auto& wc = r.scan.axes[time_first ? 1 : 0].values;
    TimeFrequencyMap m = time_frequency_map(h, tc, wc, cfg.gates.width_a_s, cfg.gates.idler_width_rad_per_s);
    std::vector<cplx> vals(r.scan.n_points());
    for (size_t i = 0; i < vals.size(); ++i) {
        size_t a = i / r.scan.axes[1].values.size(), b = i % r.scan.axes[1].values.size();
        vals[i] = time_first ? m.values(Eigen::Index(a), Eigen::Index(b)) : m.values(Eigen::Index(b), Eigen::Index(a));
    }
    r.scan.add_column("count", std::move(vals));
    return r;
}

ExperimentResult run_algebra_check(const ExperimentConfig& cfg)
{
    AlgebraReport rep = algebra_report(cfg.algebra_n_max);
    ExperimentResult r;
    r.scan = make_scan(cfg);
    ScanAxis ax{"entry", {}};
    std::vector<cplx> res;
    std::ostringstream os;
    os << std::setprecision(3);
    for (size_t i = 0; i < rep.entries.size(); ++i) {
        ax.values.push_back(double(i));
        res.push_back(rep.entries[i].residual);
        os << "  [" << i << "] " << rep.entries[i].name << ": " << rep.entries[i].residual << "\n";
    }
    r.scan.axes = {ax};
    r.scan.add_column("residual", std::move(res));
    r.passed = rep.max_residual() <= 1e-10;
    os << "max residual " << rep.max_residual() << (r.passed ? " (pass)" : " (FAIL: above 1e-10)") << "\n";
    r.summary = os.str();
    return r;
}

} // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opt)
{
    ExperimentResult r;
    switch (cfg.experiment) {
    case Experiment::hom_scan:
        r = run_hom_scan(cfg, opt);
        break;
    case Experiment::spdc_otoc:
        r = run_spdc_otoc(cfg, opt);
        break;
    case Experiment::phase_cycle:
        r = run_phase_cycle(cfg, opt);
        break;
    case Experiment::td_gate:
        r = run_td_gate(cfg, opt);
        break;
    case Experiment::tf_map:
        r = run_tf_map(cfg);
        break;
    case Experiment::algebra_check:
        r = run_algebra_check(cfg);
        break;
    }
    r.scan.validate();
    r.summary = summarize(r.scan) + r.summary;
    return r;
}

double richardson_change(const ExperimentConfig& cfg, const RunOptions& opt)
{
    ExperimentResult a = run_experiment(cfg, opt);
    ExperimentResult b = run_experiment(refined(cfg), opt);
    double worst = 0.0;
    for (size_t c = 0; c < a.scan.labels.size(); ++c) {
        const auto& x = a.scan.columns[c];
        const auto& y = b.scan.column(a.scan.labels[c]);
        double scale = 0.0, diff = 0.0;
        for (size_t i = 0; i < x.size(); ++i) {
            scale = std::max(scale, std::abs(x[i]));
            diff = std::max(diff, std::abs(x[i] - y[i]));
        }
        if (scale > 0.0)
            worst = std::max(worst, diff / scale);
    }
    return worst;
}

} // namespace qlis
