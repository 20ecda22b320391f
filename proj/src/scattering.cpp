#include "qlis/scattering.hpp"

#include <cmath>
#include <sstream>

namespace qlis {

namespace {

struct MatterOps {
    int d = 0;
    RVector E;
    std::array<CMatrix, 2> X; // raising (absorption), energy eigenbasis
    std::array<CMatrix, 2> Y; // lowering (emission)
    std::array<bool, 2> active{false, false};
    std::vector<double> weights;
    std::vector<CVector> states;
};

MatterOps matter_ops(const MatterSystem& m)
{
    MatterOps ops;
    ops.d = m.dim();
    ops.E = m.energies();
    ops.weights = m.ensemble_weights();
    ops.states = m.ensemble_states();
    for (const auto& name : m.channel_names())
        if (name != "a" && name != "b")
            throw ValidationError("scattering: matter channels must be named 'a' and 'b', got '" + name + "'");
    const char* names[2] = {"a", "b"};
    for (int c = 0; c < 2; ++c) {
        if (m.has_channel(names[c])) {
            ops.X[c] = m.eigen_operator(names[c], Flavor::raising);
            ops.Y[c] = m.eigen_operator(names[c], Flavor::lowering);
            ops.active[c] = !ops.X[c].isZero(0.0);
        } else {
            ops.X[c] = CMatrix::Zero(ops.d, ops.d);
            ops.Y[c] = CMatrix::Zero(ops.d, ops.d);
        }
    }
    return ops;
}

inline double hstep(int x)
{
    return x > 0 ? 1.0 : (x == 0 ? 0.5 : 0.0);
}

inline double emission_weight(int e, int ts)
{
    if (e < 0 || e > ts)
        return 0.0;
    return e == ts ? 0.5 : 1.0;
}

inline double absorption_weight(int s, int ts, double dt)
{
    if (s < 0 || s > ts)
        return 0.0;
    return (s == 0 || s == ts) ? 0.5 * dt : dt;
}

CMatrix at_time(const CMatrix& O, const RVector& E, double t)
{
    CMatrix out(O.rows(), O.cols());
    for (Eigen::Index m = 0; m < O.rows(); ++m)
        for (Eigen::Index n = 0; n < O.cols(); ++n)
            out(m, n) = O(m, n) * std::exp(kI * (E[m] - E[n]) * t);
    return out;
}

void check_setup(const ScatteringSetup& s)
{
    const int n = s.input.grid.n_points;
    if (n < 4)
        throw ValidationError("scattering: time grid too small");
    if (s.t_star < 1 || s.t_star >= n)
        throw ValidationError("scattering: t_star index must lie inside the time grid");
}

// out(i, j) = sum h(i - s1) h(j - s2) g(s1, s2) for i, j in [0, N]; index N
// stands for the whole axis.
CMatrix half_prefix(const CMatrix& g)
{
    const int n = int(g.rows());
    CMatrix S = CMatrix::Zero(n + 1, n + 1);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            S(i + 1, j + 1) = g(i, j) + S(i, j + 1) + S(i + 1, j) - S(i, j);
    CMatrix out(n + 1, n + 1);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            out(i, j) = 0.25 * (S(i + 1, j + 1) + S(i, j + 1) + S(i + 1, j) + S(i, j));
    for (int j = 0; j < n; ++j)
        out(n, j) = 0.5 * (S(n, j + 1) + S(n, j));
    for (int i = 0; i < n; ++i)
        out(i, n) = 0.5 * (S(i + 1, n) + S(i, n));
    out(n, n) = S(n, n);
    return out;
}

int a4_class(int i, int j)
{
    int lo = std::min(i, j), hi = std::max(i, j);
    static const int table[3][3] = {{0, 1, 2}, {1, 3, 4}, {2, 4, 5}};
    return table[lo][hi];
}

// Membership of an absorption time in the intervals before, between and
// after the two emission times.
inline std::array<double, 3> membership(int s, int lo, int hi)
{
    double hl = hstep(lo - s), hh = hstep(hi - s);
    return {hl, hh - hl, 1.0 - hh};
}

} // namespace

ChannelMap ChannelMap::identity()
{
    ChannelMap m;
    m.coef[0][0] = m.coef[1][1] = 1.0;
    return m;
}

ChannelMap ChannelMap::from_transform(const ModeTransform& t, double dt)
{
    if (t.kind() != TransformKind::passive)
        throw KindMismatchError("ChannelMap: only passive transforms map photon fields");
    if (!(dt > 0.0))
        throw ValidationError("ChannelMap: time step must be positive");
    double steps = t.delay() / dt;
    long m = std::lround(steps);
    if (std::abs(steps - double(m)) > 1e-9 * std::max(1.0, std::abs(steps))) {
        std::ostringstream os;
        os << "ChannelMap: interferometer delay " << t.delay() << " s is not a multiple of the time step " << dt
           << " s";
        throw ValidationError(os.str());
    }
    ChannelMap out;
    for (int k = 0; k < 2; ++k)
        for (int i = 0; i < 2; ++i)
            out.coef[k][i] = t.matrix()(k, i);
    out.shift[0][1] = int(m);
    out.shift[1][0] = -int(m);
    return out;
}

bool ChannelMap::is_identity() const
{
    return *this == identity();
}

TimeDomainInput TimeDomainInput::from_state(const TwoModeState& s)
{
    TimeDomainInput in;
    in.grid = conjugate_time_grid(s.grid);
    for (int p = 0; p < 2; ++p)
        for (int q = 0; q < 2; ++q) {
            const CMatrix& b = s.block[p][q];
            if (b.size() == 0 || b.isZero(0.0))
                continue;
            in.block[p][q] = to_time_domain(TwoPhotonAmplitude(s.grid, s.grid, b)).values;
        }
    return in;
}

ScatteringSetup make_scattering_setup(const TwoModeState& state, const ModeTransform& interferometer,
    ScatteringRoute route, int t_star)
{
    ScatteringSetup s;
    const double dt = conjugate_time_grid(state.grid).dt;
    s.emission = ChannelMap::from_transform(interferometer, dt);
    if (route == ScatteringRoute::interaction_order) {
        s.input = TimeDomainInput::from_state(state);
        s.absorption = ChannelMap::identity();
        s.free = s.emission;
    } else {
        s.input = TimeDomainInput::from_state(apply_transform(state, interferometer));
        s.absorption = ChannelMap::from_transform(interferometer.inverse(), dt);
        s.free = ChannelMap::identity();
    }
    s.t_star = t_star;
    check_setup(s);
    return s;
}

const std::array<std::string, kA4Classes>& a4_class_labels()
{
    static const std::array<std::string, kA4Classes> labels = {"XXYY", "XYXY", "XYYX", "YXXY", "YXYX", "YYXX"};
    return labels;
}

CVector PointAmplitudes::a4_total(size_t k) const
{
    CVector v = a4[k][0];
    for (int c = 1; c < kA4Classes; ++c)
        v += a4[k][c];
    return v;
}

PointAmplitudes scatter_point(const ScatteringSetup& setup, const MatterSystem& matter, int w1, int w2)
{
    check_setup(setup);
    const MatterOps ops = matter_ops(matter);
    const TimeDomainInput& in = setup.input;
    const TimeGrid& tg = in.grid;
    const int ts = setup.t_star;
    const double dt = tg.dt;
    const int d = ops.d;
    const size_t nk = ops.states.size();
    const ChannelMap& A = setup.absorption;
    const ChannelMap& F = setup.free;
    const ChannelMap& B = setup.emission;
    const int w[2] = {w1, w2};

    PointAmplitudes out;
    out.a0.assign(nk, CVector::Zero(d));
    out.a2.assign(nk, {CVector::Zero(d), CVector::Zero(d)});
    std::array<CVector, kA4Classes> z4;
    z4.fill(CVector::Zero(d));
    out.a4.assign(nk, z4);

    cplx a0 = 0.0;
    for (int f1 = 0; f1 < 2; ++f1)
        for (int f2 = 0; f2 < 2; ++f2) {
            cplx g = F.coef[0][f1] * F.coef[1][f2];
            if (g == 0.0)
                continue;
            int v1 = w1 + F.shift[0][f1], v2 = w2 + F.shift[1][f2];
            a0 += g * (in.at(f1, f2, v1, v2) + in.at(f2, f1, v2, v1));
        }
    for (size_t k = 0; k < nk; ++k)
        out.a0[k] = a0 * ops.states[k];

    // Absorption operators at every interaction time.
    std::array<std::vector<CMatrix>, 2> Xs;
    for (int c = 0; c < 2; ++c)
        if (ops.active[c])
            for (int s = 0; s <= ts; ++s)
                Xs[c].push_back(at_time(ops.X[c], ops.E, tg.t(s)));

    // One photon absorbed and re-emitted, the other passes freely.
    for (int det = 0; det < 2; ++det) {
        const int other = 1 - det;
        for (int cp = 0; cp < 2; ++cp) {
            const cplx beta = B.coef[det][cp];
            const int e = w[det] + B.shift[det][cp];
            const double em = emission_weight(e, ts);
            if (beta == 0.0 || em == 0.0)
                continue;
            const CMatrix Ye = at_time(ops.Y[cp], ops.E, tg.t(e));
            for (int c = 0; c < 2; ++c) {
                if (!ops.active[c])
                    continue;
                for (int s = 0; s <= ts; ++s) {
                    cplx Fs = 0.0;
                    for (int g = 0; g < 2; ++g) {
                        const cplx a = A.coef[c][g];
                        if (a == 0.0)
                            continue;
                        const int sg = s + A.shift[c][g];
                        for (int f = 0; f < 2; ++f) {
                            const cplx gm = F.coef[other][f];
                            if (gm == 0.0)
                                continue;
                            const int v = w[other] + F.shift[other][f];
                            Fs += a * gm * (in.at(g, f, sg, v) + in.at(f, g, v, sg));
                        }
                    }
                    if (Fs == 0.0)
                        continue;
                    const cplx pre = -beta * em * absorption_weight(s, ts, dt) * Fs;
                    const double before = hstep(e - s), after = hstep(s - e);
                    for (size_t k = 0; k < nk; ++k) {
                        const CVector& psi = ops.states[k];
                        CVector v = before * (Ye * (Xs[c][s] * psi)) + after * (Xs[c][s] * (Ye * psi));
                        out.a2[k][det] += pre * v;
                    }
                }
            }
        }
    }

    // Both photons absorbed, both detected photons emitted.
    for (int c1 = 0; c1 < 2; ++c1)
        for (int c2 = 0; c2 < 2; ++c2) {
            const cplx bb = B.coef[0][c1] * B.coef[1][c2];
            const int e1 = w1 + B.shift[0][c1], e2 = w2 + B.shift[1][c2];
            const double em = emission_weight(e1, ts) * emission_weight(e2, ts);
            if (bb == 0.0 || em == 0.0)
                continue;
            const CMatrix Y1 = at_time(ops.Y[c1], ops.E, tg.t(e1));
            const CMatrix Y2 = at_time(ops.Y[c2], ops.E, tg.t(e2));
            struct Assign {
                const CMatrix* lo;
                const CMatrix* hi;
                int ilo, ihi;
                double w;
            };
            std::vector<Assign> assigns;
            if (e1 < e2)
                assigns.push_back({&Y1, &Y2, e1, e2, 1.0});
            else if (e1 > e2)
                assigns.push_back({&Y2, &Y1, e2, e1, 1.0});
            else {
                assigns.push_back({&Y1, &Y2, e1, e2, 0.5});
                assigns.push_back({&Y2, &Y1, e2, e1, 0.5});
            }
            for (int p = 0; p < 2; ++p)
                for (int q = 0; q < 2; ++q) {
                    if (!ops.active[p] || !ops.active[q])
                        continue;
                    for (int s1 = 0; s1 <= ts; ++s1)
                        for (int s2 = 0; s2 <= ts; ++s2) {
                            cplx G = 0.0;
                            for (int g1 = 0; g1 < 2; ++g1)
                                for (int g2 = 0; g2 < 2; ++g2) {
                                    cplx a = A.coef[p][g1] * A.coef[q][g2];
                                    if (a == 0.0)
                                        continue;
                                    G += a * in.at(g1, g2, s1 + A.shift[p][g1], s2 + A.shift[q][g2]);
                                }
                            if (G == 0.0)
                                continue;
                            const cplx pre = bb * em * absorption_weight(s1, ts, dt) * absorption_weight(s2, ts, dt) * G;
                            const CMatrix& X1 = Xs[p][s1];
                            const CMatrix& X2 = Xs[q][s2];
                            for (const Assign& as : assigns) {
                                auto m1 = membership(s1, as.ilo, as.ihi);
                                auto m2 = membership(s2, as.ilo, as.ihi);
                                for (int i = 0; i < 3; ++i)
                                    for (int j = 0; j < 3; ++j) {
                                        const double mw = m1[i] * m2[j];
                                        if (mw == 0.0)
                                            continue;
                                        // (first-of-pair-is-X1, weight)
                                        std::vector<std::pair<bool, double>> orders;
                                        if (i < j)
                                            orders.push_back({true, 1.0});
                                        else if (i > j)
                                            orders.push_back({false, 1.0});
                                        else {
                                            if (hstep(s2 - s1) > 0.0)
                                                orders.push_back({true, hstep(s2 - s1)});
                                            if (hstep(s1 - s2) > 0.0)
                                                orders.push_back({false, hstep(s1 - s2)});
                                        }
                                        const int cls = a4_class(i, j);
                                        for (const auto& [x1_first, ow] : orders) {
                                            // Operators in time order.
                                            std::vector<const CMatrix*> seq;
                                            for (int iv = 0; iv < 3; ++iv) {
                                                const CMatrix* first = x1_first ? &X1 : &X2;
                                                const CMatrix* second = x1_first ? &X2 : &X1;
                                                const int ifirst = x1_first ? i : j;
                                                const int isecond = x1_first ? j : i;
                                                if (ifirst == iv)
                                                    seq.push_back(first);
                                                if (isecond == iv)
                                                    seq.push_back(second);
                                                if (iv == 0)
                                                    seq.push_back(as.lo);
                                                if (iv == 1)
                                                    seq.push_back(as.hi);
                                            }
                                            const cplx wt = pre * as.w * mw * ow;
                                            for (size_t k = 0; k < nk; ++k) {
                                                CVector v = ops.states[k];
                                                for (const CMatrix* op : seq)
                                                    v = (*op) * v;
                                                out.a4[k][cls] += wt * v;
                                            }
                                        }
                                    }
                            }
                        }
                }
        }
    return out;
}

GridAmplitudes scatter_grid_reference(const ScatteringSetup& setup, const MatterSystem& matter)
{
    check_setup(setup);
    const int n = setup.input.grid.n_points;
    const int d = matter.dim();
    const int nk = int(matter.ensemble_weights().size());
    GridAmplitudes g;
    g.n = n;
    g.dim = d;
    g.n_states = nk;
    const size_t total = size_t(nk) * n * n * d;
    g.a0.assign(total, 0.0);
    g.a2.assign(total, 0.0);
    g.a4.assign(total, 0.0);
    for (int w1 = 0; w1 < n; ++w1)
        for (int w2 = 0; w2 < n; ++w2) {
            PointAmplitudes p = scatter_point(setup, matter, w1, w2);
            for (int k = 0; k < nk; ++k) {
                const size_t o = g.offset(k, w1, w2);
                CVector a2 = p.a2_total(k), a4 = p.a4_total(k);
                for (int m = 0; m < d; ++m) {
                    g.a0[o + m] = p.a0[k][m];
                    g.a2[o + m] = a2[m];
                    g.a4[o + m] = a4[m];
                }
            }
        }
    return g;
}

namespace {

struct Elem {
    int m, n;
    cplx x;
    double omega;
};

std::vector<Elem> nonzero_elements(const CMatrix& X, const RVector& E)
{
    std::vector<Elem> out;
    const double scale = X.cwiseAbs().maxCoeff();
    if (scale == 0.0)
        return out;
    for (int m = 0; m < X.rows(); ++m)
        for (int n = 0; n < X.cols(); ++n)
            if (std::abs(X(m, n)) > 1e-15 * scale)
                out.push_back({m, n, X(m, n), E[m] - E[n]});
    return out;
}

struct PairTable {
    int p, q;
    Elem a, b;
    CMatrix R; // both orders
    CMatrix Q; // photon-1 absorption first
};

} // namespace

GridAmplitudes scatter_grid(const ScatteringSetup& setup, const MatterSystem& matter)
{
    check_setup(setup);
    if (!setup.absorption.is_identity() || !(setup.free == setup.emission))
        throw CapabilityError("scatter_grid: the prefix-table kernel needs interaction-order channel maps; "
                              "use scatter_point for other routes");
    const MatterOps ops = matter_ops(matter);
    const TimeDomainInput& in = setup.input;
    const TimeGrid& tg = in.grid;
    const int N = tg.n_points;
    const int ts = setup.t_star;
    const double dt = tg.dt;
    const int d = ops.d;
    const int nk = int(ops.states.size());
    const ChannelMap& B = setup.emission;

    std::vector<double> wts(N);
    for (int s = 0; s < N; ++s)
        wts[s] = absorption_weight(s, ts, dt);
    // phase(i, m) = exp(i E_m t_i)
    CMatrix phase(N, d);
    for (int i = 0; i < N; ++i)
        for (int m = 0; m < d; ++m)
            phase(i, m) = std::exp(kI * ops.E[m] * tg.t(i));

    std::array<std::vector<Elem>, 2> elems;
    for (int c = 0; c < 2; ++c)
        if (ops.active[c])
            elems[c] = nonzero_elements(ops.X[c], ops.E);

    // Single-absorption tables P[c][f][alpha](e, v), e in [0, N].
    struct P2Table {
        int c, f;
        Elem a;
        CMatrix P;
    };
    std::vector<P2Table> p2;
    for (int c = 0; c < 2; ++c)
        for (int f = 0; f < 2; ++f) {
            if (!in.has_block(c, f) && !in.has_block(f, c))
                continue;
            for (const Elem& a : elems[c])
                p2.push_back({c, f, a, CMatrix()});
        }
    std::vector<PairTable> p4;
    for (int p = 0; p < 2; ++p)
        for (int q = 0; q < 2; ++q) {
            if (!in.has_block(p, q))
                continue;
            for (const Elem& a : elems[p])
                for (const Elem& b : elems[q])
                    p4.push_back({p, q, a, b, CMatrix(), CMatrix()});
        }
    const double table_bytes = double(p2.size() + 2 * p4.size()) * double(N + 1) * (N + 1) * sizeof(cplx);
    if (table_bytes > 4e9)
        throw CapabilityError("scatter_grid: prefix tables would need more than 4 GB; reduce the grid size");

#pragma omp parallel for schedule(dynamic)
    for (long t = 0; t < long(p2.size()); ++t) {
        P2Table& tb = p2[size_t(t)];
        tb.P = CMatrix::Zero(N + 1, N);
        std::vector<cplx> g(N);
        for (int v = 0; v < N; ++v) {
            for (int s = 0; s < N; ++s) {
                cplx f = in.at(tb.c, tb.f, s, v) + in.at(tb.f, tb.c, v, s);
                g[s] = wts[s] * std::exp(kI * tb.a.omega * tg.t(s)) * f;
            }
            cplx cum = 0.0;
            for (int e = 0; e < N; ++e) {
                tb.P(e, v) = cum + 0.5 * g[e];
                cum += g[e];
            }
            tb.P(N, v) = cum;
        }
    }

#pragma omp parallel for schedule(dynamic)
    for (long t = 0; t < long(p4.size()); ++t) {
        PairTable& tb = p4[size_t(t)];
        CMatrix g(N, N), gq(N, N);
        for (int j = 0; j < N; ++j) {
            const cplx pj = wts[j] * std::exp(kI * tb.b.omega * tg.t(j));
            for (int i = 0; i < N; ++i) {
                const cplx v = wts[i] * std::exp(kI * tb.a.omega * tg.t(i)) * pj * in.block[tb.p][tb.q](i, j);
                g(i, j) = v;
                gq(i, j) = hstep(j - i) * v;
            }
        }
        tb.R = half_prefix(g);
        tb.Q = half_prefix(gq);
    }

    GridAmplitudes out;
    out.n = N;
    out.dim = d;
    out.n_states = nk;
    const size_t total = size_t(nk) * N * N * d;
    out.a0.assign(total, 0.0);
    out.a2.assign(total, 0.0);
    out.a4.assign(total, 0.0);

    static const double mcoef[3][3] = {{1, 0, 0}, {-1, 1, 0}, {0, -1, 1}};

#pragma omp parallel for schedule(dynamic)
    for (int w1 = 0; w1 < N; ++w1) {
        std::vector<CVector> acc0(nk), acc2(nk), acc4(nk);
        std::vector<CVector> u(nk), uu(nk);
        CMatrix Yt1(d, d), Yt2(d, d);
        for (int w2 = 0; w2 < N; ++w2) {
            for (int k = 0; k < nk; ++k) {
                acc0[k] = CVector::Zero(d);
                acc2[k] = CVector::Zero(d);
                acc4[k] = CVector::Zero(d);
            }
            for (int c1 = 0; c1 < 2; ++c1)
                for (int c2 = 0; c2 < 2; ++c2) {
                    const cplx M = B.coef[0][c1] * B.coef[1][c2];
                    if (M == 0.0)
                        continue;
                    const int t1 = w1 + B.shift[0][c1];
                    const int t2 = w2 + B.shift[1][c2];
                    const cplx a0 = in.at(c1, c2, t1, t2) + in.at(c2, c1, t2, t1);
                    if (a0 != 0.0)
                        for (int k = 0; k < nk; ++k)
                            acc0[k] += M * a0 * ops.states[k];

                    const double em1 = emission_weight(t1, ts), em2 = emission_weight(t2, ts);
                    auto emitted = [&](int c, int e, CMatrix& Ye) {
                        for (int j = 0; j < d; ++j)
                            for (int m = 0; m < d; ++m)
                                Ye(j, m) = ops.Y[c](j, m) * phase(e, j) * std::conj(phase(e, m));
                    };
                    if (em1 > 0.0)
                        emitted(c1, t1, Yt1);
                    if (em2 > 0.0)
                        emitted(c2, t2, Yt2);

                    // One slot emits at time e through Ye; the other slot is a free
                    // photon in channel cf at time v.
                    auto single = [&](const CMatrix& Ye, int e, double em, int cf, int v) {
                        if (em == 0.0 || v < 0 || v >= N)
                            return;
                        for (const P2Table& tb : p2) {
                            if (tb.f != cf)
                                continue;
                            const cplx pb = tb.P(e, v);
                            const cplx pa = tb.P(N, v) - pb;
                            if (pb == 0.0 && pa == 0.0)
                                continue;
                            const cplx pre = -M * em * tb.a.x;
                            for (int k = 0; k < nk; ++k) {
                                const CVector& psi = ops.states[k];
                                acc2[k] += (pre * pb * psi[tb.a.n]) * Ye.col(tb.a.m);
                                const cplx yn = (Ye.row(tb.a.n) * psi)(0);
                                acc2[k][tb.a.m] += pre * pa * yn;
                            }
                        }
                    };
                    if (t1 >= 0 && t1 < N)
                        single(Yt1, t1, em1, c2, t2);
                    if (t2 >= 0 && t2 < N)
                        single(Yt2, t2, em2, c1, t1);

                    if (em1 == 0.0 || em2 == 0.0 || p4.empty())
                        continue;
                    struct Assign {
                        const CMatrix* lo;
                        const CMatrix* hi;
                        int ilo, ihi;
                        double w;
                    };
                    Assign as[2];
                    int nas = 0;
                    if (t1 < t2)
                        as[nas++] = {&Yt1, &Yt2, t1, t2, 1.0};
                    else if (t1 > t2)
                        as[nas++] = {&Yt2, &Yt1, t2, t1, 1.0};
                    else {
                        as[nas++] = {&Yt1, &Yt2, t1, t2, 0.5};
                        as[nas++] = {&Yt2, &Yt1, t2, t1, 0.5};
                    }
                    for (int ia = 0; ia < nas; ++ia) {
                        const CMatrix& Ylo = *as[ia].lo;
                        const CMatrix& Yhi = *as[ia].hi;
                        const CMatrix YY = Yhi * Ylo;
                        for (int k = 0; k < nk; ++k) {
                            u[k] = Ylo * ops.states[k];
                            uu[k] = Yhi * u[k];
                        }
                        const int L[3] = {as[ia].ilo, as[ia].ihi, N};
                        const cplx pre = M * em1 * em2 * as[ia].w;
                        for (const PairTable& tb : p4) {
                            cplx Rv[3][3], Qv[3][3];
                            for (int a = 0; a < 3; ++a)
                                for (int b = 0; b < 3; ++b) {
                                    Rv[a][b] = tb.R(L[a], L[b]);
                                    Qv[a][b] = tb.Q(L[a], L[b]);
                                }
                            cplx rect[3][3], qq[3], rr[3];
                            for (int i = 0; i < 3; ++i)
                                for (int j = 0; j < 3; ++j) {
                                    cplx s = 0.0;
                                    for (int a = 0; a < 3; ++a)
                                        for (int b = 0; b < 3; ++b)
                                            if (mcoef[i][a] != 0.0 && mcoef[j][b] != 0.0)
                                                s += mcoef[i][a] * mcoef[j][b] * Rv[a][b];
                                    rect[i][j] = s;
                                }
                            for (int i = 0; i < 3; ++i) {
                                cplx s = 0.0;
                                for (int a = 0; a < 3; ++a)
                                    for (int b = 0; b < 3; ++b)
                                        if (mcoef[i][a] != 0.0 && mcoef[i][b] != 0.0)
                                            s += mcoef[i][a] * mcoef[i][b] * Qv[a][b];
                                qq[i] = s;
                                rr[i] = rect[i][i] - s;
                            }
                            const int m1 = tb.a.m, n1 = tb.a.n, m2 = tb.b.m, n2 = tb.b.n;
                            const cplx x = pre * tb.a.x * tb.b.x;
                            for (int k = 0; k < nk; ++k) {
                                const CVector& psi = ops.states[k];
                                CVector& acc = acc4[k];
                                // (0,0)
                                if (m1 == n2)
                                    acc += (x * qq[0] * psi[n1]) * YY.col(m2);
                                if (m2 == n1)
                                    acc += (x * rr[0] * psi[n2]) * YY.col(m1);
                                // (0,1), (1,0)
                                acc += (x * rect[0][1] * psi[n1] * Ylo(n2, m1)) * Yhi.col(m2);
                                acc += (x * rect[1][0] * psi[n2] * Ylo(n1, m2)) * Yhi.col(m1);
                                // (0,2), (2,0)
                                acc[m2] += x * rect[0][2] * psi[n1] * YY(n2, m1);
                                acc[m1] += x * rect[2][0] * psi[n2] * YY(n1, m2);
                                // (1,1)
                                if (m1 == n2)
                                    acc += (x * qq[1] * u[k][n1]) * Yhi.col(m2);
                                if (m2 == n1)
                                    acc += (x * rr[1] * u[k][n2]) * Yhi.col(m1);
                                // (1,2), (2,1)
                                acc[m2] += x * rect[1][2] * u[k][n1] * Yhi(n2, m1);
                                acc[m1] += x * rect[2][1] * u[k][n2] * Yhi(n1, m2);
                                // (2,2)
                                if (m1 == n2)
                                    acc[m2] += x * qq[2] * uu[k][n1];
                                if (m2 == n1)
                                    acc[m1] += x * rr[2] * uu[k][n2];
                            }
                        }
                    }
                }
            for (int k = 0; k < nk; ++k) {
                const size_t o = out.offset(k, w1, w2);
                for (int m = 0; m < d; ++m) {
                    out.a0[o + m] = acc0[k][m];
                    out.a2[o + m] = acc2[k][m];
                    out.a4[o + m] = acc4[k][m];
                }
            }
        }
    }
    return out;
}

DensityParts coincidence_density(const GridAmplitudes& g, const std::vector<double>& weights, double lambda)
{
    if (int(weights.size()) != g.n_states)
        throw ValidationError("coincidence_density: ensemble weights do not match the amplitudes");
    const int n = g.n;
    DensityParts out;
    out.total = Eigen::MatrixXd::Zero(n, n);
    out.background = Eigen::MatrixXd::Zero(n, n);
    out.order2 = Eigen::MatrixXd::Zero(n, n);
    out.order4 = Eigen::MatrixXd::Zero(n, n);
    const double l2 = lambda * lambda, l4 = l2 * l2;
    for (int k = 0; k < g.n_states; ++k)
        for (int w1 = 0; w1 < n; ++w1)
            for (int w2 = 0; w2 < n; ++w2) {
                const size_t o = g.offset(k, w1, w2);
                double tot = 0, bg = 0, o2 = 0, o4 = 0;
                for (int m = 0; m < g.dim; ++m) {
                    const cplx a0 = g.a0[o + m], a2 = g.a2[o + m], a4 = g.a4[o + m];
                    tot += std::norm(a0 + l2 * a2 + l4 * a4);
                    bg += std::norm(a0);
                    o2 += 2.0 * std::real(std::conj(a0) * a2);
                    o4 += std::norm(a2) + 2.0 * std::real(std::conj(a0) * a4);
                }
                out.total(w1, w2) += weights[size_t(k)] * tot;
                out.background(w1, w2) += weights[size_t(k)] * bg;
                out.order2(w1, w2) += weights[size_t(k)] * l2 * o2;
                out.order4(w1, w2) += weights[size_t(k)] * l4 * o4;
            }
    return out;
}

CMatrix cross_density(const GridAmplitudes& g1, const GridAmplitudes& g2, const std::vector<double>& weights,
    double lambda)
{
    if (g1.n != g2.n || g1.dim != g2.dim || g1.n_states != g2.n_states || int(weights.size()) != g1.n_states)
        throw ValidationError("cross_density: amplitude sets are not compatible");
    const int n = g1.n;
    const double l2 = lambda * lambda, l4 = l2 * l2;
    CMatrix out = CMatrix::Zero(n, n);
    for (int k = 0; k < g1.n_states; ++k)
        for (int w1 = 0; w1 < n; ++w1)
            for (int w2 = 0; w2 < n; ++w2) {
                const size_t o = g1.offset(k, w1, w2);
                cplx s = 0.0;
                for (int m = 0; m < g1.dim; ++m) {
                    cplx x = g1.a0[o + m] + l2 * g1.a2[o + m] + l4 * g1.a4[o + m];
                    cplx y = g2.a0[o + m] + l2 * g2.a2[o + m] + l4 * g2.a4[o + m];
                    s += std::conj(x) * y;
                }
                out(w1, w2) += weights[size_t(k)] * s;
            }
    return out;
}

} // namespace qlis
