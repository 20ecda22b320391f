#include "qlis/photon_states.hpp"

#include <cmath>
#include <sstream>

#include <unsupported/Eigen/FFT>

namespace qlis {

FrequencyGrid FrequencyGrid::make(int n_points, double omega_min, double omega_max)
{
    if (n_points < 8)
        throw ValidationError("FrequencyGrid: need at least 8 points");
    if (!(omega_max > omega_min) || !std::isfinite(omega_min) || !std::isfinite(omega_max))
        throw ValidationError("FrequencyGrid: omega_max must exceed omega_min");
    return FrequencyGrid{n_points, omega_min, omega_max};
}

FrequencyGrid FrequencyGrid::centered(int n_points, double center, double spacing)
{
    double half = 0.5 * (n_points - 1) * spacing;
    return make(n_points, center - half, center + half);
}

int TimeGrid::index_of(double t) const
{
    double x = (t - t0) / dt;
    long j = std::lround(x);
    if (j < 0 || j >= n_points)
        return -1;
    return int(j);
}

TimeGrid conjugate_time_grid(const FrequencyGrid& g)
{
    TimeGrid tg;
    tg.n_points = g.n_points;
    tg.dt = 2.0 * kPi / (g.n_points * g.spacing());
    tg.t0 = -double(g.n_points / 2) * tg.dt;
    return tg;
}

CVector spectrum_to_time(const FrequencyGrid& g, const CVector& spectrum)
{
    const int n = g.n_points;
    if (spectrum.size() != n)
        throw ValidationError("spectrum_to_time: size mismatch");
    const int off = n / 2;
    const TimeGrid tg = conjugate_time_grid(g);
    std::vector<cplx> in(n), out;
    for (int k = 0; k < n; ++k)
        in[k] = spectrum[k] * std::exp(kI * (2.0 * kPi * double(k) * off / n));
    Eigen::FFT<double> fft;
    fft.fwd(out, in);
    const double c = g.spacing() / std::sqrt(2.0 * kPi);
    CVector res(n);
    for (int j = 0; j < n; ++j)
        res[j] = c * std::exp(-kI * g.omega_min * tg.t(j)) * out[j];
    return res;
}

CVector time_to_spectrum(const FrequencyGrid& g, const CVector& samples)
{
    const int n = g.n_points;
    if (samples.size() != n)
        throw ValidationError("time_to_spectrum: size mismatch");
    const int off = n / 2;
    const TimeGrid tg = conjugate_time_grid(g);
    std::vector<cplx> in(n), out;
    for (int j = 0; j < n; ++j)
        in[j] = samples[j] * std::exp(kI * g.omega_min * tg.t(j));
    Eigen::FFT<double> fft;
    fft.inv(out, in);
    const double c = tg.dt / std::sqrt(2.0 * kPi) * n;
    CVector res(n);
    for (int k = 0; k < n; ++k)
        res[k] = c * std::exp(-kI * (2.0 * kPi * double(k) * off / n)) * out[k];
    return res;
}

double SpectralEnvelope::norm() const
{
    return std::sqrt(values.squaredNorm() * grid.spacing());
}

SpectralEnvelope gaussian_envelope(const FrequencyGrid& g, double center, double sigma, double delay, double gdd)
{
    if (!(sigma > 0.0))
        throw ValidationError("gaussian_envelope: sigma must be positive");
    SpectralEnvelope e{g, CVector(g.n_points)};
    for (int k = 0; k < g.n_points; ++k) {
        double w = g.omega(k);
        double d = w - center;
        e.values[k] = std::exp(-d * d / (4.0 * sigma * sigma)) * std::exp(kI * (w * delay + 0.5 * gdd * d * d));
    }
    return e;
}

SpectralEnvelope single_bin_envelope(const FrequencyGrid& g, int k)
{
    if (k < 0 || k >= g.n_points)
        throw ValidationError("single_bin_envelope: bin outside grid");
    SpectralEnvelope e{g, CVector::Zero(g.n_points)};
    e.values[k] = 1.0;
    return e;
}

SpectralEnvelope delta_epsilon_envelope(const FrequencyGrid& g, double t_center, double eps)
{
    if (!(eps > 0.0))
        throw ValidationError("delta_epsilon_envelope: width must be positive");
    // |phi(t)|^2 with rms width eps  <->  spectral amplitude exp(-eps^2 w^2).
    SpectralEnvelope e{g, CVector(g.n_points)};
    for (int k = 0; k < g.n_points; ++k) {
        double w = g.omega(k);
        e.values[k] = std::exp(-eps * eps * w * w) * std::exp(kI * w * t_center);
    }
    double n = e.norm();
    if (!(n > 0.0))
        throw ValidationError("delta_epsilon_envelope: envelope vanishes on the grid");
    e.values /= n;
    return e;
}

cplx overlap(const SpectralEnvelope& a, const SpectralEnvelope& b)
{
    if (!(a.grid == b.grid))
        throw ValidationError("overlap: envelopes on different grids");
    return a.values.dot(b.values) * a.grid.spacing();
}

TwoPhotonAmplitude::TwoPhotonAmplitude(FrequencyGrid grid_a, FrequencyGrid grid_b, CMatrix values)
    : grid_a_(grid_a), grid_b_(grid_b), values_(std::move(values))
{
    if (values_.rows() != grid_a_.n_points || values_.cols() != grid_b_.n_points)
        throw ValidationError("TwoPhotonAmplitude: value array does not match grids");
    if (!values_.allFinite())
        throw ValidationError("TwoPhotonAmplitude: non-finite values");
}

double TwoPhotonAmplitude::center_a() const
{
    RVector m = values_.cwiseAbs2().rowwise().sum();
    double s = m.sum();
    if (!(s > 0.0))
        return 0.5 * (grid_a_.omega_min + grid_a_.omega_max);
    double acc = 0.0;
    for (int k = 0; k < m.size(); ++k)
        acc += m[k] * grid_a_.omega(k);
    return acc / s;
}

double TwoPhotonAmplitude::center_b() const
{
    RVector m = values_.cwiseAbs2().colwise().sum().transpose();
    double s = m.sum();
    if (!(s > 0.0))
        return 0.5 * (grid_b_.omega_min + grid_b_.omega_max);
    double acc = 0.0;
    for (int k = 0; k < m.size(); ++k)
        acc += m[k] * grid_b_.omega(k);
    return acc / s;
}

double TwoPhotonAmplitude::norm() const
{
    return std::sqrt(values_.squaredNorm() * grid_a_.spacing() * grid_b_.spacing());
}

TwoPhotonAmplitude TwoPhotonAmplitude::normalized() const
{
    double n = norm();
    if (!(n > 0.0))
        throw ValidationError("TwoPhotonAmplitude: cannot normalise a zero amplitude");
    return TwoPhotonAmplitude(grid_a_, grid_b_, values_ / n);
}

TwoPhotonAmplitude TwoPhotonAmplitude::scaled(cplx s) const
{
    return TwoPhotonAmplitude(grid_a_, grid_b_, values_ * s);
}

TwoPhotonAmplitude TwoPhotonAmplitude::delayed_a(double tau) const
{
    CMatrix v = values_;
    for (int k = 0; k < grid_a_.n_points; ++k)
        v.row(k) *= std::exp(kI * grid_a_.omega(k) * tau);
    return TwoPhotonAmplitude(grid_a_, grid_b_, v);
}

cplx TwoPhotonAmplitude::evaluate_time(double t1, double t2) const
{
    CVector u(grid_a_.n_points), w(grid_b_.n_points);
    for (int k = 0; k < grid_a_.n_points; ++k)
        u[k] = std::exp(-kI * grid_a_.omega(k) * t1);
    for (int k = 0; k < grid_b_.n_points; ++k)
        w[k] = std::exp(-kI * grid_b_.omega(k) * t2);
    cplx s = u.transpose() * values_ * w;
    return s * grid_a_.spacing() * grid_b_.spacing() / (2.0 * kPi);
}

double TimeAmplitude::norm() const
{
    return std::sqrt(values.squaredNorm() * grid_a.dt * grid_b.dt);
}

TwoPhotonAmplitude product_amplitude(const SpectralEnvelope& phi_a, const SpectralEnvelope& phi_b)
{
    if (!(phi_a.norm() > 0.0) || !(phi_b.norm() > 0.0))
        throw ValidationError("product_amplitude: zero envelope");
    CMatrix v = phi_a.values * phi_b.values.transpose();
    return TwoPhotonAmplitude(phi_a.grid, phi_b.grid, v).normalized();
}

TwoPhotonAmplitude theta_symmetrize(const TwoPhotonAmplitude& phi, double theta)
{
    if (!phi.square())
        throw ValidationError("theta_symmetrize: needs identical grids on both axes");
    CMatrix v = (phi.values() + std::exp(kI * theta) * phi.values().transpose()) / std::sqrt(2.0);
    return TwoPhotonAmplitude(phi.grid_a(), phi.grid_b(), v);
}

TimeAmplitude to_time_domain(const TwoPhotonAmplitude& phi)
{
    TimeAmplitude out;
    out.grid_a = conjugate_time_grid(phi.grid_a());
    out.grid_b = conjugate_time_grid(phi.grid_b());
    CMatrix tmp(phi.values().rows(), phi.values().cols());
    for (Eigen::Index c = 0; c < tmp.cols(); ++c)
        tmp.col(c) = spectrum_to_time(phi.grid_a(), phi.values().col(c));
    out.values.resize(tmp.rows(), tmp.cols());
    for (Eigen::Index r = 0; r < tmp.rows(); ++r)
        out.values.row(r) = spectrum_to_time(phi.grid_b(), tmp.row(r).transpose()).transpose();
    return out;
}

TwoPhotonAmplitude from_time_domain(const TimeAmplitude& t, const FrequencyGrid& ga, const FrequencyGrid& gb)
{
    CMatrix tmp(t.values.rows(), t.values.cols());
    for (Eigen::Index c = 0; c < tmp.cols(); ++c)
        tmp.col(c) = time_to_spectrum(ga, t.values.col(c));
    CMatrix out(tmp.rows(), tmp.cols());
    for (Eigen::Index r = 0; r < tmp.rows(); ++r)
        out.row(r) = time_to_spectrum(gb, tmp.row(r).transpose()).transpose();
    return TwoPhotonAmplitude(ga, gb, out);
}

TwoPhotonAmplitude chirp_a(const TwoPhotonAmplitude& phi, double gdd)
{
    double c = phi.center_a();
    CMatrix v = phi.values();
    for (int k = 0; k < phi.grid_a().n_points; ++k) {
        double d = phi.grid_a().omega(k) - c;
        v.row(k) *= std::exp(kI * 0.5 * gdd * d * d);
    }
    return TwoPhotonAmplitude(phi.grid_a(), phi.grid_b(), v);
}

void SpdcParameters::validate() const
{
    if (!(sigma_p > 0.0 && T_e > 0.0 && omega_p0 > 0.0 && omega_a0 > 0.0 && omega_b0 > 0.0))
        throw ValidationError("SpdcParameters: sigma_p, T_e and all centre frequencies must be positive");
}

double spdc_required_half_span(const SpdcParameters& p)
{
    return std::max(3.0 * p.sigma_p, 3.0 / p.T_e);
}

TwoPhotonAmplitude spdc_amplitude(const SpdcParameters& p, const FrequencyGrid& grid)
{
    p.validate();
    if (std::abs(p.omega_a0 + p.omega_b0 - p.omega_p0) > grid.spacing())
        throw ValidationError("spdc_amplitude: omega_a0 + omega_b0 must equal omega_p0 within one grid spacing");
    double half = spdc_required_half_span(p);
    for (double c : {p.omega_a0, p.omega_b0}) {
        if (grid.omega_min > c - half || grid.omega_max < c + half) {
            std::ostringstream os;
            os << "spdc_amplitude: grid [" << grid.omega_min << ", " << grid.omega_max
               << "] must cover centre " << c << " +/- " << half << " rad/s (required span "
               << (std::max(p.omega_a0, p.omega_b0) - std::min(p.omega_a0, p.omega_b0) + 2 * half) << ")";
            throw CoverageError(os.str());
        }
    }
    const int n = grid.n_points;
    CMatrix v(n, n);
    const double d0 = p.omega_a0 - p.omega_b0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double s = grid.omega(i) + grid.omega(j) - p.omega_p0;
            double d = grid.omega(i) - grid.omega(j) - d0;
            v(i, j) = std::exp(-s * s / (4.0 * p.sigma_p * p.sigma_p)) * sinc(d * p.T_e / 4.0);
        }
    return TwoPhotonAmplitude(grid, grid, v).normalized();
}

NPhotonAmplitude::NPhotonAmplitude(int n, FrequencyGrid grid, std::vector<cplx> values, Eigen::MatrixXd theta)
    : n_(n), grid_(grid), values_(std::move(values)), theta_(std::move(theta))
{
    if (n < 1)
        throw ValidationError("NPhotonAmplitude: photon count must be positive");
    if (n > 4)
        throw CapabilityError("NPhotonAmplitude: at most 4 photons are supported");
    size_t expect = 1;
    for (int i = 0; i < n; ++i)
        expect *= size_t(grid.n_points);
    if (values_.size() != expect)
        throw ValidationError("NPhotonAmplitude: value array does not match grid^n");
    if (theta_.size() == 0)
        theta_ = Eigen::MatrixXd::Zero(n, n);
    if (theta_.rows() != n || theta_.cols() != n)
        throw ValidationError("NPhotonAmplitude: theta matrix must be n x n");
}

NPhotonAmplitude NPhotonAmplitude::product(const std::vector<SpectralEnvelope>& envelopes)
{
    const int n = int(envelopes.size());
    if (n < 1)
        throw ValidationError("NPhotonAmplitude::product: need at least one envelope");
    if (n > 4)
        throw CapabilityError("NPhotonAmplitude::product: at most 4 photons are supported");
    const FrequencyGrid g = envelopes[0].grid;
    for (const auto& e : envelopes) {
        if (!(e.grid == g))
            throw ValidationError("NPhotonAmplitude::product: envelopes on different grids");
        if (!(e.norm() > 0.0))
            throw ValidationError("NPhotonAmplitude::product: zero envelope");
    }
    const size_t m = size_t(g.n_points);
    std::vector<cplx> v{1.0};
    for (int p = 0; p < n; ++p) {
        std::vector<cplx> next(v.size() * m);
        cplx inv = 1.0 / envelopes[p].norm();
        for (size_t i = 0; i < v.size(); ++i)
            for (size_t k = 0; k < m; ++k)
                next[i * m + k] = v[i] * envelopes[p].values[Eigen::Index(k)] * inv;
        v.swap(next);
    }
    return NPhotonAmplitude(n, g, std::move(v));
}

NPhotonAmplitude NPhotonAmplitude::transposed(int i, int j) const
{
    if (i < 0 || j < 0 || i >= n_ || j >= n_)
        throw ValidationError("NPhotonAmplitude::transposed: axis out of range");
    if (i == j)
        return *this;
    const size_t m = size_t(grid_.n_points);
    std::vector<size_t> stride(n_);
    stride[n_ - 1] = 1;
    for (int a = n_ - 2; a >= 0; --a)
        stride[a] = stride[a + 1] * m;
    std::vector<cplx> out(values_.size());
    for (size_t idx = 0; idx < values_.size(); ++idx) {
        size_t ii = (idx / stride[i]) % m;
        size_t jj = (idx / stride[j]) % m;
        size_t swapped = idx - ii * stride[i] - jj * stride[j] + jj * stride[i] + ii * stride[j];
        out[swapped] = values_[idx];
    }
    return NPhotonAmplitude(n_, grid_, std::move(out), theta_);
}

double NPhotonAmplitude::norm() const
{
    double s = 0.0;
    for (const cplx& z : values_)
        s += std::norm(z);
    return std::sqrt(s * std::pow(grid_.spacing(), n_));
}

NPhotonAmplitude exchange_phase_amplitude(const NPhotonAmplitude& phi, const Eigen::MatrixXd& theta)
{
    const int n = phi.n();
    if (n > 4)
        throw CapabilityError("exchange_phase_amplitude: at most 4 photons are supported");
    if (theta.rows() != n || theta.cols() != n)
        throw ValidationError("exchange_phase_amplitude: theta matrix must be n x n");
    std::vector<cplx> acc = phi.values();
    int terms = 1;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            NPhotonAmplitude p = phi.transposed(i, j);
            cplx ph = std::exp(kI * theta(i, j));
            for (size_t k = 0; k < acc.size(); ++k)
                acc[k] += ph * p.values()[k];
            ++terms;
        }
    const double scale = 1.0 / std::sqrt(double(terms));
    for (auto& z : acc)
        z *= scale;
    return NPhotonAmplitude(n, phi.grid(), std::move(acc), theta);
}

TwoModeState TwoModeState::from_amplitude(const TwoPhotonAmplitude& phi)
{
    if (!phi.square())
        throw ValidationError("TwoModeState: needs identical grids on both axes");
    TwoModeState s;
    s.grid = phi.grid_a();
    const int n = s.grid.n_points;
    for (auto& row : s.block)
        for (auto& b : row)
            b = CMatrix::Zero(n, n);
    s.block[0][1] = phi.values();
    return s;
}

TwoPhotonAmplitude TwoModeState::two_mode_part() const
{
    CMatrix v = block[0][1] + block[1][0].transpose();
    return TwoPhotonAmplitude(grid, grid, v);
}

CMatrix TwoModeState::bunched_a() const
{
    return block[0][0] + block[0][0].transpose();
}

CMatrix TwoModeState::bunched_b() const
{
    return block[1][1] + block[1][1].transpose();
}

double TwoModeState::norm() const
{
    double dw2 = grid.spacing() * grid.spacing();
    double s = two_mode_part().values().squaredNorm() + 0.5 * bunched_a().squaredNorm()
        + 0.5 * bunched_b().squaredNorm();
    return std::sqrt(s * dw2);
}

TwoModeState apply_transform(const TwoModeState& s, const ModeTransform& t)
{
    if (t.kind() != TransformKind::passive)
        throw KindMismatchError("apply_transform: only passive transforms act on photon amplitudes");
    const int n = s.grid.n_points;
    std::vector<CMatrix2> R(n);
    for (int k = 0; k < n; ++k)
        R[k] = t.matrix_at(s.grid.omega(k));

    TwoModeState out;
    out.grid = s.grid;
    for (auto& row : out.block)
        for (auto& b : row)
            b = CMatrix::Zero(n, n);
    // C'_kl(x, y) = sum_ij C_ij(x, y) R_ki(x) R_lj(y)
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            const CMatrix& C = s.block[i][j];
            if (C.isZero(0.0))
                continue;
            for (int k = 0; k < 2; ++k)
                for (int l = 0; l < 2; ++l) {
                    CMatrix& D = out.block[k][l];
                    for (int y = 0; y < n; ++y) {
                        cplx ry = R[y](l, j);
                        for (int x = 0; x < n; ++x)
                            D(x, y) += C(x, y) * R[x](k, i) * ry;
                    }
                }
        }
    return out;
}

} // namespace qlis
