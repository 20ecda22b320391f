#include "qlis/interferometer.hpp"

#include <cmath>
#include <sstream>

namespace qlis {

double unitarity_residual(const CMatrix2& m)
{
    return (m.adjoint() * m - CMatrix2::Identity()).norm();
}

double bogoliubov_residual(const CMatrix2& m)
{
    return std::abs(std::norm(m(0, 0)) - std::norm(m(0, 1)) - 1.0);
}

ModeTransform::ModeTransform(const CMatrix2& matrix, TransformKind kind, double delay)
    : matrix_(matrix), kind_(kind), delay_(delay)
{
    if (!std::isfinite(delay))
        throw ValidationError("ModeTransform: delay must be finite");
    if (kind == TransformKind::passive) {
        double r = unitarity_residual(matrix);
        double d = std::abs(std::abs(matrix.determinant()) - 1.0);
        if (r > 1e-12 || d > 1e-12) {
            std::ostringstream os;
            os << "ModeTransform: passive matrix is not unitary (|M^dag M - I| = " << r << ")";
            throw ValidationError(os.str());
        }
    } else {
        double r = bogoliubov_residual(matrix);
        if (r > 1e-12) {
            std::ostringstream os;
            os << "ModeTransform: active matrix violates |M11|^2 - |M12|^2 = 1 (residual " << r << ")";
            throw ValidationError(os.str());
        }
        if (delay != 0.0)
            throw ValidationError("ModeTransform: delays are only defined for passive elements");
    }
}

CMatrix2 ModeTransform::matrix_at(double omega) const
{
    if (delay_ == 0.0)
        return matrix_;
    CMatrix2 m = matrix_;
    m(0, 1) *= std::exp(-kI * omega * delay_);
    m(1, 0) *= std::exp(kI * omega * delay_);
    return m;
}

ModeTransform ModeTransform::inverse() const
{
    if (kind_ == TransformKind::passive)
        return ModeTransform(matrix_.adjoint(), kind_, delay_);
    // For M = ((u, v), (v*, u*)) with |u|^2 - |v|^2 = 1 the inverse keeps the form.
    CMatrix2 inv = matrix_.inverse();
    return ModeTransform(inv, kind_, delay_);
}

ModeTransform beam_splitter(double T, double R, double phi)
{
    if (!(T >= 0.0 && T <= 1.0 && R >= 0.0 && R <= 1.0))
        throw ValidationError("beam_splitter: T and R must lie in [0, 1]");
    double resid = T * T + R * R - 1.0;
    if (std::abs(resid) > 1e-9) {
        std::ostringstream os;
        os << "beam_splitter: T^2 + R^2 - 1 = " << resid << " exceeds 1e-9";
        throw ValidationError(os.str());
    }
    // Remove the admitted 1e-9 slack so the matrix is unitary to rounding.
    double s = std::sqrt(T * T + R * R);
    T /= s;
    R /= s;
    CMatrix2 m;
    m << T, kI * R * std::exp(kI * phi),
        kI * R * std::exp(-kI * phi), T;
    return ModeTransform(m, TransformKind::passive);
}

ModeTransform delayed_balanced_bs(double T_delay)
{
    double h = 1.0 / std::sqrt(2.0);
    ModeTransform bs = beam_splitter(h, h, 0.0);
    return ModeTransform(bs.matrix(), TransformKind::passive, T_delay);
}

ModeTransform squeezer(double beta, double delta)
{
    if (!(beta >= 0.0) || !std::isfinite(beta))
        throw ValidationError("squeezer: beta must be a finite non-negative number");
    CMatrix2 m;
    m << std::cosh(beta), std::exp(-kI * delta) * std::sinh(beta),
        std::exp(kI * delta) * std::sinh(beta), std::cosh(beta);
    return ModeTransform(m, TransformKind::active);
}

ModeTransform identity_transform()
{
    return ModeTransform(CMatrix2::Identity(), TransformKind::passive);
}

ModeTransform compose(const ModeTransform& m1, const ModeTransform& m2)
{
    if (m1.kind() != m2.kind())
        throw KindMismatchError("compose: cannot mix passive and active transforms");
    if (m1.delay() != 0.0 || m2.delay() != 0.0)
        throw ValidationError("compose: delayed elements do not compose into a single delayed element; "
                              "use matrix_at(omega) for a fixed frequency");
    return ModeTransform(m1.matrix() * m2.matrix(), m1.kind());
}

} // namespace qlis
