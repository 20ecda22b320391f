#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qlis {

typedef std::complex<double> cplx;
typedef Eigen::MatrixXcd CMatrix;
typedef Eigen::VectorXcd CVector;
typedef Eigen::Matrix2cd CMatrix2;
typedef Eigen::VectorXd RVector;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cplx kI{0.0, 1.0};

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad parameter values or violated preconditions on inputs.
class ValidationError : public Error {
public:
    using Error::Error;
};

// A grid or integration range does not cover the support of the signal.
class CoverageError : public Error {
public:
    using Error::Error;
};

// A Fock-space operation would populate states above the photon cutoff.
class TruncationOverflowError : public Error {
public:
    using Error::Error;
};

// The request exceeds what the implementation supports (sizes, photon counts).
class CapabilityError : public Error {
public:
    using Error::Error;
};

class LookupError : public Error {
public:
    using Error::Error;
};

// Model asked for something it was not configured with (e.g. missing RWA split).
class ConfigurationError : public Error {
public:
    using Error::Error;
};

// Invalid experiment configuration (unknown keys, wrong types, missing fields).
class ConfigError : public Error {
public:
    using Error::Error;
};

class KindMismatchError : public Error {
public:
    using Error::Error;
};

inline double sinc(double x)
{
    if (std::abs(x) < 1e-8)
        return 1.0 - x * x / 6.0;
    return std::sin(x) / x;
}

} // namespace qlis
