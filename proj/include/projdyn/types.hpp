#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace projdyn {

using cxd = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;

// One knob set for every tolerance decision in the library. CLI flags map
// onto these fields and reports echo the effective values.
struct Tolerances {
    double det_tol = 1e-9;        // |det - 1| band after SL normalization
    double unit_tol = 1e-8;       // | |lambda| - 1 | band for unitarity decisions
    double cluster_tol = 1e-8;    // single-linkage eigenvalue clustering, relative to ||M||
    double rank_tol = 1e-8;       // SVD rank threshold, relative to the leading singular value
    double cond_cap = 1e12;       // IllConditioned above this
    double basis_cond_cap = 1e8;  // structural validation cap for assembled eigenbases
    double fixed_tol = 1e-8;      // chordal residual accepted for "fixed point"
    double null_band = 1e-9;      // |<v,v>| <= null_band*||v||^2 counts as null
    long max_order = 10000;       // finite-order search cap (continued-fraction denominator)
};

struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Inputs that violate a precondition or fail to parse. CLI exit code 2.
struct ValidationError : Error {
    using Error::Error;
};

// Computations that failed numerically (ill conditioning, exhausted search
// budgets, certificate checks that did not close). CLI exit code 3.
struct NumericalError : Error {
    using Error::Error;
};

#define PROJDYN_VALIDATION_ERROR(NAME)            \
    struct NAME : ValidationError {               \
        explicit NAME(const std::string& w = #NAME) : ValidationError(w) {} \
    }
#define PROJDYN_NUMERICAL_ERROR(NAME)             \
    struct NAME : NumericalError {                \
        explicit NAME(const std::string& w = #NAME) : NumericalError(w) {} \
    }

PROJDYN_VALIDATION_ERROR(SingularInput);
PROJDYN_VALIDATION_ERROR(AmbientMismatch);
PROJDYN_VALIDATION_ERROR(ZeroVector);
PROJDYN_VALIDATION_ERROR(ZeroSubspace);
PROJDYN_VALIDATION_ERROR(NonUnitarySpectrum);
PROJDYN_VALIDATION_ERROR(NotFixed);
PROJDYN_VALIDATION_ERROR(CoincidentPoints);
PROJDYN_VALIDATION_ERROR(NotInPU);
PROJDYN_VALIDATION_ERROR(NotHermitian);
PROJDYN_VALIDATION_ERROR(NotNegativeType);
PROJDYN_VALIDATION_ERROR(SizeTooSmall);
PROJDYN_VALIDATION_ERROR(NotParabolic);
PROJDYN_VALIDATION_ERROR(NotLoxodromic);
PROJDYN_VALIDATION_ERROR(BadK);
PROJDYN_VALIDATION_ERROR(WrongKind);
PROJDYN_VALIDATION_ERROR(MissingCertificate);
PROJDYN_VALIDATION_ERROR(EmptyInput);

PROJDYN_NUMERICAL_ERROR(IllConditioned);
PROJDYN_NUMERICAL_ERROR(CertificateCheckFailed);
PROJDYN_NUMERICAL_ERROR(CertificateSearchFailed);
PROJDYN_NUMERICAL_ERROR(NoConvergenceWithinBudget);

#undef PROJDYN_VALIDATION_ERROR
#undef PROJDYN_NUMERICAL_ERROR

}  // namespace projdyn
