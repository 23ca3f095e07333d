#pragma once

#include <utility>
#include <vector>

#include "projdyn/decomposition.hpp"
#include "projdyn/linalg.hpp"

namespace projdyn {

enum class SignType { Negative, Null, Positive };

struct FormValue {
    cxd value;
    SignType sign_of_u;
};

// <u,v>_{k,l} = -sum_{j<=k} u_j conj(v_j) + sum_{j>k} u_j conj(v_j),
// and the sign type of u with a relative null band.
FormValue form_value_and_sign(const Vector& u, const Vector& v, int k, int l, double tol = 1e-9);

struct Signature {
    int neg = 0, pos = 0, zero = 0;
    bool rigorous = false;  // Weyl bound: min |eig| > 2 * hermiticity defect
};

Signature signature(const Matrix& h, double tol = 1e-9);

// Hyperbolic-type distance on the projectivized negative cone,
// arccosh sqrt(<x,y><y,x> / (<x,x><y,y>)).
double distance_kl(const Vector& x, const Vector& y, int k, int l);

// Gaussian-integer matrix holding 2*C exactly (all family coefficients are
// half-integers).
using ExactMatrix = Eigen::Matrix<std::complex<long long>, Eigen::Dynamic, Eigen::Dynamic>;

// The invariant quadric family C_r = C0 + r*E for one unipotent Jordan
// block: E is rank one on the last basis vector, every C_r is preserved
// exactly by the block, and the signature is (k, k+1) for size 2k+1 and
// (k, k) for size 2k, independent of r.
struct HermitianFormFamily {
    Matrix base;       // C0
    Matrix direction;  // E = e_n e_n^*
    int jordan_size = 0;
    bool odd = false;
    ExactMatrix twice_base;  // 2*C0, exact

    Matrix at(double r) const { return base + r * direction; }
    std::pair<int, int> expected_signature() const;
};

HermitianFormFamily parabolic_form_family(int jordan_size);

// Exact check A^* (2 C_r) A == 2 C_r in Gaussian-integer arithmetic, with A
// the unipotent Jordan block and r running over integers.
bool family_invariance_exact(const HermitianFormFamily& fam, const std::vector<long long>& integer_rs);

struct ParabolicCertificate {
    Matrix base, direction;               // ambient-coordinate family C_r = base + r*direction
    std::pair<int, int> form_signature;   // (k, l)
    Subspace Z;                           // span of the fixed points of non-identity blocks
    Subspace W;                           // fixed hyperplanes + identity-block supports
    BlockDecomposition blocks;
    std::vector<HermitianFormFamily> block_families;  // per non-identity block, largest first

    Matrix at(double r) const { return base + r * direction; }
};

ParabolicCertificate parabolic_certificate(const SLMatrix& g, const Tolerances& tol = {});

}  // namespace projdyn
