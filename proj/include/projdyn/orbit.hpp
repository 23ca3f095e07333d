#pragma once

#include <cstdint>
#include <vector>

#include "projdyn/hermitian.hpp"
#include "projdyn/limit_sets.hpp"

namespace projdyn {

struct OrbitSettings {
    int burn_in = 100;            // exponents <= burn_in are transient
    double cluster_radius = 1e-3;
};

struct ClusterPoint {
    Vector point;  // unit lift
    long count;
};

// The deterministic exponent schedule behind orbit_accumulate: an initial
// consecutive run followed by a geometric ladder, `iters` exponents per
// direction. Large exponents are reached by renormalized repeated squaring,
// so the group orbit is sampled deep into its tail.
std::vector<long> orbit_schedule(int iters);

struct OrbitRun {
    std::vector<Vector> seeds;
    int iterations = 0;
    std::vector<long> schedule;
    std::vector<ClusterPoint> cluster_points;
    long transients = 0;
    OrbitSettings settings;
};

OrbitRun orbit_accumulate(const SLMatrix& g, const std::vector<Vector>& seeds, int iters,
                          const OrbitSettings& settings = {});

// max over points of the angle to the nearest component of the union.
double hausdorff_to_union(const std::vector<Vector>& points, const SubspaceUnion& target);

// binom(m, k(v,T))^{-1} T^m v for m = 1..m_max (k computed from the block
// decomposition). Unnormalized vectors; callers inspect boundedness.
std::vector<Vector> normalized_block_orbit(const Matrix& t, const Vector& v, int m_max,
                                           const Tolerances& tol = {});

struct GreedySequence {
    std::vector<Vector> points;     // k_m = g^{-m}(z), unit lifts
    std::vector<double> residuals;  // chordal distance of g^m(k_m) from z
};

GreedySequence greedy_target_sequence(const SLMatrix& g, const Vector& z, int m_max);

enum class FoliationKind { EllipticSpheres, ParabolicQuadrics };

struct FoliationReport {
    FoliationKind kind;
    double max_leaf_drift = 0.0;
    int samples = 0;
    int w_locus_count = 0;  // samples where the quadric parameter is not solvable
};

// Elliptic: leaf functions r_j(w) = sum_{i != j} |w_i|^2 / |w_j|^2 in the
// conjugated frame, one foliation per coordinate. Parabolic: the solved
// quadric parameter r with Q_r(z) = 0 from the certificate family.
FoliationReport foliation_check(const SLMatrix& g, const SLMatrix& conjugator, FoliationKind kind,
                                int samples, std::uint64_t seed = 20240901u,
                                const Tolerances& tol = {});
FoliationReport foliation_check(const SLMatrix& g, const ParabolicCertificate& cert, int samples,
                                std::uint64_t seed = 20240901u, const Tolerances& tol = {});

}  // namespace projdyn
