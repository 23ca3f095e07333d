#pragma once

#include <optional>
#include <string>
#include <vector>

#include "projdyn/classification.hpp"
#include "projdyn/decomposition.hpp"

namespace projdyn {

// A finite union of projective subspaces, normalized: no component contained
// in another, sorted by (dim, basis bytes) for deterministic output.
struct SubspaceUnion {
    std::vector<Subspace> components;

    static SubspaceUnion normalized(std::vector<Subspace> parts);
    bool empty() const { return components.empty(); }
};

enum class SetExtent { Empty, Proper, WholeSpace };

struct LimitSet {
    SetExtent extent = SetExtent::Empty;
    SubspaceUnion parts;  // meaningful only when extent == Proper

    static LimitSet empty_set() { return {SetExtent::Empty, {}}; }
    static LimitSet whole_space() { return {SetExtent::WholeSpace, {}}; }
    static LimitSet proper(SubspaceUnion u) { return {SetExtent::Proper, std::move(u)}; }
};

// Lambda(<g>): accumulation set of orbits, as the per-block eigenvector
// spans of the unitary decomposition. Empty for finite order; WholeSpace
// for elliptic of infinite order.
LimitSet lambda_set(const SLMatrix& g, const Tolerances& tol = {});

// P^n minus the equicontinuity region: the two-component union
// [<U_{j>1} V_j u Xi(gamma_1)>] u [<U_{j<k} V_j u Xi(gamma_k)>].
LimitSet equicontinuity_complement(const SLMatrix& g, const Tolerances& tol = {});

// Kulkarni limit set: Empty/WholeSpace for elliptic (finite/infinite
// order), otherwise equal to the equicontinuity complement.
LimitSet kulkarni_limit_set(const SLMatrix& g, const Tolerances& tol = {});

// Maximal discontinuity regions Omega_1, Omega_2, described by their
// complements (each exactly two components). Present only when the unitary
// decomposition has k > 3 blocks and r_1 < 1.
struct MaximalRegions {
    SubspaceUnion omega1_complement;
    SubspaceUnion omega2_complement;
};

std::optional<MaximalRegions> maximal_regions(const SLMatrix& g, const Tolerances& tol = {});

enum class Direction { Forward, Backward };

// Limit of g^{+-m} / (sup entry) along a phase-recurrent subsequence, as a
// pseudo-projective map with its kernel and image.
struct PseudoProjectiveMap {
    Matrix matrix;  // sup entry normalized to 1
    Subspace kernel;
    Subspace image;
    long stride = 1;             // subsequence stride actually used
    double phase_defect = 0.0;   // max |lambda^stride - 1| over dominant phases
    double cauchy_residual = 0;  // gap between the last two extrapolants
};

PseudoProjectiveMap power_limit(const SLMatrix& g, Direction dir, long stride = 0,
                                long max_m = 100000, double conv_tol = 1e-9,
                                const Tolerances& tol = {});

struct LimitSetReport {
    ClassificationResult classification;
    OrderDetection order;
    LimitSet lambda;
    LimitSet eq_complement;
    LimitSet kulkarni;
    std::optional<MaximalRegions> maximal;
    std::vector<std::string> warnings;
};

LimitSetReport limit_report(const SLMatrix& g, const Tolerances& tol = {});

}  // namespace projdyn
