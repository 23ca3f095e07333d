#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "projdyn/linalg.hpp"

namespace projdyn {

// The k-th compound matrix: entries are k x k minors of the source, rows and
// columns indexed by sorted k-subsets in lexicographic order.
struct WedgeOperator {
    int source_dim = 0;
    int k = 0;
    Matrix matrix;
    std::vector<std::vector<int>> subsets;  // lex-ordered index sets
};

WedgeOperator wedge_power(const Matrix& m, int k);

// Plucker coordinates of a subspace: the wedge of any basis, one coordinate
// per lex-ordered subset of rows.
Vector plucker_embed(const Subspace& s);

// Chordal Fubini-Study distance between points of the projectivized wedge
// space (the Grassmannian metric used throughout).
double grassmann_chordal(const Vector& p, const Vector& q);

struct AttractingPoint {
    Vector point;        // eigendirection of the dominant simple eigenvalue
    double spectral_gap;  // |lambda_1| - |lambda_2|
};

std::optional<AttractingPoint> attracting_point(const Matrix& m, double tol = 1e-8);

// Constructive witness that g is loxodromic: the dominant block of the
// unitary decomposition gives an attracting decomposable point in the
// Grassmannian, a certified contraction ball around it, and a projective
// point outside the union of all lines in the ball.
//
// The ball lives in the Fubini-Study metric of an adapted inner product
// <x,y> = <frame^{-1} x, frame^{-1} y>: the frame straightens the
// generalized eigenspaces (with chain rescaling), which makes a single
// application of g contract near the attractor. Ball constructions, margins
// and the witness distance are all measured in that metric.
struct LoxodromicCertificate {
    int grassmann_k = 0;            // subspace dimension minus one
    Subspace attracting_subspace;   // lift of the attracting point (original coordinates)
    Vector attracting_point;        // its Plucker coordinates (original coordinates)
    Matrix frame;                   // adapting basis F
    double radius = 0;              // certified ball radius (adapted chordal metric)
    double contraction_margin = 0;  // min over boundary samples of radius - d(image, center)
    int boundary_samples = 0;
    Vector excluded_witness;        // projective point outside W (original coordinates)
    double witness_margin = 0;      // min sampled distance from the witness to lines of the ball
};

LoxodromicCertificate loxodromic_certificate(const SLMatrix& g, const Tolerances& tol = {},
                                             int samples = 32, std::uint64_t seed = 20240901u);

// One step of the induced dynamics on the Grassmannian: image subspace,
// re-orthonormalized.
Subspace grassmann_step(const Matrix& m, const Subspace& s);

}  // namespace projdyn
