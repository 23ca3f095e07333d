#pragma once

#include <optional>
#include <vector>

#include "projdyn/types.hpp"

namespace projdyn {

// A linear subspace of C^n held by an orthonormal basis. Projective content
// is the image of the nonzero vectors under the quotient map; we keep the
// lift. dim == 0 encodes the empty projective set.
class Subspace {
public:
    Subspace() : ambient_(0) {}
    Subspace(int ambient_dim, Matrix orthonormal_basis);

    // Orthonormalize the columns of `span` and drop directions below
    // rank_tol * (leading singular value).
    static Subspace from_span(const Matrix& span, double rank_tol = 1e-12);
    static Subspace full(int ambient_dim);
    static Subspace zero(int ambient_dim);

    int ambient_dim() const { return ambient_; }
    int dim() const { return static_cast<int>(basis_.cols()); }
    int projective_dim() const { return dim() - 1; }
    const Matrix& basis() const { return basis_; }

    bool contains_vector(const Vector& v, double tol = 1e-8) const;
    bool contains(const Subspace& other, double tol = 1e-8) const;
    // Image under an invertible map, re-orthonormalized.
    Subspace apply(const Matrix& m) const;
    Subspace orthogonal_complement() const;

    static Subspace span_union(const std::vector<Subspace>& parts, double rank_tol = 1e-12);
    static Subspace intersection(const Subspace& a, const Subspace& b, double rank_tol = 1e-9);

private:
    int ambient_;
    Matrix basis_;  // ambient_ x dim, orthonormal columns
};

struct SubspaceDistance {
    double angle = 0.0;   // largest principal angle (smaller space into larger)
    bool dims_differ = false;
};

SubspaceDistance subspace_distance(const Subspace& a, const Subspace& b);

// Determinant-1 lift of a projective transformation.
class SLMatrix {
public:
    explicit SLMatrix(Matrix entries, double det_tol = 1e-9);

    int size() const { return static_cast<int>(mat_.rows()); }
    const Matrix& matrix() const { return mat_; }
    double det_tol() const { return det_tol_; }
    SLMatrix inverse() const;
    SLMatrix power(long m) const;  // exact integer power, still determinant 1

private:
    Matrix mat_;
    double det_tol_;
};

// normalize_to_sl: M / det(M)^{1/n} with the principal n-th root
// (argument in (-pi/n, pi/n]), so the output is deterministic.
SLMatrix normalize_to_sl(const Matrix& m, double det_tol = 1e-9);

struct EigenvalueCluster {
    cxd value;        // cluster representative (mean)
    int algebraic;    // summed multiplicity
    int geometric;    // dim ker(M - value I), from the restricted nilpotent part
    int max_chain;    // largest Jordan block size in the cluster
};

struct EigenStructure {
    std::vector<EigenvalueCluster> eigenvalues;        // sorted by (|value|, arg)
    std::vector<Subspace> generalized_eigenspaces;     // parallel to eigenvalues
    double condition_estimate = 1.0;                   // of the assembled eigenbasis
    int cluster_level = 0;                             // merge-tree level actually used

    bool diagonalizable() const;
    int ambient_dim() const;
    // Restriction of the operator to generalized eigenspace i, in the
    // orthonormal basis of that subspace.
    Matrix restriction(const Matrix& m, int i) const;
};

EigenStructure eigen_structure(const SLMatrix& m, const Tolerances& tol = {});
// Same computation for matrices that are not determinant-normalized
// (the decomposition module feeds restricted blocks through this).
EigenStructure eigen_structure_of(const Matrix& m, const Tolerances& tol = {});

double spectral_radius(const Matrix& m);

struct KernelImage {
    Subspace kernel;
    Subspace image;
};

KernelImage kernel_image(const Matrix& m, double rank_tol = 1e-8);

// Chordal (Fubini-Study) distance between projective points,
// d([x],[y]) = sqrt(1 - |<x,y>|^2 / (|x|^2 |y|^2)).
double chordal_distance(const Vector& x, const Vector& y);
// Angle from a projective point to a projective subspace (arcsin of the
// chordal distance to the span).
double point_to_subspace_angle(const Vector& x, const Subspace& s);

}  // namespace projdyn
