#pragma once

#include <optional>
#include <vector>

#include "projdyn/linalg.hpp"

namespace projdyn {

// One block of the split of a lift by eigenvalue modulus: gamma has unitary
// spectrum, the restriction of the lift to `space` equals radius * gamma in
// the orthonormal basis of `space`.
struct UnitaryBlock {
    Subspace space;
    Matrix action;  // unit-spectrum restriction, in space.basis() coordinates
    double radius;
};

struct UnitaryDecomposition {
    std::vector<UnitaryBlock> blocks;  // radius strictly ascending
    int ambient = 0;

    int k() const { return static_cast<int>(blocks.size()); }
    // Columns of all block bases concatenated, bottom radius first.
    Matrix assembled_basis() const;
    // || g - B diag(r_j gamma_j) B^{-1} || / ||g||
    double reconstruction_residual(const Matrix& g) const;
};

UnitaryDecomposition unitary_decomposition(const SLMatrix& g, const Tolerances& tol = {});

// One block of the split of a unitary-spectrum operator into a unit scalar
// times the identity or a unipotent Jordan block. For Jordan blocks `chain`
// holds the chain basis beta_j, eigenvector (bottom) first; for identity
// blocks it holds an orthonormal basis of the merged eigenspace.
struct JordanChainBlock {
    bool is_identity;
    cxd eigenvalue;  // unit modulus
    Matrix chain;    // ambient x dim

    int dim() const { return static_cast<int>(chain.cols()); }
};

struct BlockDecomposition {
    std::vector<JordanChainBlock> blocks;  // sorted by (dim desc, arg asc)
    int ambient = 0;

    int k() const { return static_cast<int>(blocks.size()); }
    Matrix assembled_basis() const;
    // Block-diagonal matrix diag(lambda_j * gamma_j) in the assembled basis.
    Matrix assembled_action() const;
    double reconstruction_residual(const Matrix& t) const;
};

BlockDecomposition block_decomposition(const Matrix& t, const Tolerances& tol = {});

// k(v,T): per non-identity block, index of the highest nonzero chain
// coordinate of the block component of v, minus one; the max over blocks.
int k_index(const Vector& v, const Matrix& t, const Tolerances& tol = {});
int k_index(const Vector& v, const BlockDecomposition& dec, const Tolerances& tol = {});

// H(T) and Xi(T): the maximal non-identity block dimension, and the span of
// every chain-basis vector except the top vector of each maximal
// non-identity block. xi is absent exactly when H < 2.
struct XiData {
    int height = 0;
    std::optional<Subspace> xi;
};

XiData height_and_xi(const Matrix& t, const Tolerances& tol = {});
XiData height_and_xi(const BlockDecomposition& dec);

}  // namespace projdyn
