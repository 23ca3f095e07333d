#include "projdyn/decomposition.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numeric>

namespace projdyn {

namespace {

Matrix pinv_solve(const Matrix& a, const Matrix& b, double rank_tol) {
    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    double cutoff = sv.size() > 0 ? rank_tol * sv(0) : 0.0;
    Matrix sinv = Matrix::Zero(sv.size(), sv.size());
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > cutoff) sinv(i, i) = cxd(1.0 / sv(i), 0.0);
    return svd.matrixV() * sinv * svd.matrixU().adjoint() * b;
}

Subspace null_space(const Matrix& m, double abs_threshold) {
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const int cols = static_cast<int>(m.cols());
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > abs_threshold) ++rank;
    return Subspace(cols, svd.matrixV().rightCols(cols - rank));
}

Subspace column_space(const Matrix& m, double abs_threshold) {
    if (m.cols() == 0) return Subspace::zero(static_cast<int>(m.rows()));
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > abs_threshold) ++rank;
    return Subspace(static_cast<int>(m.rows()), svd.matrixU().leftCols(rank));
}

// Jordan chains of the nilpotent (to noise) matrix N, eigenvector first.
// Returns one chain per Jordan block, longest first.
std::vector<Matrix> nilpotent_chains(const Matrix& n_mat, double scale, const Tolerances& tol) {
    const int a = static_cast<int>(n_mat.rows());
    if (a == 0) return {};
    auto thr_at = [&](int p) { return tol.rank_tol * std::pow(std::max(1.0, scale), p); };

    std::vector<Matrix> powers{Matrix::Identity(a, a)};
    std::vector<int> nulldims{0};
    int s = 0;
    for (int p = 1; p <= a; ++p) {
        powers.push_back(powers.back() * n_mat);
        Subspace ker = null_space(powers.back(), thr_at(p));
        nulldims.push_back(ker.dim());
        if (ker.dim() == a) {
            s = p;
            break;
        }
    }
    if (s == 0) throw IllConditioned("chain extraction: matrix is not nilpotent at tolerance");
    // Weyr: w_p = dim ker N^p - dim ker N^{p-1} = number of blocks of size >= p
    std::vector<int> w(static_cast<size_t>(s) + 2, 0);
    for (int p = 1; p <= s; ++p)
        w[static_cast<size_t>(p)] = nulldims[static_cast<size_t>(p)] - nulldims[static_cast<size_t>(p - 1)];

    Subspace ker1 = null_space(n_mat, thr_at(1));
    std::vector<Matrix> chains;
    Matrix used(a, 0);  // eigenvectors already commanding a chain
    for (int p = s; p >= 1; --p) {
        int count = w[static_cast<size_t>(p)] - (p + 1 <= s ? w[static_cast<size_t>(p + 1)] : 0);
        if (count <= 0) continue;
        // eigenvectors that can sit at the bottom of a size-p chain
        Subspace reach = column_space(powers[static_cast<size_t>(p - 1)], thr_at(p - 1));
        Subspace candidates = p == 1 ? ker1 : Subspace::intersection(ker1, reach, 1e-7);
        // remove eigenvectors already used by longer chains
        Matrix cand = candidates.basis();
        if (used.cols() > 0) {
            Subspace used_s = Subspace::from_span(used);
            cand = cand - used_s.basis() * (used_s.basis().adjoint() * cand);
        }
        Subspace fresh = Subspace::from_span(cand, 1e-7);
        if (fresh.dim() < count)
            throw IllConditioned("Jordan chain extraction: eigenvector selection degenerate");
        for (int c = 0; c < count; ++c) {
            Vector bottom = fresh.basis().col(c);
            Matrix chain(a, p);
            if (p == 1) {
                chain.col(0) = bottom;
            } else {
                // top vector from one least-squares solve N^{p-1} t = bottom,
                // intermediates by exact application of N
                Matrix t = pinv_solve(powers[static_cast<size_t>(p - 1)], bottom, 1e-10);
                double residual = (powers[static_cast<size_t>(p - 1)] * t - bottom).norm();
                if (residual > 1e-8 * std::max(1.0, bottom.norm()))
                    throw IllConditioned("Jordan chain solve residual too large");
                for (int i = 0; i < p; ++i) chain.col(i) = powers[static_cast<size_t>(p - 1 - i)] * t;
            }
            // scale so the eigenvector has unit norm
            chain /= chain.col(0).norm();
            chains.push_back(chain);
            Matrix nu(a, used.cols() + 1);
            nu.leftCols(used.cols()) = used;
            nu.col(used.cols()) = chain.col(0).normalized();
            used = nu;
        }
    }
    return chains;
}

}  // namespace

Matrix UnitaryDecomposition::assembled_basis() const {
    Matrix b(ambient, ambient);
    int c = 0;
    for (const auto& blk : blocks) {
        b.middleCols(c, blk.space.dim()) = blk.space.basis();
        c += blk.space.dim();
    }
    return b;
}

double UnitaryDecomposition::reconstruction_residual(const Matrix& g) const {
    Matrix b = assembled_basis();
    Matrix d = Matrix::Zero(ambient, ambient);
    int c = 0;
    for (const auto& blk : blocks) {
        d.block(c, c, blk.space.dim(), blk.space.dim()) = blk.radius * blk.action;
        c += blk.space.dim();
    }
    Matrix rec = b * d * b.inverse();
    return (rec - g).norm() / std::max(g.norm(), 1e-300);
}

UnitaryDecomposition unitary_decomposition(const SLMatrix& g, const Tolerances& tol) {
    EigenStructure es = eigen_structure(g, tol);
    const int n = g.size();

    // group clusters by modulus, single linkage with unit_tol
    const size_t nc = es.eigenvalues.size();
    std::vector<int> group(nc, -1);
    std::vector<double> moduli(nc);
    for (size_t i = 0; i < nc; ++i) moduli[i] = std::abs(es.eigenvalues[i].value);
    int ng = 0;
    // clusters are sorted by modulus already; sweep and cut on gaps
    for (size_t i = 0; i < nc; ++i) {
        if (i > 0 && moduli[i] - moduli[i - 1] <= tol.unit_tol)
            group[i] = group[i - 1];
        else
            group[i] = ng++;
    }

    UnitaryDecomposition out;
    out.ambient = n;
    for (int gi = 0; gi < ng; ++gi) {
        std::vector<Subspace> spaces;
        double rsum = 0.0;
        int count = 0;
        for (size_t i = 0; i < nc; ++i) {
            if (group[i] != gi) continue;
            spaces.push_back(es.generalized_eigenspaces[i]);
            rsum += moduli[i] * es.eigenvalues[i].algebraic;
            count += es.eigenvalues[i].algebraic;
        }
        UnitaryBlock blk;
        blk.space = Subspace::span_union(spaces, 1e-9);
        blk.radius = rsum / count;
        if (blk.space.dim() != count)
            throw IllConditioned("unitary decomposition: modulus-class span is rank deficient");
        const Matrix& q = blk.space.basis();
        blk.action = (q.adjoint() * g.matrix() * q) / blk.radius;
        out.blocks.push_back(std::move(blk));
    }
    std::sort(out.blocks.begin(), out.blocks.end(),
              [](const UnitaryBlock& x, const UnitaryBlock& y) { return x.radius < y.radius; });
    return out;
}

Matrix BlockDecomposition::assembled_basis() const {
    Matrix b(ambient, ambient);
    int c = 0;
    for (const auto& blk : blocks) {
        b.middleCols(c, blk.dim()) = blk.chain;
        c += blk.dim();
    }
    return b;
}

Matrix BlockDecomposition::assembled_action() const {
    Matrix d = Matrix::Zero(ambient, ambient);
    int c = 0;
    for (const auto& blk : blocks) {
        const int s = blk.dim();
        Matrix j = Matrix::Identity(s, s);
        if (!blk.is_identity)
            for (int i = 0; i + 1 < s; ++i) j(i, i + 1) = cxd(1, 0);
        d.block(c, c, s, s) = blk.eigenvalue * j;
        c += s;
    }
    return d;
}

double BlockDecomposition::reconstruction_residual(const Matrix& t) const {
    Matrix b = assembled_basis();
    Matrix rec = b * assembled_action() * b.inverse();
    return (rec - t).norm() / std::max(t.norm(), 1e-300);
}

BlockDecomposition block_decomposition(const Matrix& t, const Tolerances& tol) {
    EigenStructure es = eigen_structure_of(t, tol);
    for (const auto& c : es.eigenvalues)
        if (std::abs(std::abs(c.value) - 1.0) > tol.unit_tol)
            throw NonUnitarySpectrum("block_decomposition requires all eigenvalue moduli equal to 1");

    const int n = static_cast<int>(t.rows());
    BlockDecomposition out;
    out.ambient = n;
    for (size_t ci = 0; ci < es.eigenvalues.size(); ++ci) {
        const cxd lambda = es.eigenvalues[ci].value / std::abs(es.eigenvalues[ci].value);
        const Matrix& q = es.generalized_eigenspaces[ci].basis();
        const int a = static_cast<int>(q.cols());
        Matrix restricted = q.adjoint() * t * q;
        Matrix nil = restricted / lambda - Matrix::Identity(a, a);
        auto chains = nilpotent_chains(nil, t.norm(), tol);

        Matrix identity_part(n, 0);
        for (const auto& ch : chains) {
            if (ch.cols() == 1) {
                Matrix grown(n, identity_part.cols() + 1);
                grown.leftCols(identity_part.cols()) = identity_part;
                grown.col(identity_part.cols()) = q * ch.col(0);
                identity_part = grown;
            } else {
                JordanChainBlock blk;
                blk.is_identity = false;
                blk.eigenvalue = lambda;
                blk.chain = q * ch;
                out.blocks.push_back(std::move(blk));
            }
        }
        if (identity_part.cols() > 0) {
            JordanChainBlock blk;
            blk.is_identity = true;
            blk.eigenvalue = lambda;
            blk.chain = Subspace::from_span(identity_part, 1e-9).basis();
            if (blk.chain.cols() != identity_part.cols())
                throw IllConditioned("identity-block basis is rank deficient");
            out.blocks.push_back(std::move(blk));
        }
    }
    std::sort(out.blocks.begin(), out.blocks.end(), [](const JordanChainBlock& x, const JordanChainBlock& y) {
        if (x.dim() != y.dim()) return x.dim() > y.dim();
        return std::arg(x.eigenvalue) < std::arg(y.eigenvalue);
    });
    if (out.reconstruction_residual(t) > 1e-6)
        throw IllConditioned("block decomposition does not reproduce the operator");
    return out;
}

int k_index(const Vector& v, const BlockDecomposition& dec, const Tolerances& tol) {
    if (v.norm() == 0.0) throw ZeroVector("k_index of the zero vector");
    (void)tol;
    Matrix b = dec.assembled_basis();
    Vector coords = b.fullPivLu().solve(v);
    double scale = coords.cwiseAbs().maxCoeff();
    int best = 0;
    int offset = 0;
    for (const auto& blk : dec.blocks) {
        const int s = blk.dim();
        if (!blk.is_identity) {
            int top = 0;  // 1-based index of the highest nonzero chain coordinate
            for (int i = 0; i < s; ++i)
                if (std::abs(coords(offset + i)) > 1e-9 * scale) top = i + 1;
            if (top > 0) best = std::max(best, top - 1);
        }
        offset += s;
    }
    return best;
}

int k_index(const Vector& v, const Matrix& t, const Tolerances& tol) {
    return k_index(v, block_decomposition(t, tol), tol);
}

XiData height_and_xi(const BlockDecomposition& dec) {
    XiData out;
    for (const auto& blk : dec.blocks)
        if (!blk.is_identity) out.height = std::max(out.height, blk.dim());
    if (out.height < 2) return out;
    std::vector<Vector> cols;
    for (const auto& blk : dec.blocks) {
        const int keep = (!blk.is_identity && blk.dim() == out.height) ? blk.dim() - 1 : blk.dim();
        for (int i = 0; i < keep; ++i) cols.push_back(blk.chain.col(i));
    }
    Matrix span(dec.ambient, static_cast<int>(cols.size()));
    for (size_t i = 0; i < cols.size(); ++i) span.col(static_cast<int>(i)) = cols[i];
    out.xi = Subspace::from_span(span, 1e-9);
    return out;
}

XiData height_and_xi(const Matrix& t, const Tolerances& tol) {
    return height_and_xi(block_decomposition(t, tol));
}

}  // namespace projdyn
