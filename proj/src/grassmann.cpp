#include "projdyn/grassmann.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "projdyn/classification.hpp"
#include "projdyn/decomposition.hpp"

namespace projdyn {

namespace {

std::vector<std::vector<int>> lex_subsets(int n, int k) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur(static_cast<size_t>(k));
    for (int i = 0; i < k; ++i) cur[static_cast<size_t>(i)] = i;
    while (true) {
        out.push_back(cur);
        int i = k - 1;
        while (i >= 0 && cur[static_cast<size_t>(i)] == n - k + i) --i;
        if (i < 0) break;
        ++cur[static_cast<size_t>(i)];
        for (int j = i + 1; j < k; ++j) cur[static_cast<size_t>(j)] = cur[static_cast<size_t>(j - 1)] + 1;
    }
    return out;
}

Matrix submatrix(const Matrix& m, const std::vector<int>& rows, const std::vector<int>& cols) {
    Matrix out(rows.size(), cols.size());
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = 0; j < cols.size(); ++j)
            out(static_cast<int>(i), static_cast<int>(j)) =
                m(rows[i], cols[j]);
    return out;
}

}  // namespace

WedgeOperator wedge_power(const Matrix& m, int k) {
    if (m.rows() != m.cols()) throw ValidationError("wedge_power of a non-square matrix");
    const int n = static_cast<int>(m.rows());
    if (k < 1 || k > n) throw BadK("wedge_power needs 1 <= k <= dim");
    WedgeOperator out;
    out.source_dim = n;
    out.k = k;
    out.subsets = lex_subsets(n, k);
    const int d = static_cast<int>(out.subsets.size());
    out.matrix = Matrix(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            out.matrix(i, j) = submatrix(m, out.subsets[static_cast<size_t>(i)],
                                         out.subsets[static_cast<size_t>(j)]).determinant();
    return out;
}

Vector plucker_embed(const Subspace& s) {
    if (s.dim() < 1) throw ZeroSubspace("plucker_embed of the zero subspace");
    auto subsets = lex_subsets(s.ambient_dim(), s.dim());
    Vector p(static_cast<int>(subsets.size()));
    std::vector<int> all_cols(static_cast<size_t>(s.dim()));
    for (int i = 0; i < s.dim(); ++i) all_cols[static_cast<size_t>(i)] = i;
    for (size_t i = 0; i < subsets.size(); ++i)
        p(static_cast<int>(i)) = submatrix(s.basis(), subsets[i], all_cols).determinant();
    return p;
}

double grassmann_chordal(const Vector& p, const Vector& q) { return chordal_distance(p, q); }

std::optional<AttractingPoint> attracting_point(const Matrix& m, double tol) {
    if (m.rows() != m.cols()) throw ValidationError("attracting_point of a non-square matrix");
    Eigen::ComplexEigenSolver<Matrix> es(m, true);
    if (es.info() != Eigen::Success) return std::nullopt;
    const auto& vals = es.eigenvalues();
    int top = 0;
    for (int i = 1; i < vals.size(); ++i)
        if (std::abs(vals(i)) > std::abs(vals(top))) top = i;
    double second = -1.0;
    for (int i = 0; i < vals.size(); ++i)
        if (i != top) second = std::max(second, std::abs(vals(i)));
    if (vals.size() == 1) second = 0.0;
    double gap = std::abs(vals(top)) - second;
    if (gap <= tol * std::abs(vals(top))) return std::nullopt;
    AttractingPoint out;
    out.point = es.eigenvectors().col(top).normalized();
    out.spectral_gap = gap;
    return out;
}

Subspace grassmann_step(const Matrix& m, const Subspace& s) {
    return Subspace::from_span(m * s.basis());
}

namespace {

// A subspace at (approximately) the requested chordal distance from the
// center, in the tangent direction parametrized by X.
Subspace ball_point(const Subspace& center, const Matrix& tangent, double dist) {
    Vector p0 = plucker_embed(center).normalized();
    const Matrix q = center.basis();
    const Matrix qperp = center.orthogonal_complement().basis();
    double lo = 0.0, hi = 4.0;
    Subspace best = center;
    for (int it = 0; it < 60; ++it) {
        double t = 0.5 * (lo + hi);
        Subspace cand = Subspace::from_span(q + t * (qperp * tangent));
        double d = grassmann_chordal(plucker_embed(cand), p0);
        best = cand;
        if (std::abs(d - dist) <= 0.005 * dist) return cand;
        (d < dist ? lo : hi) = t;
    }
    return best;
}

}  // namespace

// The adapting basis: chain bases of every unitary block with chain vector
// i scaled by eps^i. In these coordinates g is block diagonal with blocks
// r_j (Lambda_j + eps-small nilpotent), so one application contracts the
// chordal neighborhood of the dominant coordinate block.
static Matrix adapted_frame(const SLMatrix& g, const UnitaryDecomposition& ud, double eps,
                            const Tolerances& tol) {
    const int n = g.size();
    Matrix f(n, n);
    int c = 0;
    for (const auto& blk : ud.blocks) {
        BlockDecomposition local = block_decomposition(blk.action, tol);
        for (const auto& jb : local.blocks) {
            Matrix chain = jb.chain;
            double s = 1.0;
            for (int i = 0; i < chain.cols(); ++i) {
                chain.col(i) *= s;
                if (!jb.is_identity) s *= eps;
            }
            f.middleCols(c, chain.cols()) = blk.space.basis() * chain;
            c += static_cast<int>(chain.cols());
        }
    }
    if (c != n) throw IllConditioned("adapted frame is incomplete");
    return f;
}

LoxodromicCertificate loxodromic_certificate(const SLMatrix& g, const Tolerances& tol, int samples,
                                             std::uint64_t seed) {
    ClassificationResult cls = classify(g, tol);
    if (cls.kind != Kind::Loxodromic) throw NotLoxodromic("loxodromic_certificate requires a loxodromic element");

    UnitaryDecomposition ud = unitary_decomposition(g, tol);
    const UnitaryBlock& top = ud.blocks.back();  // ascending radii: last block dominates
    const int nt = top.space.dim();
    const int n = g.size();

    LoxodromicCertificate cert;
    cert.grassmann_k = nt - 1;
    cert.attracting_subspace = top.space;
    cert.attracting_point = plucker_embed(top.space).normalized();
    cert.boundary_samples = samples;

    // the attracting point must be the dominant simple eigendirection of the
    // wedge power (decomposability is by construction)
    WedgeOperator w = wedge_power(g.matrix(), nt);
    auto ap = attracting_point(w.matrix, tol.unit_tol);
    if (!ap) throw CertificateSearchFailed("wedge power has no simple dominant eigenvalue");
    if (chordal_distance(ap->point, cert.attracting_point) > 1e-6)
        throw CertificateCheckFailed("dominant wedge eigendirection is not the dominant block");

    double ratio = ud.blocks[static_cast<size_t>(ud.k() - 2)].radius / top.radius;
    double eps = std::min(0.25, 0.25 * (1.0 - ratio) / (1.0 + ratio));
    cert.frame = adapted_frame(g, ud, eps, tol);
    Matrix finv = cert.frame.inverse();
    Matrix h = finv * g.matrix() * cert.frame;  // block diagonal, dominant block last

    // in frame coordinates the attractor is the last coordinate block
    Matrix top_frame = Matrix::Zero(n, nt);
    for (int i = 0; i < nt; ++i) top_frame(n - nt + i, i) = cxd(1, 0);
    Subspace center(n, top_frame);
    Vector center_p = plucker_embed(center).normalized();

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto random_tangent = [&]() {
        Matrix x(n - nt, nt);
        for (int i = 0; i < x.rows(); ++i)
            for (int j = 0; j < x.cols(); ++j) x(i, j) = cxd(gauss(rng), gauss(rng));
        return Matrix(x / x.norm());
    };

    // pre-draw tangents so every candidate radius tests the same directions
    std::vector<Matrix> tangents;
    for (int i = 0; i < samples; ++i) tangents.push_back(random_tangent());

    // tangent directions attach to the complement coordinates (the leading
    // n - nt axes in frame coordinates)
    auto margin_at = [&](double r) {
        double worst = std::numeric_limits<double>::infinity();
        for (const auto& x : tangents) {
            Subspace boundary = ball_point(center, x, r);
            double d0 = grassmann_chordal(plucker_embed(boundary), center_p);
            if (d0 < 0.9 * r) return -1.0;  // could not place the sample on the sphere
            Subspace image = grassmann_step(h, boundary);
            double d1 = grassmann_chordal(plucker_embed(image), center_p);
            worst = std::min(worst, r - d1);
        }
        return worst;
    };

    double lo = 0.0, hi = 0.65, best_r = 0.0, best_margin = 0.0;
    for (int it = 0; it < 18; ++it) {
        double r = (it == 0) ? hi : 0.5 * (lo + hi);
        double m = margin_at(r);
        if (m > 0) {
            best_r = r;
            best_margin = m;
            lo = r;
            if (it == 0) break;
        } else {
            hi = r;
        }
    }
    if (best_r <= 0.0) throw CertificateSearchFailed("no contracting Grassmannian ball radius found");
    cert.radius = best_r;
    cert.contraction_margin = best_margin;

    // witness outside W: a complement coordinate direction, pushed back to
    // the original coordinates
    Vector witness_frame = Vector::Zero(n);
    witness_frame(0) = cxd(1, 0);
    cert.excluded_witness = (cert.frame * witness_frame).normalized();
    double wmargin = std::numeric_limits<double>::infinity();
    for (const auto& x : tangents) {
        for (double f : {0.25, 0.5, 1.0}) {
            Subspace line = ball_point(center, x, f * best_r);
            wmargin = std::min(wmargin, std::sin(point_to_subspace_angle(witness_frame, line)));
        }
    }
    wmargin = std::min(wmargin, std::sin(point_to_subspace_angle(witness_frame, center)));
    cert.witness_margin = wmargin;
    if (!(wmargin > 0)) throw CertificateCheckFailed("excluded witness touches the sampled ball");
    return cert;
}

}  // namespace projdyn
