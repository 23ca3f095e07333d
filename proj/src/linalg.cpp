#include "projdyn/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

namespace projdyn {

namespace {

double condition_of(const Matrix& m) {
    if (m.cols() == 0) return 1.0;
    Eigen::JacobiSVD<Matrix> svd(m);
    double smin = svd.singularValues()(svd.singularValues().size() - 1);
    double smax = svd.singularValues()(0);
    if (smin <= 0.0) return std::numeric_limits<double>::infinity();
    return smax / smin;
}

}  // namespace

Subspace::Subspace(int ambient_dim, Matrix orthonormal_basis)
    : ambient_(ambient_dim), basis_(std::move(orthonormal_basis)) {
    if (basis_.rows() != ambient_) throw AmbientMismatch("basis rows do not match ambient dimension");
}

Subspace Subspace::from_span(const Matrix& span, double rank_tol) {
    const int ambient = static_cast<int>(span.rows());
    if (span.cols() == 0) return zero(ambient);
    Eigen::JacobiSVD<Matrix> svd(span, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    double cutoff = rank_tol * (sv.size() > 0 ? sv(0) : 0.0);
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > cutoff) ++rank;
    return Subspace(ambient, svd.matrixU().leftCols(rank));
}

Subspace Subspace::full(int ambient_dim) {
    return Subspace(ambient_dim, Matrix::Identity(ambient_dim, ambient_dim));
}

Subspace Subspace::zero(int ambient_dim) {
    return Subspace(ambient_dim, Matrix(ambient_dim, 0));
}

bool Subspace::contains_vector(const Vector& v, double tol) const {
    double nv = v.norm();
    if (nv == 0.0) return true;
    Vector residual = v - basis_ * (basis_.adjoint() * v);
    return residual.norm() <= tol * nv;
}

bool Subspace::contains(const Subspace& other, double tol) const {
    if (other.dim() == 0) return true;
    if (other.dim() > dim()) return false;
    Matrix residual = other.basis_ - basis_ * (basis_.adjoint() * other.basis_);
    return residual.norm() <= tol * std::sqrt(static_cast<double>(other.dim()));
}

Subspace Subspace::apply(const Matrix& m) const {
    return from_span(m * basis_);
}

Subspace Subspace::orthogonal_complement() const {
    if (dim() == 0) return full(ambient_);
    if (dim() == ambient_) return zero(ambient_);
    Eigen::JacobiSVD<Matrix> svd(basis_, Eigen::ComputeFullU);
    return Subspace(ambient_, svd.matrixU().rightCols(ambient_ - dim()));
}

Subspace Subspace::span_union(const std::vector<Subspace>& parts, double rank_tol) {
    if (parts.empty()) throw EmptyInput("span_union of nothing");
    int ambient = parts.front().ambient_dim();
    int total = 0;
    for (const auto& p : parts) {
        if (p.ambient_dim() != ambient) throw AmbientMismatch("span_union ambient mismatch");
        total += p.dim();
    }
    Matrix stacked(ambient, total);
    int c = 0;
    for (const auto& p : parts) {
        stacked.middleCols(c, p.dim()) = p.basis();
        c += p.dim();
    }
    return from_span(stacked, rank_tol);
}

Subspace Subspace::intersection(const Subspace& a, const Subspace& b, double rank_tol) {
    if (a.ambient_dim() != b.ambient_dim()) throw AmbientMismatch("intersection ambient mismatch");
    if (a.dim() == 0 || b.dim() == 0) return zero(a.ambient_dim());
    // null space of [A | -B] gives coefficient pairs with A x = B y.
    Matrix stacked(a.ambient_dim(), a.dim() + b.dim());
    stacked.leftCols(a.dim()) = a.basis();
    stacked.rightCols(b.dim()) = -b.basis();
    Eigen::JacobiSVD<Matrix> svd(stacked, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    int null_dim = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) <= rank_tol * sv(0)) ++null_dim;
    // columns of stacked may be fewer than rows; fullV has size cols x cols
    int cols = a.dim() + b.dim();
    Matrix coeff = svd.matrixV().rightCols(std::min(null_dim, cols));
    Matrix inside = a.basis() * coeff.topRows(a.dim());
    return from_span(inside, 1e-9);
}

SubspaceDistance subspace_distance(const Subspace& a, const Subspace& b) {
    if (a.ambient_dim() != b.ambient_dim()) throw AmbientMismatch("subspace_distance ambient mismatch");
    SubspaceDistance out;
    out.dims_differ = a.dim() != b.dim();
    const Subspace& small = a.dim() <= b.dim() ? a : b;
    const Subspace& large = a.dim() <= b.dim() ? b : a;
    if (small.dim() == 0) {
        out.angle = 0.0;
        return out;
    }
    // sine route: accurate for tiny angles where 1 - cos underflows
    Matrix residual = small.basis() - large.basis() * (large.basis().adjoint() * small.basis());
    Eigen::JacobiSVD<Matrix> svd(residual);
    double s = std::clamp(svd.singularValues()(0), 0.0, 1.0);
    out.angle = std::asin(s);
    return out;
}

SLMatrix::SLMatrix(Matrix entries, double det_tol) : mat_(std::move(entries)), det_tol_(det_tol) {
    if (mat_.rows() != mat_.cols() || mat_.rows() < 2)
        throw ValidationError("SLMatrix must be square with size >= 2");
    if (!mat_.allFinite()) throw ValidationError("SLMatrix entries must be finite");
    cxd det = mat_.determinant();
    if (std::abs(det - cxd(1.0, 0.0)) > std::max(det_tol_, 1e-6))
        throw ValidationError("SLMatrix determinant is not 1; use normalize_to_sl");
}

SLMatrix SLMatrix::inverse() const {
    Matrix inv = mat_.inverse();
    // determinant of the inverse is 1 up to roundoff; re-normalize to be safe
    return normalize_to_sl(inv, det_tol_);
}

SLMatrix SLMatrix::power(long m) const {
    const int n = size();
    if (m == 0) return SLMatrix(Matrix::Identity(n, n), det_tol_);
    Matrix base = m > 0 ? mat_ : mat_.inverse();
    unsigned long e = static_cast<unsigned long>(m > 0 ? m : -m);
    Matrix acc = Matrix::Identity(n, n);
    while (e > 0) {
        if (e & 1UL) acc = acc * base;
        base = base * base;
        e >>= 1UL;
    }
    return normalize_to_sl(acc, std::max(det_tol_, 1e-8));
}

SLMatrix normalize_to_sl(const Matrix& m, double det_tol) {
    if (m.rows() != m.cols() || m.rows() < 2)
        throw ValidationError("normalize_to_sl needs a square matrix of size >= 2");
    if (!m.allFinite()) throw ValidationError("normalize_to_sl: non-finite entries");
    cxd det = m.determinant();
    if (std::abs(det) <= det_tol) throw SingularInput("normalize_to_sl: |det| below tolerance");
    const double n = static_cast<double>(m.rows());
    // principal n-th root: argument lands in (-pi/n, pi/n]
    cxd root = std::polar(std::pow(std::abs(det), 1.0 / n), std::arg(det) / n);
    return SLMatrix(m / root, det_tol);
}

bool EigenStructure::diagonalizable() const {
    for (const auto& c : eigenvalues)
        if (c.max_chain > 1 || c.geometric != c.algebraic) return false;
    return true;
}

int EigenStructure::ambient_dim() const {
    int total = 0;
    for (const auto& c : eigenvalues) total += c.algebraic;
    return total;
}

Matrix EigenStructure::restriction(const Matrix& m, int i) const {
    const Matrix& q = generalized_eigenspaces[static_cast<size_t>(i)].basis();
    return q.adjoint() * m * q;
}

namespace {

// Swap the diagonal entries at positions p, p+1 of the upper triangular T by
// a unitary similarity, accumulating into U.
void schur_swap(Matrix& t, Matrix& u, int p) {
    cxd a = t(p, p), b = t(p, p + 1), c = t(p + 1, p + 1);
    cxd v0 = b, v1 = c - a;
    double nv = std::sqrt(std::norm(v0) + std::norm(v1));
    if (nv <= 1e-300 || std::abs(v1) <= 1e-300 * std::max(1.0, std::abs(v0))) {
        // eigenvalues (numerically) equal: swapping is a no-op semantically
        std::swap(t(p, p), t(p + 1, p + 1));
        return;
    }
    cxd g0 = v0 / nv, g1 = v1 / nv;
    Eigen::Matrix2cd g;
    g << g0, -std::conj(g1), g1, std::conj(g0);
    t.middleRows(p, 2) = g.adjoint() * t.middleRows(p, 2);
    t.middleCols(p, 2) = t.middleCols(p, 2) * g;
    u.middleCols(p, 2) = u.middleCols(p, 2) * g;
    t(p + 1, p) = cxd(0, 0);
}

// Reorder the Schur form so the selected diagonal positions come first.
// Returns the permuted (T, U); selection indices refer to the input order.
void schur_select_front(Matrix& t, Matrix& u, std::vector<int> selected) {
    std::sort(selected.begin(), selected.end());
    int target = 0;
    for (int idx : selected) {
        for (int p = idx; p > target; --p) schur_swap(t, u, p - 1);
        ++target;
    }
}

struct ClusterLevel {
    std::vector<std::vector<int>> clusters;  // index groups into the eigenvalue list
    double threshold;
};

// Single-linkage merge levels, from the base threshold upward through the
// distinct merge distances.
std::vector<ClusterLevel> linkage_levels(const std::vector<cxd>& vals, double base_threshold) {
    const int n = static_cast<int>(vals.size());
    std::vector<double> merge_dists;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) merge_dists.push_back(std::abs(vals[i] - vals[j]));
    std::sort(merge_dists.begin(), merge_dists.end());
    std::vector<double> thresholds{base_threshold};
    for (double d : merge_dists)
        if (d > thresholds.back()) thresholds.push_back(d * (1.0 + 1e-12) + 1e-300);

    auto cluster_at = [&](double thr) {
        std::vector<int> parent(n);
        std::iota(parent.begin(), parent.end(), 0);
        std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (std::abs(vals[i] - vals[j]) <= thr) parent[find(i)] = find(j);
        std::vector<std::vector<int>> groups(n);
        for (int i = 0; i < n; ++i) groups[static_cast<size_t>(find(i))].push_back(i);
        std::vector<std::vector<int>> out;
        for (auto& g : groups)
            if (!g.empty()) out.push_back(std::move(g));
        return out;
    };

    std::vector<ClusterLevel> levels;
    size_t last_count = static_cast<size_t>(n) + 1;
    for (double thr : thresholds) {
        auto cl = cluster_at(thr);
        if (cl.size() == last_count) continue;  // no new merge happened
        last_count = cl.size();
        levels.push_back({std::move(cl), thr});
        if (last_count == 1) break;
    }
    return levels;
}

int rank_with_threshold(const Matrix& m, double abs_threshold) {
    if (m.rows() == 0 || m.cols() == 0) return 0;
    Eigen::JacobiSVD<Matrix> svd(m);
    int r = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > abs_threshold) ++r;
    return r;
}

// Exact radix-2 diagonal balancing (Parlett-Reinsch). Equalizes row and
// column norms without rounding error; the Weyr analysis of restricted
// blocks would otherwise drown in the large Schur couplings of strongly
// conjugated inputs.
Matrix balance_exact(Matrix a) {
    const int n = static_cast<int>(a.rows());
    bool converged = false;
    int guard = 0;
    while (!converged && guard++ < 50) {
        converged = true;
        for (int i = 0; i < n; ++i) {
            double c = 0.0, r = 0.0;
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                c += std::abs(a(j, i));
                r += std::abs(a(i, j));
            }
            if (c == 0.0 || r == 0.0) continue;
            double f = 1.0;
            const double s = c + r;
            while (c < r / 2.0) {
                c *= 2.0;
                r /= 2.0;
                f *= 2.0;
            }
            while (c > r * 2.0) {
                c /= 2.0;
                r *= 2.0;
                f /= 2.0;
            }
            if (c + r < 0.95 * s) {
                converged = false;
                a.col(i) *= f;
                a.row(i) /= f;
            }
        }
    }
    return a;
}

struct ClusterStructure {
    EigenvalueCluster data;
    Subspace space;
    bool valid;
};

// Extract one cluster's generalized eigenspace through Schur reordering and
// validate its Weyr/chain structure.
ClusterStructure analyze_cluster(const Matrix& schur_t, const Matrix& schur_u,
                                 const std::vector<int>& indices, double norm_m,
                                 const Tolerances& tol) {
    ClusterStructure out;
    out.valid = true;
    const int n = static_cast<int>(schur_t.rows());
    const int a = static_cast<int>(indices.size());
    Matrix t = schur_t, u = schur_u;
    schur_select_front(t, u, indices);
    Matrix q = u.leftCols(a);
    Matrix r = t.topLeftCorner(a, a);
    cxd mu = r.diagonal().mean();
    Matrix nil = balance_exact(r - mu * Matrix::Identity(a, a));
    double spread = 0.0;
    for (int i = 0; i < a; ++i) spread = std::max(spread, std::abs(r(i, i) - mu));
    (void)norm_m;

    // Weyr sequence by the restriction staircase: w_p is the kernel
    // dimension of nil restricted to its successive images. Rank decisions
    // happen on the original operator (never its powers), so the noise a
    // defective cluster leaks stays at spread scale at every stage.
    std::vector<int> weyr;
    Matrix stage = nil;
    int unwound = 0;
    for (int p = 1; p <= a && stage.rows() > 0; ++p) {
        double thr = tol.rank_tol * std::max(1.0, stage.norm());
        if (p >= 2) thr = std::max(thr, 10.0 * spread);
        Eigen::JacobiSVD<Matrix> svd(stage, Eigen::ComputeThinU);
        int rank = 0;
        for (int i = 0; i < svd.singularValues().size(); ++i)
            if (svd.singularValues()(i) > thr) ++rank;
        int w = static_cast<int>(stage.rows()) - rank;
        if (w <= 0) {
            out.valid = false;  // stage not nilpotent: not a single cluster
            break;
        }
        weyr.push_back(w);
        unwound += w;
        Matrix im = svd.matrixU().leftCols(rank);
        stage = im.adjoint() * stage * im;
        if (rank == 0) break;
    }
    if (unwound != a) out.valid = false;
    for (size_t p = 1; p < weyr.size(); ++p)
        if (weyr[p] > weyr[p - 1]) out.valid = false;  // Weyr must be nonincreasing
    out.data.value = mu;
    out.data.algebraic = a;
    out.data.geometric = (out.valid && !weyr.empty()) ? weyr.front() : 0;
    out.data.max_chain = out.valid ? std::max<int>(1, static_cast<int>(weyr.size())) : 1;
    out.space = Subspace(n, q);
    return out;
}

}  // namespace

EigenStructure eigen_structure_of(const Matrix& m, const Tolerances& tol) {
    if (m.rows() != m.cols() || m.rows() < 1)
        throw ValidationError("eigen_structure needs a square matrix");
    const int n = static_cast<int>(m.rows());
    const double norm_m = m.norm();

    Eigen::ComplexSchur<Matrix> schur(m, true);
    if (schur.info() != Eigen::Success) throw IllConditioned("Schur decomposition failed");
    Matrix t = schur.matrixT();
    Matrix u = schur.matrixU();
    std::vector<cxd> vals(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) vals[static_cast<size_t>(i)] = t(i, i);

    auto levels = linkage_levels(vals, tol.cluster_tol * std::max(norm_m, 1e-300));

    // Evaluate every structurally consistent clustering level; among the
    // valid ones take the best-conditioned eigenbasis, preferring the finest
    // level when conditions are comparable. Spuriously split defective
    // clusters produce nearly parallel eigenvectors and lose this contest.
    std::vector<EigenStructure> valid;
    for (size_t li = 0; li < levels.size(); ++li) {
        EigenStructure cand;
        cand.cluster_level = static_cast<int>(li);
        bool all_valid = true;
        for (const auto& idx : levels[li].clusters) {
            auto cs = analyze_cluster(t, u, idx, norm_m, tol);
            if (!cs.valid) {
                all_valid = false;
                break;
            }
            cand.eigenvalues.push_back(cs.data);
            cand.generalized_eigenspaces.push_back(cs.space);
        }
        if (!all_valid) continue;
        Matrix assembled(n, n);
        int c = 0;
        for (const auto& s : cand.generalized_eigenspaces) {
            assembled.middleCols(c, s.dim()) = s.basis();
            c += s.dim();
        }
        if (c != n) continue;
        double cond = condition_of(assembled);
        if (cond > tol.basis_cond_cap) continue;
        cand.condition_estimate = cond;
        valid.push_back(std::move(cand));
    }
    if (valid.empty()) throw IllConditioned("no structurally consistent eigenvalue clustering found");
    double cond_min = valid.front().condition_estimate;
    for (const auto& v : valid) cond_min = std::min(cond_min, v.condition_estimate);
    EigenStructure best;
    bool chosen = false;
    for (const auto& v : valid) {  // finest valid level within a factor 4 of the best condition
        if (v.condition_estimate <= 4.0 * cond_min) {
            best = v;
            chosen = true;
            break;
        }
    }
    if (!chosen) best = valid.front();

    // deterministic ordering by (modulus, argument)
    std::vector<int> order(best.eigenvalues.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int x, int y) {
        const auto &ex = best.eigenvalues[static_cast<size_t>(x)], &ey = best.eigenvalues[static_cast<size_t>(y)];
        double mx = std::abs(ex.value), my = std::abs(ey.value);
        if (std::abs(mx - my) > 1e-15) return mx < my;
        return std::arg(ex.value) < std::arg(ey.value);
    });
    EigenStructure sorted = best;
    for (size_t i = 0; i < order.size(); ++i) {
        sorted.eigenvalues[i] = best.eigenvalues[static_cast<size_t>(order[i])];
        sorted.generalized_eigenspaces[i] = best.generalized_eigenspaces[static_cast<size_t>(order[i])];
    }
    if (sorted.condition_estimate > tol.cond_cap)
        throw IllConditioned("eigenbasis condition estimate exceeds cap");
    return sorted;
}

EigenStructure eigen_structure(const SLMatrix& m, const Tolerances& tol) {
    return eigen_structure_of(m.matrix(), tol);
}

double spectral_radius(const Matrix& m) {
    if (m.rows() != m.cols()) throw ValidationError("spectral_radius needs a square matrix");
    if (m.rows() == 0) return 0.0;
    Eigen::ComplexEigenSolver<Matrix> es(m, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

KernelImage kernel_image(const Matrix& m, double rank_tol) {
    KernelImage out;
    const int rows = static_cast<int>(m.rows());
    const int cols = static_cast<int>(m.cols());
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    double cutoff = sv.size() > 0 ? rank_tol * sv(0) : 0.0;
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > cutoff) ++rank;
    out.kernel = Subspace(cols, svd.matrixV().rightCols(cols - rank));
    out.image = Subspace(rows, svd.matrixU().leftCols(rank));
    return out;
}

double chordal_distance(const Vector& x, const Vector& y) {
    double nx = x.norm(), ny = y.norm();
    if (nx == 0.0 || ny == 0.0) throw ZeroVector("chordal_distance of the zero vector");
    // sin of the angle, computed as the orthogonal residual so distances
    // near zero keep full precision
    Vector u = x / nx;
    Vector v = y / ny;
    cxd overlap = (v.adjoint() * u)(0, 0);
    double r = (u - v * overlap).norm();
    return std::min(r, 1.0);
}

double point_to_subspace_angle(const Vector& x, const Subspace& s) {
    double nx = x.norm();
    if (nx == 0.0) throw ZeroVector("point_to_subspace_angle of the zero vector");
    if (s.dim() == 0) return M_PI / 2;
    Vector u = x / nx;
    double r = (u - s.basis() * (s.basis().adjoint() * u)).norm();
    return std::asin(std::clamp(r, 0.0, 1.0));
}

}  // namespace projdyn
