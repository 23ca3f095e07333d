#include "projdyn/classification.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>

namespace projdyn {

namespace {

bool is_scalar_matrix(const Matrix& m, double tol) {
    const int n = static_cast<int>(m.rows());
    cxd mean = m.diagonal().mean();
    return (m - mean * Matrix::Identity(n, n)).norm() <= tol * std::max(1.0, m.norm());
}

// Best rational approximation p/q of x with q <= max_den, by continued
// fractions. Returns q if |x - p/q| <= err_tol, else nullopt.
std::optional<long> rational_denominator(double x, long max_den, double err_tol) {
    long p0 = 1, q0 = 0;  // convergent h_{-1}
    long p1 = static_cast<long>(std::floor(x)), q1 = 1;
    double frac = x - std::floor(x);
    for (int iter = 0; iter < 64; ++iter) {
        if (std::abs(x - static_cast<double>(p1) / static_cast<double>(q1)) <= err_tol) return q1;
        if (frac < 1e-15) break;
        double inv = 1.0 / frac;
        long a = static_cast<long>(std::floor(inv));
        frac = inv - std::floor(inv);
        long p2 = a * p1 + p0, q2 = a * q1 + q0;
        if (q2 > max_den || q2 <= 0) break;
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
    }
    if (std::abs(x - static_cast<double>(p1) / static_cast<double>(q1)) <= err_tol) return q1;
    return std::nullopt;
}

long lcm_capped(long a, long b, long cap) {
    long g = std::gcd(a, b);
    long l = a / g;
    if (l > cap / b) return cap + 1;  // overflow guard against the cap
    return l * b;
}

}  // namespace

const char* kind_name(Kind k) {
    switch (k) {
        case Kind::Elliptic: return "elliptic";
        case Kind::Parabolic: return "parabolic";
        case Kind::Loxodromic: return "loxodromic";
    }
    return "?";
}

ClassificationResult classify(const SLMatrix& g, const Tolerances& tol) {
    EigenStructure es = eigen_structure(g, tol);
    ClassificationResult out;
    out.condition_estimate = es.condition_estimate;
    out.diagonalizable = es.diagonalizable();

    bool all_unit = true;
    for (const auto& c : es.eigenvalues) {
        double m = std::abs(c.value);
        out.moduli.push_back(m);
        double dist = std::abs(m - 1.0);
        if (dist > tol.unit_tol) all_unit = false;
        if (dist >= 0.5 * tol.unit_tol && dist <= 2.0 * tol.unit_tol) out.marginal = true;
    }
    if (!all_unit)
        out.kind = Kind::Loxodromic;
    else if (out.diagonalizable)
        out.kind = Kind::Elliptic;
    else
        out.kind = Kind::Parabolic;

    if (out.kind == Kind::Elliptic && is_scalar_matrix(g.matrix(), 1e-10))
        out.finite_order = 1;
    return out;
}

OrderDetection finite_order(const SLMatrix& g, long max_order, const Tolerances& tol) {
    OrderDetection out{std::nullopt, false};
    ClassificationResult cls = classify(g, tol);
    if (cls.kind != Kind::Elliptic) return out;

    Eigen::ComplexEigenSolver<Matrix> es(g.matrix(), false);
    Vector vals = es.eigenvalues();
    cxd base = vals(0);
    long l = 1;
    bool all_rational = true;
    for (int i = 1; i < vals.size(); ++i) {
        double theta = std::arg(vals(i) / base) / (2.0 * M_PI);  // in (-1/2, 1/2]
        auto q = rational_denominator(theta, max_order, 1e-9);
        if (!q) {
            all_rational = false;
            break;
        }
        l = lcm_capped(l, *q, max_order);
        if (l > max_order) break;
    }
    out.ratios_rational = all_rational && l <= max_order;
    if (!out.ratios_rational) return out;

    // cross-validate the claimed order by one direct power
    Matrix p = g.power(l).matrix();
    if (is_scalar_matrix(p, 1e-8)) out.order = l;
    return out;
}

ClassificationResult line_restriction_class(const SLMatrix& g, const Vector& x, const Vector& y,
                                            const Tolerances& tol) {
    if (x.norm() == 0.0 || y.norm() == 0.0) throw ZeroVector("line_restriction_class: zero lift");
    if (chordal_distance(x, y) <= 1e-10) throw CoincidentPoints();
    const Matrix& m = g.matrix();
    if (chordal_distance(m * x, x) > tol.fixed_tol) throw NotFixed("x is not fixed by g");
    if (chordal_distance(m * y, y) > tol.fixed_tol) throw NotFixed("y is not fixed by g");

    // fixed projective points are eigendirections; the restriction to the
    // lift plane is diagonal in the (x, y) frame
    cxd mu_x = (x.adjoint() * m * x)(0, 0) / (x.adjoint() * x)(0, 0);
    cxd mu_y = (y.adjoint() * m * y)(0, 0) / (y.adjoint() * y)(0, 0);
    Matrix r(2, 2);
    r << mu_x, cxd(0, 0), cxd(0, 0), mu_y;
    return classify(normalize_to_sl(r, tol.det_tol), tol);
}

Matrix pu_form_matrix(int k, int l) {
    Matrix j = Matrix::Identity(k + l, k + l);
    for (int i = 0; i < k; ++i) j(i, i) = cxd(-1, 0);
    return j;
}

bool preserves_form(const SLMatrix& g, int k, int l, double tol) {
    if (k + l != g.size()) throw AmbientMismatch("preserves_form: k + l must equal the matrix size");
    Matrix j = pu_form_matrix(k, l);
    Matrix z = g.matrix().adjoint() * j * g.matrix();
    cxd c = (z * j).trace() / static_cast<double>(k + l);
    if (std::abs(std::abs(c) - 1.0) > tol) return false;
    return (z - c * j).norm() <= tol * std::max(1.0, z.norm());
}

PUClassification classify_pu(const SLMatrix& g, int k, int l, const Tolerances& tol) {
    if (!preserves_form(g, k, l, 1e-8)) throw NotInPU("matrix does not preserve the (k,l) form projectively");
    Matrix j = pu_form_matrix(k, l);
    EigenStructure es = eigen_structure(g, tol);
    const Matrix& m = g.matrix();

    // fixed-point data: per eigenvalue cluster, the eigenvector space and
    // the Hermitian form restricted to it
    struct FixedSpace {
        cxd value;
        Matrix vecs;            // orthonormal basis of ker(m - value I)
        Eigen::VectorXd fvals;  // eigenvalues of the restricted form
        Matrix fvecs;
    };
    std::vector<FixedSpace> fixed;
    for (const auto& c : es.eigenvalues) {
        Matrix shifted = m - c.value * Matrix::Identity(g.size(), g.size());
        KernelImage ki = kernel_image(shifted, tol.rank_tol);
        if (ki.kernel.dim() == 0) continue;
        FixedSpace fs;
        fs.value = c.value;
        fs.vecs = ki.kernel.basis();
        Matrix f = fs.vecs.adjoint() * j * fs.vecs;
        Eigen::SelfAdjointEigenSolver<Matrix> saes((f + f.adjoint()) / 2.0);
        fs.fvals = saes.eigenvalues();
        fs.fvecs = saes.eigenvectors();
        fixed.push_back(std::move(fs));
    }
    if (fixed.empty()) throw IllConditioned("classify_pu: no fixed points found");

    PUClassification out;
    out.k = k;
    out.l = l;

    // loxodromic first: a pair of boundary fixed points whose line
    // restriction is loxodromic, i.e. eigendirections with distinct moduli.
    // The extreme-modulus eigenvectors are automatically null. (Some
    // loxodromic elements of U(k,l) with k >= 2 also fix interior points,
    // so this clause takes precedence over the interior test.)
    const FixedSpace* lo = nullptr;
    const FixedSpace* hi = nullptr;
    for (const auto& fs : fixed) {
        if (!lo || std::abs(fs.value) < std::abs(lo->value)) lo = &fs;
        if (!hi || std::abs(fs.value) > std::abs(hi->value)) hi = &fs;
    }
    if (std::abs(std::abs(hi->value) - std::abs(lo->value)) > tol.unit_tol) {
        out.kind = Kind::Loxodromic;
        out.fixed_point_witness = (hi->vecs.col(0)).normalized();
        double w = std::abs((out.fixed_point_witness.adjoint() * j * out.fixed_point_witness)(0, 0));
        if (w > 1e-6) throw IllConditioned("loxodromic witness is not null type");
        return out;
    }

    // elliptic: some fixed point strictly inside the ball
    double best_neg = 0.0;
    Vector best_vec;
    for (const auto& fs : fixed) {
        for (int i = 0; i < fs.fvals.size(); ++i) {
            if (fs.fvals(i) < best_neg - tol.null_band) {
                best_neg = fs.fvals(i);
                best_vec = fs.vecs * fs.fvecs.col(i);
            }
        }
    }
    if (best_neg < -tol.null_band) {
        out.kind = Kind::Elliptic;
        out.fixed_point_witness = best_vec.normalized();
        return out;
    }

    // parabolic: all fixed points on the boundary; report a null witness
    out.kind = Kind::Parabolic;
    for (const auto& fs : fixed) {
        // a directly null direction of the restricted form
        for (int i = 0; i < fs.fvals.size(); ++i) {
            if (std::abs(fs.fvals(i)) <= tol.null_band * 10) {
                out.fixed_point_witness = (fs.vecs * fs.fvecs.col(i)).normalized();
                return out;
            }
        }
        // otherwise combine a positive and a negative direction
        int ip = -1, in = -1;
        for (int i = 0; i < fs.fvals.size(); ++i) {
            if (fs.fvals(i) > tol.null_band && ip < 0) ip = i;
            if (fs.fvals(i) < -tol.null_band && in < 0) in = i;
        }
        if (ip >= 0 && in >= 0) {
            Vector vpos = fs.vecs * fs.fvecs.col(ip);
            Vector vneg = fs.vecs * fs.fvecs.col(in);
            Vector w = std::sqrt(-fs.fvals(in)) * vpos + std::sqrt(fs.fvals(ip)) * vneg;
            out.fixed_point_witness = w.normalized();
            return out;
        }
    }
    throw IllConditioned("classify_pu: no null fixed witness found for a boundary element");
}

}  // namespace projdyn
