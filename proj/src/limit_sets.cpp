#include "projdyn/limit_sets.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "dd_matrix.hpp"

namespace projdyn {

namespace {

std::string basis_bytes(const Subspace& s) {
    std::ostringstream os;
    os.precision(12);
    const Matrix& b = s.basis();
    for (int j = 0; j < b.cols(); ++j)
        for (int i = 0; i < b.rows(); ++i) os << b(i, j).real() << ',' << b(i, j).imag() << ';';
    return os.str();
}

// eigenvector span of a unit-spectrum operator in ambient coordinates:
// bottom chain vectors of Jordan blocks plus full identity blocks
Subspace eigenvector_span(const BlockDecomposition& dec) {
    std::vector<Vector> cols;
    for (const auto& blk : dec.blocks) {
        if (blk.is_identity)
            for (int i = 0; i < blk.dim(); ++i) cols.push_back(blk.chain.col(i));
        else
            cols.push_back(blk.chain.col(0));
    }
    Matrix span(dec.ambient, static_cast<int>(cols.size()));
    for (size_t i = 0; i < cols.size(); ++i) span.col(static_cast<int>(i)) = cols[i];
    return Subspace::from_span(span, 1e-9);
}

// Xi of a unitary-decomposition block, mapped to ambient coordinates.
std::optional<Subspace> block_xi_ambient(const UnitaryBlock& blk, int ambient, const Tolerances& tol) {
    BlockDecomposition dec = block_decomposition(blk.action, tol);
    XiData xd = height_and_xi(dec);
    if (!xd.xi) return std::nullopt;
    Matrix lifted = blk.space.basis() * xd.xi->basis();
    (void)ambient;
    return Subspace::from_span(lifted, 1e-9);
}

}  // namespace

SubspaceUnion SubspaceUnion::normalized(std::vector<Subspace> parts) {
    // drop components contained in another
    std::vector<Subspace> kept;
    for (size_t i = 0; i < parts.size(); ++i) {
        if (parts[i].dim() == 0) continue;
        bool dominated = false;
        for (size_t j = 0; j < parts.size() && !dominated; ++j) {
            if (i == j) continue;
            if (parts[j].dim() > parts[i].dim() && parts[j].contains(parts[i], 1e-8)) dominated = true;
            if (parts[j].dim() == parts[i].dim() && j < i && parts[j].contains(parts[i], 1e-8)) dominated = true;
        }
        if (!dominated) kept.push_back(parts[i]);
    }
    std::sort(kept.begin(), kept.end(), [](const Subspace& a, const Subspace& b) {
        if (a.dim() != b.dim()) return a.dim() < b.dim();
        return basis_bytes(a) < basis_bytes(b);
    });
    SubspaceUnion u;
    u.components = std::move(kept);
    return u;
}

LimitSet lambda_set(const SLMatrix& g, const Tolerances& tol) {
    ClassificationResult cls = classify(g, tol);
    if (cls.kind == Kind::Elliptic) {
        OrderDetection od = finite_order(g, tol.max_order, tol);
        return od.order ? LimitSet::empty_set() : LimitSet::whole_space();
    }
    UnitaryDecomposition ud = unitary_decomposition(g, tol);
    std::vector<Subspace> comps;
    for (const auto& blk : ud.blocks) {
        BlockDecomposition local = block_decomposition(blk.action, tol);
        Subspace local_span = eigenvector_span(local);
        comps.push_back(Subspace::from_span(blk.space.basis() * local_span.basis(), 1e-9));
    }
    return LimitSet::proper(SubspaceUnion::normalized(std::move(comps)));
}

LimitSet equicontinuity_complement(const SLMatrix& g, const Tolerances& tol) {
    ClassificationResult cls = classify(g, tol);
    if (cls.kind == Kind::Elliptic) return LimitSet::empty_set();

    UnitaryDecomposition ud = unitary_decomposition(g, tol);
    const int k = ud.k();
    const int n = g.size();

    std::vector<Subspace> term1_parts, term2_parts;
    for (int j = 1; j < k; ++j) term1_parts.push_back(ud.blocks[static_cast<size_t>(j)].space);
    if (auto xi = block_xi_ambient(ud.blocks.front(), n, tol)) term1_parts.push_back(*xi);
    for (int j = 0; j < k - 1; ++j) term2_parts.push_back(ud.blocks[static_cast<size_t>(j)].space);
    if (auto xi = block_xi_ambient(ud.blocks.back(), n, tol)) term2_parts.push_back(*xi);

    std::vector<Subspace> comps;
    if (!term1_parts.empty()) comps.push_back(Subspace::span_union(term1_parts, 1e-9));
    if (!term2_parts.empty()) comps.push_back(Subspace::span_union(term2_parts, 1e-9));
    return LimitSet::proper(SubspaceUnion::normalized(std::move(comps)));
}

LimitSet kulkarni_limit_set(const SLMatrix& g, const Tolerances& tol) {
    ClassificationResult cls = classify(g, tol);
    if (cls.kind == Kind::Elliptic) {
        OrderDetection od = finite_order(g, tol.max_order, tol);
        return od.order ? LimitSet::empty_set() : LimitSet::whole_space();
    }
    return equicontinuity_complement(g, tol);
}

std::optional<MaximalRegions> maximal_regions(const SLMatrix& g, const Tolerances& tol) {
    ClassificationResult cls = classify(g, tol);
    if (cls.kind == Kind::Elliptic) return std::nullopt;
    UnitaryDecomposition ud = unitary_decomposition(g, tol);
    const int k = ud.k();
    if (k <= 3) return std::nullopt;
    if (ud.blocks.front().radius >= 1.0) return std::nullopt;

    MaximalRegions mr;
    std::vector<Subspace> tail;  // <U_{j>2} V_j>
    for (int j = 2; j < k; ++j) tail.push_back(ud.blocks[static_cast<size_t>(j)].space);
    mr.omega1_complement =
        SubspaceUnion::normalized({ud.blocks.front().space, Subspace::span_union(tail, 1e-9)});

    std::vector<Subspace> head;  // <U_{j<k} V_j>
    for (int j = 0; j < k - 1; ++j) head.push_back(ud.blocks[static_cast<size_t>(j)].space);
    mr.omega2_complement =
        SubspaceUnion::normalized({ud.blocks.back().space, Subspace::span_union(head, 1e-9)});
    return mr;
}

namespace {

// Entry-normalize: divide by the entry of largest modulus (first such in
// row-major order among ties), making it exactly 1.
std::pair<Matrix, std::pair<int, int>> entry_normalize(const Matrix& m) {
    int bi = 0, bj = 0;
    double best = -1.0;
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j)
            if (std::abs(m(i, j)) > best * (1.0 + 1e-12)) {
                best = std::abs(m(i, j));
                bi = i;
                bj = j;
            }
    if (best <= 0.0) throw NumericalError("entry_normalize of the zero matrix");
    return {m / m(bi, bj), {bi, bj}};
}

// Neville extrapolation to x = 0 of matrix samples at x_t = 1/t.
Matrix neville_limit(const std::vector<Matrix>& samples, const std::vector<double>& xs) {
    std::vector<Matrix> p = samples;
    const size_t n = p.size();
    for (size_t level = 1; level < n; ++level)
        for (size_t i = 0; i + level < n; ++i) {
            double xi = xs[i], xj = xs[i + level];
            p[i] = (p[i + 1] * xi - p[i] * xj) / (xi - xj);
        }
    return p[0];
}

}  // namespace

PseudoProjectiveMap power_limit(const SLMatrix& g, Direction dir, long stride, long max_m,
                                double conv_tol, const Tolerances& tol) {
    ClassificationResult cls = classify(g, tol);
    if (cls.kind == Kind::Elliptic) {
        OrderDetection od = finite_order(g, tol.max_order, tol);
        if (od.order) throw ValidationError("power_limit: elliptic element of finite order has no proper limit");
    }
    const int n = g.size();
    Matrix base = dir == Direction::Forward ? g.matrix() : g.inverse().matrix();

    // dominant modulus class and its relative phases
    EigenStructure es = eigen_structure_of(base, tol);
    double rmax = 0.0;
    for (const auto& c : es.eigenvalues) rmax = std::max(rmax, std::abs(c.value));
    std::vector<double> phases;
    for (const auto& c : es.eigenvalues)
        if (std::abs(c.value) >= rmax * (1.0 - 10 * tol.unit_tol)) phases.push_back(std::arg(c.value));
    std::vector<double> rel;
    for (double p : phases) {
        double d = p - phases.front();
        rel.push_back(d);
    }

    double phase_defect = 0.0;
    if (stride <= 0) {
        auto defect_of = [&](long s) {
            double worst = 0.0;
            for (double th : rel) {
                double a = std::fmod(th * static_cast<double>(s), 2.0 * M_PI);
                worst = std::max(worst, std::abs(std::sin(a / 2.0)) * 2.0);  // |e^{ia} - 1|
            }
            return worst;
        };
        stride = 1;
        phase_defect = defect_of(1);
        for (long s = 1; s <= max_m && phase_defect > 1e-13; ++s) {
            double d = defect_of(s);
            if (d < phase_defect) {
                phase_defect = d;
                stride = s;
            }
        }
    } else {
        for (double th : rel) {
            double a = std::fmod(th * static_cast<double>(stride), 2.0 * M_PI);
            phase_defect = std::max(phase_defect, std::abs(std::sin(a / 2.0)) * 2.0);
        }
    }

    // sample A_t = normalize(base^{stride * q * t}) for t = 1..T
    const int T = 14;
    const long q = std::max(1L, 512L / std::max(stride, 1L));
    // total phase drift over the largest exponent must stay below tolerance
    if (phase_defect * static_cast<double>(q * T) > 10 * std::max(conv_tol, 1e-12))
        throw NoConvergenceWithinBudget("power_limit: dominant phases do not recur within the stride budget");

    std::vector<long> exponents;
    for (int t = 1; t <= T; ++t) exponents.push_back(stride * q * t);
    std::vector<Matrix> samples = detail::dd_scheduled_powers(base, exponents);
    std::vector<double> xs;
    for (int t = 1; t <= T; ++t) xs.push_back(1.0 / static_cast<double>(t));

    // consistent pivot from the final sample
    auto [last_norm, pivot] = entry_normalize(samples.back());
    (void)last_norm;
    for (auto& s : samples) {
        cxd p = s(pivot.first, pivot.second);
        if (std::abs(p) < 1e-14) throw NoConvergenceWithinBudget("power_limit: normalization pivot vanished");
        s /= p;
    }

    PseudoProjectiveMap out;
    out.stride = stride;
    out.phase_defect = phase_defect;

    double raw_gap = (samples[static_cast<size_t>(T - 1)] - samples[static_cast<size_t>(T - 2)])
                         .cwiseAbs()
                         .maxCoeff();
    Matrix limit;
    if (raw_gap <= conv_tol) {
        // geometric convergence: the samples themselves are Cauchy
        limit = samples.back();
        out.cauchy_residual = raw_gap;
    } else {
        // polynomial tail (Jordan parts): extrapolate in 1/t and require the
        // last two window extrapolants to agree
        const size_t window = 8;
        Matrix prev, curr;
        for (size_t w = window; w <= static_cast<size_t>(T); ++w) {
            std::vector<Matrix> win(samples.begin() + static_cast<long>(w - window),
                                    samples.begin() + static_cast<long>(w));
            std::vector<double> wx(xs.begin() + static_cast<long>(w - window),
                                   xs.begin() + static_cast<long>(w));
            Matrix e = neville_limit(win, wx);
            prev = (w == window) ? e : curr;
            curr = e;
        }
        double cauchy = (curr - prev).cwiseAbs().maxCoeff();
        if (!(cauchy <= conv_tol))
            throw NoConvergenceWithinBudget("power_limit: extrapolants did not become Cauchy");
        limit = curr;
        out.cauchy_residual = cauchy;
    }

    auto [normalized, piv2] = entry_normalize(limit);
    (void)piv2;
    out.matrix = normalized;
    KernelImage ki = kernel_image(out.matrix, tol.rank_tol);
    out.kernel = ki.kernel;
    out.image = ki.image;
    return out;
}

LimitSetReport limit_report(const SLMatrix& g, const Tolerances& tol) {
    LimitSetReport rep;
    rep.classification = classify(g, tol);
    rep.order = finite_order(g, tol.max_order, tol);
    rep.lambda = lambda_set(g, tol);
    rep.eq_complement = equicontinuity_complement(g, tol);
    rep.kulkarni = kulkarni_limit_set(g, tol);
    rep.maximal = maximal_regions(g, tol);
    if (rep.classification.marginal)
        rep.warnings.push_back("marginal unitarity: some eigenvalue modulus sits near the decision band");
    if (rep.classification.kind != Kind::Elliptic)
        rep.warnings.push_back(
            "kulkarni set computed as the equicontinuity complement; strictly larger proper-discontinuity "
            "regions can exist (see maximal_regions)");
    return rep;
}

}  // namespace projdyn
