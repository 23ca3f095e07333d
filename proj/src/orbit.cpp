#include "projdyn/orbit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "dd_matrix.hpp"

namespace projdyn {

std::vector<long> orbit_schedule(int iters) {
    if (iters < 1) throw ValidationError("orbit_accumulate needs iters >= 1");
    std::vector<long> out;
    const int linear = std::min(iters, std::max(iters / 2, 1));
    const int linear_run = std::min(linear, 64);
    for (long m = 1; m <= linear_run && static_cast<int>(out.size()) < iters; ++m) out.push_back(m);
    // geometric ladder out to ~2^40, deterministic in `iters`
    const int remaining = iters - static_cast<int>(out.size());
    if (remaining > 0) {
        double top = std::pow(2.0, 40);
        double base = static_cast<double>(out.empty() ? 1 : out.back());
        double ratio = std::pow(top / base, 1.0 / remaining);
        ratio = std::max(ratio, 1.0 + 1e-9);
        double cur = base;
        while (static_cast<int>(out.size()) < iters) {
            cur *= ratio;
            long next = std::max(out.back() + 1, static_cast<long>(std::llround(cur)));
            out.push_back(next);
            cur = static_cast<double>(next);
        }
    }
    return out;
}

namespace {

// powers g^{m} for every m in the (ascending) schedule, each renormalized to
// unit sup entry; compensated products keep deep parabolic powers accurate.
std::vector<Matrix> scheduled_powers(const Matrix& g, const std::vector<long>& schedule) {
    return detail::dd_scheduled_powers(g, schedule);
}

}  // namespace

OrbitRun orbit_accumulate(const SLMatrix& g, const std::vector<Vector>& seeds, int iters,
                          const OrbitSettings& settings) {
    OrbitRun run;
    run.seeds = seeds;
    run.iterations = iters;
    run.schedule = orbit_schedule(iters);
    run.settings = settings;

    auto fwd = scheduled_powers(g.matrix(), run.schedule);
    auto bwd = scheduled_powers(g.matrix().inverse(), run.schedule);

    // greedy radius-ball covering, deterministic in (seed, direction, m) order
    auto add_point = [&](const Vector& p) {
        for (auto& c : run.cluster_points) {
            if (chordal_distance(c.point, p) <= settings.cluster_radius) {
                ++c.count;
                return;
            }
        }
        run.cluster_points.push_back({p, 1});
    };

    for (const auto& seed : seeds) {
        if (seed.norm() == 0.0) throw ZeroVector("orbit_accumulate: zero seed");
        Vector s = seed.normalized();
        for (const auto* dir : {&fwd, &bwd}) {
            for (size_t i = 0; i < run.schedule.size(); ++i) {
                Vector it = ((*dir)[i] * s).normalized();
                if (run.schedule[i] <= settings.burn_in) {
                    ++run.transients;
                    continue;
                }
                add_point(it);
            }
        }
    }
    return run;
}

double hausdorff_to_union(const std::vector<Vector>& points, const SubspaceUnion& target) {
    if (points.empty() || target.components.empty())
        throw EmptyInput("hausdorff_to_union needs points and a nonempty union");
    double worst = 0.0;
    for (const auto& p : points) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& c : target.components) best = std::min(best, point_to_subspace_angle(p, c));
        worst = std::max(worst, best);
    }
    return worst;
}

std::vector<Vector> normalized_block_orbit(const Matrix& t, const Vector& v, int m_max,
                                           const Tolerances& tol) {
    if (v.norm() == 0.0) throw ZeroVector("normalized_block_orbit of the zero vector");
    const int k = k_index(v, t, tol);
    std::vector<Vector> out;
    out.reserve(static_cast<size_t>(m_max));
    Vector w = v;
    for (int m = 1; m <= m_max; ++m) {
        w = t * w;
        // binom(m,k)^{-1} = binom(m-1,k)^{-1} * (m-k)/m
        if (m > k) w *= static_cast<double>(m - k) / static_cast<double>(m);
        out.push_back(w);
    }
    return out;
}

GreedySequence greedy_target_sequence(const SLMatrix& g, const Vector& z, int m_max) {
    if (z.norm() == 0.0) throw ZeroVector("greedy_target_sequence: zero target");
    GreedySequence out;
    // binary powering (renormalized) keeps k_m = g^{-m}(z) and the forward
    // verification g^m(k_m) accurate in O(log m) products per step
    std::vector<long> ms;
    for (long m = 1; m <= m_max; ++m) ms.push_back(m);
    auto inv_powers = scheduled_powers(g.matrix().inverse(), ms);
    auto fwd_powers = scheduled_powers(g.matrix(), ms);
    Vector zn = z.normalized();
    for (size_t i = 0; i < ms.size(); ++i) {
        Vector k = (inv_powers[i] * zn).normalized();
        out.points.push_back(k);
        Vector f = fwd_powers[i] * k;
        out.residuals.push_back(chordal_distance(f, z));
    }
    return out;
}

namespace {

Vector random_unit(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vector v(n);
    for (int i = 0; i < n; ++i) v(i) = cxd(gauss(rng), gauss(rng));
    return v.normalized();
}

}  // namespace

FoliationReport foliation_check(const SLMatrix& g, const SLMatrix& conjugator, FoliationKind kind,
                                int samples, std::uint64_t seed, const Tolerances& tol) {
    if (kind == FoliationKind::ParabolicQuadrics) {
        ClassificationResult cls = classify(g, tol);
        if (cls.kind != Kind::Parabolic) throw WrongKind("parabolic-quadrics check needs a parabolic element");
        ParabolicCertificate cert;
        try {
            cert = parabolic_certificate(g, tol);
        } catch (const Error&) {
            throw MissingCertificate("could not build the parabolic certificate");
        }
        return foliation_check(g, cert, samples, seed, tol);
    }

    ClassificationResult cls = classify(g, tol);
    if (cls.kind != Kind::Elliptic) throw WrongKind("elliptic-spheres check needs an elliptic element");
    const int n = g.size();
    Matrix conj_inv = conjugator.matrix().inverse();
    Matrix d = conj_inv * g.matrix() * conjugator.matrix();
    Matrix off = d;
    off.diagonal().setZero();
    if (off.norm() > 1e-6 * d.norm())
        throw WrongKind("conjugator does not diagonalize the element");

    std::mt19937_64 rng(seed);
    FoliationReport rep;
    rep.kind = kind;
    rep.samples = samples;
    for (int s = 0; s < samples; ++s) {
        Vector w = random_unit(n, rng);
        // keep leaf values O(1): resample until every coordinate is tame
        int guard = 0;
        while (w.cwiseAbs().minCoeff() < 0.1 / std::sqrt(static_cast<double>(n)) && guard++ < 200)
            w = random_unit(n, rng);
        Vector dw = d * w;
        for (int j = 0; j < n; ++j) {
            double rj = (w.squaredNorm() - std::norm(w(j))) / std::norm(w(j));
            double rj2 = (dw.squaredNorm() - std::norm(dw(j))) / std::norm(dw(j));
            rep.max_leaf_drift = std::max(rep.max_leaf_drift, std::abs(rj2 - rj));
        }
    }
    return rep;
}

FoliationReport foliation_check(const SLMatrix& g, const ParabolicCertificate& cert, int samples,
                                std::uint64_t seed, const Tolerances& tol) {
    (void)tol;
    const int n = g.size();
    std::mt19937_64 rng(seed);
    FoliationReport rep;
    rep.kind = FoliationKind::ParabolicQuadrics;
    rep.samples = samples;
    auto qform = [](const Matrix& c, const Vector& z) { return (z.adjoint() * c * z)(0, 0).real(); };
    const double escale = std::max(cert.direction.norm(), 1e-300);
    for (int s = 0; s < samples; ++s) {
        Vector z = random_unit(n, rng);
        double e0 = qform(cert.direction, z);
        if (e0 <= 1e-3 * escale) {
            ++rep.w_locus_count;
            continue;
        }
        Vector gz = (g.matrix() * z).normalized();
        double e1 = qform(cert.direction, gz);
        if (e1 <= 1e-6 * escale) {
            ++rep.w_locus_count;
            continue;
        }
        double r0 = -qform(cert.base, z) / e0;
        double r1 = -qform(cert.base, gz) / e1;
        rep.max_leaf_drift = std::max(rep.max_leaf_drift, std::abs(r1 - r0));
    }
    return rep;
}

}  // namespace projdyn
