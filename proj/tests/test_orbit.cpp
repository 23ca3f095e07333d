#include <doctest.h>

#include <random>

#include "projdyn/orbit.hpp"
#include "test_support.hpp"

using namespace projdyn;
using namespace projdyn::testing;

namespace {

Matrix diag(std::initializer_list<cxd> entries) {
    const int n = static_cast<int>(entries.size());
    Matrix m = Matrix::Zero(n, n);
    int i = 0;
    for (cxd e : entries) m(i, i) = e, ++i;
    return m;
}

Matrix jordan(int n, cxd lambda = cxd(1, 0)) {
    Matrix m = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        m(i, i) = lambda;
        if (i + 1 < n) m(i, i + 1) = cxd(1, 0);
    }
    return m;
}

Vector unit(int n, int i) {
    Vector v = Vector::Zero(n);
    v(i) = cxd(1, 0);
    return v;
}

}  // namespace

TEST_CASE("orbit of diag(2,1/2) accumulates on the two axes") {
    SLMatrix g = normalize_to_sl(diag({2.0, 0.5}));
    Vector seed(2);
    seed << cxd(1, 0), cxd(1, 0);
    OrbitRun run = orbit_accumulate(g, {seed.normalized()}, 200);
    REQUIRE(run.cluster_points.size() == 2);
    double d0 = std::min(chordal_distance(run.cluster_points[0].point, unit(2, 0)),
                         chordal_distance(run.cluster_points[0].point, unit(2, 1)));
    double d1 = std::min(chordal_distance(run.cluster_points[1].point, unit(2, 0)),
                         chordal_distance(run.cluster_points[1].point, unit(2, 1)));
    CHECK(d0 < 1e-9);
    CHECK(d1 < 1e-9);
}

TEST_CASE("orbit of the identity stays at the seeds") {
    SLMatrix g = normalize_to_sl(Matrix::Identity(3, 3));
    std::mt19937_64 rng(global_seed() + 60);
    std::vector<Vector> seeds{random_unit_vector(3, rng), random_unit_vector(3, rng)};
    OrbitRun run = orbit_accumulate(g, seeds, 150);
    REQUIRE(run.cluster_points.size() == 2);
    for (size_t i = 0; i < seeds.size(); ++i) {
        double best = 1e9;
        for (const auto& c : run.cluster_points) best = std::min(best, chordal_distance(c.point, seeds[i]));
        CHECK(best < 1e-12);
    }
}

TEST_CASE("orbit oracle: Jordan block clusters at [e1]") {
    SLMatrix g = normalize_to_sl(jordan(3));
    std::mt19937_64 rng(global_seed() + 61);
    std::vector<Vector> seeds;
    for (int i = 0; i < 100; ++i) seeds.push_back(random_unit_vector(3, rng));
    // oracle tuning: parabolic orbits creep at O(1/m), so the recurrent tail
    // starts deep; the geometric exponent ladder reaches it cheaply
    OrbitSettings tuned;
    tuned.burn_in = 1'000'000;
    OrbitRun run = orbit_accumulate(g, seeds, 400, tuned);
    LimitSet lam = lambda_set(g);
    REQUIRE(lam.extent == SetExtent::Proper);
    std::vector<Vector> pts;
    for (const auto& c : run.cluster_points) pts.push_back(c.point);
    CHECK(hausdorff_to_union(pts, lam.parts) < 1e-4);
}

TEST_CASE("orbit determinism") {
    SLMatrix g = normalize_to_sl(diag({2.0, 1.0, 0.5}));
    std::mt19937_64 rng(global_seed() + 62);
    std::vector<Vector> seeds{random_unit_vector(3, rng), random_unit_vector(3, rng)};
    OrbitRun a = orbit_accumulate(g, seeds, 300);
    OrbitRun b = orbit_accumulate(g, seeds, 300);
    REQUIRE(a.cluster_points.size() == b.cluster_points.size());
    for (size_t i = 0; i < a.cluster_points.size(); ++i) {
        CHECK((a.cluster_points[i].point - b.cluster_points[i].point).norm() == 0.0);
        CHECK(a.cluster_points[i].count == b.cluster_points[i].count);
    }
}

TEST_CASE("hausdorff_to_union examples") {
    Matrix line(3, 2);
    line << cxd(1, 0), cxd(0, 0), cxd(0, 0), cxd(1, 0), cxd(0, 0), cxd(0, 0);
    SubspaceUnion target = SubspaceUnion::normalized({Subspace(3, line)});
    Vector on(3);
    on << cxd(0.6, 0), cxd(0.8, 0), cxd(0, 0);
    CHECK(hausdorff_to_union({on}, target) < 1e-12);

    SubspaceUnion axes = SubspaceUnion::normalized(
        {Subspace(3, Matrix(unit(3, 0))), Subspace(3, Matrix(unit(3, 1)))});
    CHECK(hausdorff_to_union({unit(3, 2)}, axes) == doctest::Approx(M_PI / 2));

    Vector mix(3);
    mix << cxd(1 / std::sqrt(2.0), 0), cxd(0, 0), cxd(1 / std::sqrt(2.0), 0);
    SubspaceUnion e1only = SubspaceUnion::normalized({Subspace(3, Matrix(unit(3, 0)))});
    CHECK(hausdorff_to_union({mix}, e1only) == doctest::Approx(M_PI / 4));
    CHECK_THROWS_AS(hausdorff_to_union({}, axes), EmptyInput);
}

TEST_CASE("normalized block orbit: identity keeps v, Jordan tops stay bounded") {
    Vector v = unit(3, 0) * cxd(0.3, 0.1);
    auto seq = normalized_block_orbit(Matrix::Identity(3, 3), v, 50);
    for (const auto& w : seq) CHECK((w - v).norm() < 1e-12);

    // T = Jordan3, v = e3: k = 2, sequence bounded and clustering in span{e1}
    auto seq2 = normalized_block_orbit(jordan(3), unit(3, 2), 2000);
    double sup = 0.0;
    for (const auto& w : seq2) sup = std::max(sup, w.norm());
    CHECK(sup < 10.0);
    CHECK(seq2.back().norm() > 0.1);  // liminf > 0
    Vector tail = seq2.back().normalized();
    CHECK(chordal_distance(tail, unit(3, 0)) < 1e-2);

    // unit-phase Jordan2: bounded with cluster points in span{e1}
    auto seq3 = normalized_block_orbit(jordan(2, std::polar(1.0, 0.7)), unit(2, 1), 3000);
    sup = 0.0;
    for (const auto& w : seq3) sup = std::max(sup, w.norm());
    CHECK(sup < 10.0);
    CHECK(chordal_distance(seq3.back(), unit(2, 0)) < 1e-2);
    CHECK_THROWS_AS(normalized_block_orbit(jordan(2), Vector::Zero(2), 5), ZeroVector);
}

TEST_CASE("property: k_index controls boundedness (binomially normalized orbits)") {
    std::mt19937_64 rng(global_seed() + 63);
    for (int trial = 0; trial < 6; ++trial) {
        Matrix t = Matrix::Zero(4, 4);
        t.topLeftCorner(3, 3) = jordan(3, std::polar(1.0, 0.3));
        t(3, 3) = std::polar(1.0, -0.9);
        Vector v = random_unit_vector(4, rng);
        int k = k_index(v, t);
        auto seq = normalized_block_orbit(t, v, 1500);
        double sup = 0.0;
        for (const auto& w : seq) sup = std::max(sup, w.norm());
        CHECK(sup < 100.0);
        CHECK(seq.back().norm() > 1e-3);
        // cluster points lie in the eigenvector span: here span{e1, e4}
        Matrix espan(4, 2);
        espan << Matrix::Zero(4, 2);
        espan(0, 0) = cxd(1, 0);
        espan(3, 1) = cxd(1, 0);
        CHECK(point_to_subspace_angle(seq.back(), Subspace(4, espan)) < 1e-2);
        CHECK(k >= 0);
        CHECK(k <= 2);
    }
}

TEST_CASE("greedy target sequence: fixed point gives the constant sequence") {
    SLMatrix g = normalize_to_sl(diag({2.0, 0.5}));
    GreedySequence gs = greedy_target_sequence(g, unit(2, 0), 50);
    for (const auto& p : gs.points) CHECK(chordal_distance(p, unit(2, 0)) < 1e-12);
    for (double r : gs.residuals) CHECK(r < 1e-10);
}

TEST_CASE("greedy target sequence: exact inversion for diag(2,1/2)") {
    SLMatrix g = normalize_to_sl(diag({2.0, 0.5}));
    Vector z(2);
    z << cxd(1, 0), cxd(1, 0);
    GreedySequence gs = greedy_target_sequence(g, z.normalized(), 200);
    for (double r : gs.residuals) CHECK(r < 1e-9);
    // k_m is [2^{-m} : 2^m] normalized: ratio check at small m
    CHECK(std::abs(gs.points[1](0) / gs.points[1](1) - cxd(1.0 / 16.0, 0)) < 1e-12);
}

TEST_CASE("greedy target sequence: Jordan block residuals stay tiny to m = 1000") {
    SLMatrix g = normalize_to_sl(jordan(3));
    std::mt19937_64 rng(global_seed() + 64);
    Vector z = random_unit_vector(3, rng);
    GreedySequence gs = greedy_target_sequence(g, z, 1000);
    double worst = 0.0;
    for (double r : gs.residuals) worst = std::max(worst, r);
    CHECK(worst < 1e-9);

    // exact-powers oracle: J^{-m} = I - mN + binom(m+1,2) N^2 in closed form,
    // and the forward product hits z to roundoff
    Matrix nmat = g.matrix() - Matrix::Identity(3, 3);
    double worst_exact = 0.0;
    for (long m : {1L, 10L, 100L, 1000L}) {
        double dm = static_cast<double>(m);
        Matrix inv = Matrix::Identity(3, 3) - dm * nmat + (dm * (dm + 1) / 2) * nmat * nmat;
        Matrix fwd = Matrix::Identity(3, 3) + dm * nmat + (dm * (dm - 1) / 2) * nmat * nmat;
        Vector km = (inv * z).normalized();
        worst_exact = std::max(worst_exact, chordal_distance(fwd * km, z));
        // the library sequence agrees with the exact inverse power
        CHECK(chordal_distance(gs.points[static_cast<size_t>(m - 1)], km) < 1e-9);
    }
    CHECK(worst_exact < 1e-10);
}

TEST_CASE("foliation check: diagonal elliptic has zero drift on all foliations") {
    SLMatrix g = normalize_to_sl(
        diag({std::polar(1.0, 0.9), std::polar(1.0, -0.4), std::polar(1.0, -0.5)}));
    SLMatrix id = normalize_to_sl(Matrix::Identity(3, 3));
    FoliationReport rep = foliation_check(g, id, FoliationKind::EllipticSpheres, 200);
    CHECK(rep.max_leaf_drift < 1e-12);
    CHECK(rep.samples == 200);
}

TEST_CASE("foliation check: parabolic quadric leaves are exactly invariant") {
    SLMatrix g = normalize_to_sl(jordan(3));
    ParabolicCertificate cert = parabolic_certificate(g);
    FoliationReport rep = foliation_check(g, cert, 300);
    CHECK(rep.max_leaf_drift < 1e-10);
}

TEST_CASE("foliation check rejects the wrong kind") {
    SLMatrix lox = normalize_to_sl(diag({2.0, 0.5}));
    SLMatrix id2 = normalize_to_sl(Matrix::Identity(2, 2));
    CHECK_THROWS_AS(foliation_check(lox, id2, FoliationKind::EllipticSpheres, 10), WrongKind);
    CHECK_THROWS_AS(foliation_check(lox, id2, FoliationKind::ParabolicQuadrics, 10), WrongKind);
}

TEST_CASE("equicontinuity dichotomy seen by orbit divergence") {
    SLMatrix g = normalize_to_sl(jordan(3));
    // ball inside the equicontinuity region, centered at [e3]
    Vector center = unit(3, 2);
    std::mt19937_64 rng(global_seed() + 65);
    double inside_worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        Vector pert = center + 1e-4 * random_unit_vector(3, rng);
        Vector a = center.normalized(), b = pert.normalized();
        double d0 = chordal_distance(a, b);
        double worst = 0.0;
        Vector x = a, y = b;
        for (int m = 0; m < 1000; ++m) {
            x = (g.matrix() * x).normalized();
            y = (g.matrix() * y).normalized();
            worst = std::max(worst, chordal_distance(x, y));
        }
        inside_worst = std::max(inside_worst, worst / d0);
    }
    CHECK(inside_worst < 50.0);

    // ball centered on the complement (the line <<e1,e2>>): divergence
    // witness pairs z, z - (2b/m) e3 push apart by O(1) while their initial
    // separation shrinks like 1/m
    Vector on_line = (unit(3, 0) * cxd(0.2, 0) + unit(3, 1)).normalized();
    double outside_best = 0.0;
    for (long mw : {500L, 1000L, 2000L, 4000L}) {
        double b = on_line(1).real();
        Vector pert = on_line;
        pert(2) = cxd(-2.0 * b / static_cast<double>(mw), 0);
        Vector x = on_line, y = pert.normalized();
        double d0 = chordal_distance(x, y);
        Vector xx = x, yy = y;
        double worst = 0.0;
        for (long m = 0; m < mw; ++m) {
            xx = (g.matrix() * xx).normalized();
            yy = (g.matrix() * yy).normalized();
            worst = std::max(worst, chordal_distance(xx, yy));
        }
        outside_best = std::max(outside_best, worst / d0);
    }
    CHECK(outside_best > 1e3);
}

TEST_CASE("orbit schedule is deterministic, ascending, and budgeted") {
    auto s1 = orbit_schedule(400);
    auto s2 = orbit_schedule(400);
    CHECK(s1 == s2);
    CHECK(static_cast<int>(s1.size()) == 400);
    for (size_t i = 0; i + 1 < s1.size(); ++i) CHECK(s1[i] < s1[i + 1]);
    CHECK(s1.front() == 1);
}
