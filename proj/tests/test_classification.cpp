#include <doctest.h>

#include <random>

#include "projdyn/classification.hpp"
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

TEST_CASE("classify the three normal forms") {
    CHECK(classify(normalize_to_sl(diag({2.0, 0.5}))).kind == Kind::Loxodromic);
    CHECK(classify(normalize_to_sl(jordan(2))).kind == Kind::Parabolic);
    Matrix m = Matrix::Zero(6, 6);
    m.topLeftCorner(2, 2) = jordan(2);
    m.block(2, 2, 2, 2) = jordan(2);
    m.bottomRightCorner(2, 2) = Matrix::Identity(2, 2);
    CHECK(classify(normalize_to_sl(m)).kind == Kind::Parabolic);
    CHECK(classify(normalize_to_sl(diag({std::polar(1.0, 0.3), std::polar(1.0, -0.3)}))).kind ==
          Kind::Elliptic);
}

TEST_CASE("identity classifies as elliptic of order 1") {
    ClassificationResult c = classify(normalize_to_sl(Matrix::Identity(3, 3)));
    CHECK(c.kind == Kind::Elliptic);
    REQUIRE(c.finite_order.has_value());
    CHECK(*c.finite_order == 1);
}

TEST_CASE("finite_order detects cube roots of unity") {
    SLMatrix g = normalize_to_sl(
        diag({std::polar(1.0, 2 * M_PI / 3), std::polar(1.0, -2 * M_PI / 3), cxd(1, 0)}));
    OrderDetection od = finite_order(g, 10000);
    CHECK(od.ratios_rational);
    REQUIRE(od.order.has_value());
    CHECK(*od.order == 3);
}

TEST_CASE("finite_order reports irrational rotation as infinite") {
    SLMatrix g = normalize_to_sl(diag({std::polar(1.0, 1.0), std::polar(1.0, -1.0)}));
    OrderDetection od = finite_order(g, 10000);
    CHECK(!od.order.has_value());
    CHECK(!od.ratios_rational);
}

TEST_CASE("finite_order is absent for non-elliptic elements") {
    CHECK(!finite_order(normalize_to_sl(diag({2.0, 0.5})), 100).order.has_value());
    CHECK(!finite_order(normalize_to_sl(jordan(2)), 100).order.has_value());
}

TEST_CASE("line restriction classification") {
    SLMatrix lox = normalize_to_sl(diag({2.0, 0.5}));
    CHECK(line_restriction_class(lox, unit(2, 0), unit(2, 1)).kind == Kind::Loxodromic);

    SLMatrix ell = normalize_to_sl(diag({std::polar(1.0, 0.7), cxd(1, 0), std::polar(1.0, -0.7)}));
    CHECK(line_restriction_class(ell, unit(3, 0), unit(3, 1)).kind == Kind::Elliptic);

    // Jordan2 + I1: the [e1],[e3] restriction is the identity, i.e. elliptic
    Matrix m = Matrix::Zero(3, 3);
    m.topLeftCorner(2, 2) = jordan(2);
    m(2, 2) = cxd(1, 0);
    SLMatrix par = normalize_to_sl(m);
    ClassificationResult r = line_restriction_class(par, unit(3, 0), unit(3, 2));
    CHECK(r.kind == Kind::Elliptic);
    REQUIRE(r.finite_order.has_value());
    CHECK(*r.finite_order == 1);

    CHECK_THROWS_AS(line_restriction_class(par, unit(3, 1), unit(3, 0)), NotFixed);
    CHECK_THROWS_AS(line_restriction_class(par, unit(3, 0), unit(3, 0)), CoincidentPoints);
}

TEST_CASE("preserves_form examples") {
    SLMatrix rot = normalize_to_sl(diag({std::polar(1.0, 0.4), std::polar(1.0, -0.4)}));
    CHECK(preserves_form(rot, 1, 1));

    SLMatrix lox = normalize_to_sl(diag({2.0, 0.5}));
    CHECK(!preserves_form(lox, 1, 1));

    double t = 0.8;
    Matrix boost(2, 2);
    boost << cxd(std::cosh(t), 0), cxd(std::sinh(t), 0), cxd(std::sinh(t), 0), cxd(std::cosh(t), 0);
    CHECK(preserves_form(normalize_to_sl(boost), 1, 1));
}

TEST_CASE("classify_pu: elliptic diagonal in PU(1,1)") {
    SLMatrix g = normalize_to_sl(diag({std::polar(1.0, 0.4), std::polar(1.0, -0.4)}));
    PUClassification pc = classify_pu(g, 1, 1);
    CHECK(pc.kind == Kind::Elliptic);
    // witness is [e1], which is negative type
    CHECK(std::abs(pc.fixed_point_witness(1)) < 1e-9);
    double self = -std::norm(pc.fixed_point_witness(0)) + std::norm(pc.fixed_point_witness(1));
    CHECK(self < 0);
}

TEST_CASE("classify_pu: boost in PU(1,1) is loxodromic with null witness") {
    double t = 0.9;
    Matrix boost(2, 2);
    boost << cxd(std::cosh(t), 0), cxd(std::sinh(t), 0), cxd(std::sinh(t), 0), cxd(std::cosh(t), 0);
    PUClassification pc = classify_pu(normalize_to_sl(boost), 1, 1);
    CHECK(pc.kind == Kind::Loxodromic);
    // witness proportional to (1, -1) or (1, 1): null either way
    double self = -std::norm(pc.fixed_point_witness(0)) + std::norm(pc.fixed_point_witness(1));
    CHECK(std::abs(self) < 1e-9);
}

TEST_CASE("classify_pu: unipotent parabolic of PU(1,1) via congruence") {
    std::mt19937_64 rng(global_seed());
    Matrix g = pu_parabolic_element(2, rng);
    SLMatrix sl = normalize_to_sl(g);
    REQUIRE(preserves_form(sl, 1, 1));
    PUClassification pc = classify_pu(sl, 1, 1);
    CHECK(pc.kind == Kind::Parabolic);
    double self = -std::norm(pc.fixed_point_witness(0)) + std::norm(pc.fixed_point_witness(1));
    CHECK(std::abs(self) < 1e-8);
    CHECK_THROWS_AS(classify_pu(normalize_to_sl(diag({2.0, 0.5})), 1, 1), NotInPU);
}

TEST_CASE("property: exhaustive and conjugation/power/inverse invariant") {
    std::mt19937_64 rng(global_seed() + 20);
    for (int trial = 0; trial < 12; ++trial) {
        int n = 3 + (trial % 2);
        Matrix nf;
        Kind expect;
        switch (trial % 3) {
            case 0:
                nf = elliptic_normal_form(n, rng);
                expect = Kind::Elliptic;
                break;
            case 1:
                nf = parabolic_normal_form(n, rng);
                expect = Kind::Parabolic;
                break;
            default:
                nf = loxodromic_normal_form(n, rng);
                expect = Kind::Loxodromic;
                break;
        }
        SLMatrix g = conjugated(nf, 1000.0, rng);
        ClassificationResult c = classify(g);
        CHECK(c.kind == expect);
        CHECK(classify(g.inverse()).kind == expect);
        for (long m : {2L, 3L}) {
            ClassificationResult cp = classify(g.power(m));
            if (expect == Kind::Loxodromic) CHECK(cp.kind == Kind::Loxodromic);
            if (expect == Kind::Parabolic) CHECK(cp.kind == Kind::Parabolic);
            if (expect == Kind::Elliptic) CHECK(cp.kind == Kind::Elliptic);
        }
    }
}

TEST_CASE("property: PU coherence between ball route and algebraic route") {
    std::mt19937_64 rng(global_seed() + 21);
    for (auto [k, l] : {std::pair{1, 1}, std::pair{1, 2}, std::pair{2, 2}}) {
        for (int trial = 0; trial < 8; ++trial) {
            Matrix m = random_pu_element(k, l, 3, rng);
            SLMatrix g = normalize_to_sl(m);
            if (!preserves_form(g, k, l)) continue;
            ClassificationResult algebraic = classify(g);
            PUClassification ball = classify_pu(g, k, l);
            CHECK(ball.kind == algebraic.kind);
        }
    }
}

TEST_CASE("property: unitary eigenbasis sign counts (fixed points in and out of the ball)") {
    // for random elliptic elements of U(k,l): k negative-type and l
    // positive-type fixed directions spanning the whole space
    std::mt19937_64 rng(global_seed() + 22);
    for (auto [k, l] : {std::pair{1, 2}, std::pair{2, 2}}) {
        const int n = k + l;
        Matrix j = pu_form_matrix(k, l);
        for (int trial = 0; trial < 6; ++trial) {
            Matrix u = elementary_block_unitary(k, l, rng);
            // conjugate by a J-isometry to hide the block structure
            Matrix s = random_pu_element(k, l, 2, rng);
            Matrix g = s * u * s.inverse();
            EigenStructure es = eigen_structure(normalize_to_sl(g));
            int neg = 0, pos = 0, nonnull = 0;
            std::vector<Subspace> spaces;
            for (size_t i = 0; i < es.eigenvalues.size(); ++i) {
                const Matrix& q = es.generalized_eigenspaces[i].basis();
                Matrix f = q.adjoint() * j * q;
                Eigen::SelfAdjointEigenSolver<Matrix> saes((f + f.adjoint()) / 2.0);
                for (int e = 0; e < saes.eigenvalues().size(); ++e) {
                    if (saes.eigenvalues()(e) < -1e-9) ++neg;
                    if (saes.eigenvalues()(e) > 1e-9) ++pos;
                    if (std::abs(saes.eigenvalues()(e)) > 1e-9) ++nonnull;
                }
                spaces.push_back(es.generalized_eigenspaces[i]);
            }
            CHECK(neg == k);       // Lemma about k fixed points inside the ball
            CHECK(pos == l);       // and l outside its closure
            CHECK(nonnull >= 1);   // some eigenvector is non-null
            CHECK(Subspace::span_union(spaces, 1e-9).dim() == n);
        }
    }
}
