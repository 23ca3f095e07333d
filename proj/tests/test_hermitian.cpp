#include <doctest.h>

#include <random>

#include "projdyn/hermitian.hpp"
#include "test_support.hpp"

using namespace projdyn;
using namespace projdyn::testing;

namespace {

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

double qval(const Matrix& c, const Vector& z) { return (z.adjoint() * c * z)(0, 0).real(); }

}  // namespace

TEST_CASE("form_value_and_sign examples") {
    FormValue f = form_value_and_sign(unit(3, 0), unit(3, 0), 1, 2);
    CHECK(f.value.real() == doctest::Approx(-1.0));
    CHECK(f.sign_of_u == SignType::Negative);

    Vector nullv(3);
    nullv << cxd(1, 0), cxd(1, 0), cxd(0, 0);
    f = form_value_and_sign(nullv, nullv, 1, 2);
    CHECK(std::abs(f.value) < 1e-15);
    CHECK(f.sign_of_u == SignType::Null);

    double t = 0.6;
    Vector u(2), v(2);
    u << cxd(1, 0), cxd(0, 0);
    v << cxd(std::cosh(t), 0), cxd(std::sinh(t), 0);
    f = form_value_and_sign(u, v, 1, 1);
    CHECK(f.value.real() == doctest::Approx(-std::cosh(t)));
}

TEST_CASE("signature examples") {
    Matrix d = Matrix::Zero(3, 3);
    d(0, 0) = cxd(-1, 0);
    d(1, 1) = d(2, 2) = cxd(1, 0);
    Signature s = signature(d);
    CHECK(s.neg == 1);
    CHECK(s.pos == 2);
    CHECK(s.zero == 0);
    CHECK(s.rigorous);

    Matrix anti(2, 2);
    anti << cxd(0, 0), cxd(2, 0), cxd(2, 0), cxd(0, 0);
    s = signature(anti);
    CHECK(s.neg == 1);
    CHECK(s.pos == 1);

    HermitianFormFamily fam = parabolic_form_family(3);
    for (double r : {-1.0, 0.0, 1.0}) {
        s = signature(fam.at(r));
        CHECK(s.neg == 1);
        CHECK(s.pos == 2);
        CHECK(s.zero == 0);
    }

    Matrix notherm(2, 2);
    notherm << cxd(0, 0), cxd(1, 0), cxd(2, 0), cxd(0, 0);
    CHECK_THROWS_AS(signature(notherm), NotHermitian);
}

TEST_CASE("distance_kl examples") {
    Vector x(2), y(2);
    x << cxd(1, 0), cxd(0, 0);
    CHECK(distance_kl(x, x, 1, 1) == doctest::Approx(0.0));
    for (double t : {0.3, 1.0, 2.5}) {
        y << cxd(std::cosh(t), 0), cxd(std::sinh(t), 0);
        CHECK(distance_kl(x, y, 1, 1) == doctest::Approx(t).epsilon(1e-10));
    }
    Vector pos(2);
    pos << cxd(0, 0), cxd(1, 0);
    CHECK_THROWS_AS(distance_kl(x, pos, 1, 1), NotNegativeType);
}

TEST_CASE("property: distance_kl invariant under the isometry group") {
    std::mt19937_64 rng(global_seed() + 30);
    for (auto [k, l] : {std::pair{1, 1}, std::pair{1, 2}}) {
        const int n = k + l;
        for (int trial = 0; trial < 10; ++trial) {
            Matrix g = random_pu_element(k, l, 3, rng);
            // two random negative-type vectors
            Vector x, y;
            auto draw_negative = [&]() {
                while (true) {
                    Vector v = random_unit_vector(n, rng);
                    if (form_value_and_sign(v, v, k, l).sign_of_u == SignType::Negative) return v;
                }
            };
            x = draw_negative();
            y = draw_negative();
            double before = distance_kl(x, y, k, l);
            double after = distance_kl(g * x, g * y, k, l);
            CHECK(after == doctest::Approx(before).epsilon(1e-10));
        }
    }
}

TEST_CASE("quadric family: all five lemma properties for sizes 2..9") {
    std::mt19937_64 rng(global_seed() + 31);
    for (int size = 2; size <= 9; ++size) {
        CAPTURE(size);
        HermitianFormFamily fam = parabolic_form_family(size);
        auto expected = fam.expected_signature();

        // 1: e1 in every quadric (exact)
        for (double r : {-5.0, 0.0, 7.0}) CHECK(qval(fam.at(r), unit(size, 0)) == 0.0);

        // 2 and 3: unique solved parameter off the hyperplane, membership in
        // the hyperplane otherwise
        for (int s = 0; s < 200; ++s) {
            Vector z = random_unit_vector(size, rng);
            double e = std::norm(z(size - 1));
            if (e < 1e-12) continue;
            double rstar = -qval(fam.base, z) / e;
            CHECK(std::abs(qval(fam.at(rstar), z)) < 1e-10);
            CHECK(std::abs(qval(fam.at(rstar + 3.0), z)) > 1e-12);  // no second root
        }

        // 4: constant signature
        for (double r : {-10.0, -1.0, 0.0, 1.0, 10.0}) {
            Signature sig = signature(fam.at(r));
            CHECK(sig.neg == expected.first);
            CHECK(sig.pos == expected.second);
            CHECK(sig.zero == 0);
        }

        // 5: exact invariance of 2*C_r under the Jordan block
        CHECK(family_invariance_exact(fam, {-10, -3, 0, 1, 10}));
        // and numerically in doubles
        Matrix a = jordan(size);
        for (double r : {-1.0, 0.5}) {
            Matrix cr = fam.at(r);
            CHECK((a.adjoint() * cr * a - cr).norm() < 1e-12);
        }
    }
    CHECK_THROWS_AS(parabolic_form_family(1), SizeTooSmall);
}

TEST_CASE("property: antidiagonal block spectrum (lemma about [[0,A],[A*,0]])") {
    std::mt19937_64 rng(global_seed() + 32);
    for (int trial = 0; trial < 8; ++trial) {
        const int n = 3;
        Matrix a = random_matrix(n, rng);
        Matrix c = Matrix::Zero(2 * n, 2 * n);
        c.topRightCorner(n, n) = a;
        c.bottomLeftCorner(n, n) = a.adjoint();
        // reconstruct all 2n eigenpairs from the n eigenpairs of A A^*
        Eigen::ComplexEigenSolver<Matrix> es(a * a.adjoint(), true);
        std::vector<cxd> expected;
        for (int i = 0; i < n; ++i) {
            cxd lam = std::sqrt(es.eigenvalues()(i));
            expected.push_back(lam);
            expected.push_back(-lam);
            // eigenvector check: (x, lambda^{-1} A^* x)
            Vector x = es.eigenvectors().col(i);
            for (cxd l2 : {lam, -lam}) {
                Vector v(2 * n);
                v.head(n) = x;
                v.tail(n) = a.adjoint() * x / l2;
                CHECK((c * v - l2 * v).norm() < 1e-8 * v.norm());
            }
        }
        Eigen::ComplexEigenSolver<Matrix> es2(c, false);
        std::vector<cxd> got(es2.eigenvalues().data(), es2.eigenvalues().data() + 2 * n);
        auto key = [](const cxd& z) { return std::make_pair(std::round(z.real() * 1e8), std::round(z.imag() * 1e8)); };
        std::sort(expected.begin(), expected.end(), [&](auto x, auto y) { return key(x) < key(y); });
        std::sort(got.begin(), got.end(), [&](auto x, auto y) { return key(x) < key(y); });
        for (int i = 0; i < 2 * n; ++i) CHECK(std::abs(expected[static_cast<size_t>(i)] - got[static_cast<size_t>(i)]) < 1e-7);
    }
}

TEST_CASE("property: Weyl perturbation bound for Hermitian spectra") {
    std::mt19937_64 rng(global_seed() + 33);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 5;
        Matrix a = random_matrix(n, rng);
        a = (a + a.adjoint()) / 2.0;
        Matrix e = random_matrix(n, rng);
        e = (e + e.adjoint()) / 2.0 * 0.01;
        Eigen::SelfAdjointEigenSolver<Matrix> ea(a), eb(a + e);
        double enorm = e.operatorNorm();
        for (int i = 0; i < n; ++i)
            CHECK(std::abs(ea.eigenvalues()(i) - eb.eigenvalues()(i)) <= enorm + 1e-12);
    }
}

TEST_CASE("property: restricted form on a span of two null vectors") {
    std::mt19937_64 rng(global_seed() + 34);
    for (auto [k, l] : {std::pair{1, 2}, std::pair{2, 2}}) {
        const int n = k + l;
        Matrix j = pu_form_matrix(k, l);
        int seen = 0;
        while (seen < 10) {
            // random null vector: balance a negative and a positive part
            auto draw_null = [&]() {
                Vector v = random_unit_vector(n, rng);
                double negn = v.head(k).norm(), posn = v.tail(l).norm();
                if (negn < 1e-6 || posn < 1e-6) return Vector(Vector::Zero(n));
                Vector w = v;
                w.head(k) /= negn;
                w.tail(l) /= posn;
                return w;  // <w,w> = -1 + 1 = 0
            };
            Vector v = draw_null(), w = draw_null();
            if (v.norm() == 0.0 || w.norm() == 0.0) continue;
            Matrix span(n, 2);
            span << v, w;
            Subspace s = Subspace::from_span(span);
            if (s.dim() != 2) continue;
            ++seen;
            Matrix f = s.basis().adjoint() * j * s.basis();
            Signature sig = signature(f, 1e-9);
            bool hyperbolic = sig.neg == 1 && sig.pos == 1 && sig.zero == 0;
            bool totally_null = sig.neg == 0 && sig.pos == 0 && sig.zero == 2;
            CHECK((hyperbolic || totally_null));
        }
    }
}

TEST_CASE("parabolic certificate: 3x3 Jordan block") {
    SLMatrix g = normalize_to_sl(jordan(3));
    ParabolicCertificate cert = parabolic_certificate(g);
    CHECK(cert.form_signature.first == 1);
    CHECK(cert.form_signature.second == 2);
    CHECK(cert.Z.dim() == 1);
    CHECK(cert.Z.contains_vector(unit(3, 0)));
    CHECK(cert.W.dim() == 2);
    CHECK(cert.W.contains_vector(unit(3, 0)));
    CHECK(cert.W.contains_vector(unit(3, 1)));
    // invariance in the original coordinates
    for (double r : {-3.0, 0.0, 2.0}) {
        Matrix cr = cert.at(r);
        CHECK((g.matrix().adjoint() * cr * g.matrix() - cr).norm() < 1e-10);
    }
}

TEST_CASE("parabolic certificate: Jordan2 + Jordan2 has signature (2,2)") {
    Matrix m = Matrix::Zero(4, 4);
    m.topLeftCorner(2, 2) = jordan(2);
    m.bottomRightCorner(2, 2) = jordan(2);
    ParabolicCertificate cert = parabolic_certificate(normalize_to_sl(m));
    CHECK(cert.form_signature.first == 2);
    CHECK(cert.form_signature.second == 2);  // conjugate into PU(2,2), not PU(1,3)
}

TEST_CASE("parabolic certificate: Jordan2 + I1 has signature (1,2)") {
    Matrix m = Matrix::Zero(3, 3);
    m.topLeftCorner(2, 2) = jordan(2);
    m(2, 2) = cxd(1, 0);
    ParabolicCertificate cert = parabolic_certificate(normalize_to_sl(m));
    CHECK(cert.form_signature.first == 1);
    CHECK(cert.form_signature.second == 2);
    CHECK_THROWS_AS(parabolic_certificate(normalize_to_sl(Matrix::Identity(3, 3))), NotParabolic);
}

TEST_CASE("property: certificate survives conjugation") {
    std::mt19937_64 rng(global_seed() + 35);
    for (int trial = 0; trial < 8; ++trial) {
        int n = 3 + (trial % 2);
        SLMatrix g = conjugated(parabolic_normal_form(n, rng), 60.0, rng);
        ParabolicCertificate cert = parabolic_certificate(g);
        for (double r : {-1.0, 0.0, 2.0}) {
            Matrix cr = cert.at(r);
            double res = (g.matrix().adjoint() * cr * g.matrix() - cr).norm() / std::max(1.0, cr.norm());
            CHECK(res < 1e-10);
        }
        CHECK(subspace_distance(cert.Z.apply(g.matrix()), cert.Z).angle < 1e-7);
        CHECK(subspace_distance(cert.W.apply(g.matrix()), cert.W).angle < 1e-7);
    }
}
