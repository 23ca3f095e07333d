#include "projdyn/hermitian.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

#include "projdyn/classification.hpp"

namespace projdyn {

namespace {

long long binom_ll(int n, int k) {
    if (k < 0 || k > n) return 0;
    long long r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// accumulate c * <<a,b>>^+ into the 2x-scaled exact matrix: the form
// z_a conj(z_b) + conj(z_a) z_b has Hermitian matrix E_ab + E_ba
void add_plus(ExactMatrix& twice, int a, int b, long long twice_coeff) {
    twice(a - 1, b - 1) += std::complex<long long>(twice_coeff, 0);
    twice(b - 1, a - 1) += std::complex<long long>(twice_coeff, 0);
}

// accumulate c * i*<<a,b>>^- : matrix -i E_ab + i E_ba
void add_iminus(ExactMatrix& twice, int a, int b, long long twice_coeff) {
    twice(a - 1, b - 1) += std::complex<long long>(0, -twice_coeff);
    twice(b - 1, a - 1) += std::complex<long long>(0, twice_coeff);
}

long long sign_ll(int e) { return (e % 2 == 0) ? 1 : -1; }

Matrix to_double(const ExactMatrix& m, double scale) {
    Matrix out(m.rows(), m.cols());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j)
            out(i, j) = cxd(static_cast<double>(m(i, j).real()), static_cast<double>(m(i, j).imag())) * scale;
    return out;
}

}  // namespace

FormValue form_value_and_sign(const Vector& u, const Vector& v, int k, int l, double tol) {
    if (u.size() != k + l || v.size() != k + l)
        throw AmbientMismatch("form_value_and_sign: vectors must have length k + l");
    cxd value(0, 0);
    for (int j = 0; j < k; ++j) value -= u(j) * std::conj(v(j));
    for (int j = k; j < k + l; ++j) value += u(j) * std::conj(v(j));
    double self = 0.0;
    for (int j = 0; j < k; ++j) self -= std::norm(u(j));
    for (int j = k; j < k + l; ++j) self += std::norm(u(j));
    double band = tol * u.squaredNorm();
    FormValue out;
    out.value = value;
    out.sign_of_u = std::abs(self) <= band ? SignType::Null
                                           : (self < 0 ? SignType::Negative : SignType::Positive);
    return out;
}

Signature signature(const Matrix& h, double tol) {
    if (h.rows() != h.cols()) throw ValidationError("signature of a non-square matrix");
    double defect = (h - h.adjoint()).norm();
    if (defect > 1e-10 * std::max(1.0, h.norm())) throw NotHermitian();
    Eigen::SelfAdjointEigenSolver<Matrix> es((h + h.adjoint()) / 2.0);
    const auto& w = es.eigenvalues();
    double scale = w.size() > 0 ? std::max(std::abs(w(0)), std::abs(w(w.size() - 1))) : 0.0;
    double band = tol * scale;
    Signature out;
    double min_abs = std::numeric_limits<double>::infinity();
    for (int i = 0; i < w.size(); ++i) {
        min_abs = std::min(min_abs, std::abs(w(i)));
        if (w(i) < -band)
            ++out.neg;
        else if (w(i) > band)
            ++out.pos;
        else
            ++out.zero;
    }
    out.rigorous = w.size() == 0 || min_abs > 2.0 * defect;
    return out;
}

double distance_kl(const Vector& x, const Vector& y, int k, int l) {
    FormValue fx = form_value_and_sign(x, x, k, l);
    FormValue fy = form_value_and_sign(y, y, k, l);
    if (fx.sign_of_u != SignType::Negative || fy.sign_of_u != SignType::Negative)
        throw NotNegativeType();
    cxd xy = form_value_and_sign(x, y, k, l).value;
    double num = std::norm(xy);
    double den = fx.value.real() * fy.value.real();  // product of two negatives, positive
    double ratio = num / den;
    return std::acosh(std::sqrt(std::max(1.0, ratio)));
}

std::pair<int, int> HermitianFormFamily::expected_signature() const {
    int k = jordan_size / 2;
    return odd ? std::make_pair(k, k + 1) : std::make_pair(k, k);
}

HermitianFormFamily parabolic_form_family(int n) {
    if (n < 2) throw SizeTooSmall("parabolic_form_family needs jordan_size >= 2");
    HermitianFormFamily fam;
    fam.jordan_size = n;
    fam.odd = (n % 2 == 1);
    ExactMatrix twice = ExactMatrix::Zero(n, n);

    if (fam.odd) {
        const int k = (n - 1) / 2;
        for (int j = 0; j <= k - 1; ++j) add_plus(twice, 1 + j, n - j, 2 * sign_ll(j + k));
        for (int j = 0; j <= k - 2; ++j)
            for (int m = 0; m <= j; ++m)
                for (int l = 0; l <= m; ++l)
                    add_plus(twice, 2 + j - l, n - j + m, 2 * sign_ll(m - j + k) * binom_ll(m, l));
        // middle sum: the binomial runs over the inner index j
        for (int m = 1; m <= k; ++m)
            for (int j = 0; j <= m - 1; ++j)
                add_plus(twice, k + 1 - j, k + 1 + m, sign_ll(2 * k - m) * binom_ll(m - 1, j));
        add_plus(twice, k + 1, k + 1, 1);
    } else {
        const int k = n / 2;
        for (int j = 0; j <= k - 1; ++j) add_iminus(twice, 1 + j, n - j, 2 * sign_ll(j));
        for (int j = 0; j <= k - 2; ++j)
            for (int m = 0; m <= j; ++m)
                for (int l = 0; l <= m; ++l)
                    add_iminus(twice, 2 + j - l, n - j + m, 2 * sign_ll(m - j) * binom_ll(m, l));
    }

    fam.twice_base = twice;
    fam.base = to_double(twice, 0.5);
    fam.direction = Matrix::Zero(n, n);
    fam.direction(n - 1, n - 1) = cxd(1, 0);
    return fam;
}

bool family_invariance_exact(const HermitianFormFamily& fam, const std::vector<long long>& integer_rs) {
    const int n = fam.jordan_size;
    // A = unipotent Jordan block; condition per entry:
    // (A^* C A)_{ij} = C_{ij} + C_{i-1,j} + C_{i,j-1} + C_{i-1,j-1}
    for (long long r : integer_rs) {
        ExactMatrix c = fam.twice_base;
        c(n - 1, n - 1) += std::complex<long long>(2 * r, 0);
        auto at = [&](int i, int j) -> std::complex<long long> {
            if (i < 1 || j < 1 || i > n || j > n) return {0, 0};
            return c(i - 1, j - 1);
        };
        for (int i = 1; i <= n; ++i)
            for (int j = 1; j <= n; ++j)
                if (at(i - 1, j) + at(i, j - 1) + at(i - 1, j - 1) != std::complex<long long>(0, 0))
                    return false;
    }
    return true;
}

ParabolicCertificate parabolic_certificate(const SLMatrix& g, const Tolerances& tol) {
    ClassificationResult cls = classify(g, tol);
    if (cls.kind != Kind::Parabolic) throw NotParabolic("parabolic_certificate requires a parabolic element");

    ParabolicCertificate cert;
    cert.blocks = block_decomposition(g.matrix(), tol);
    const int n = g.size();

    Matrix c0 = Matrix::Zero(n, n);
    Matrix e = Matrix::Zero(n, n);
    int offset = 0;
    int sig_neg = 0, sig_pos = 0;
    std::vector<Vector> z_cols, w_cols;
    for (const auto& blk : cert.blocks.blocks) {
        const int s = blk.dim();
        if (blk.is_identity) {
            // positive-definite standard form on diagonalizable blocks
            c0.block(offset, offset, s, s) = Matrix::Identity(s, s);
            sig_pos += s;
            for (int i = 0; i < s; ++i) w_cols.push_back(blk.chain.col(i));
        } else {
            HermitianFormFamily fam = parabolic_form_family(s);
            c0.block(offset, offset, s, s) = fam.base;
            e.block(offset, offset, s, s) = fam.direction;
            auto sig = fam.expected_signature();
            sig_neg += sig.first;
            sig_pos += sig.second;
            cert.block_families.push_back(std::move(fam));
            z_cols.push_back(blk.chain.col(0));
            for (int i = 0; i + 1 < s; ++i) w_cols.push_back(blk.chain.col(i));
        }
        offset += s;
    }

    Matrix b = cert.blocks.assembled_basis();
    Matrix binv = b.inverse();
    cert.base = binv.adjoint() * c0 * binv;
    cert.base = (cert.base + cert.base.adjoint()) / 2.0;
    cert.direction = binv.adjoint() * e * binv;
    cert.direction = (cert.direction + cert.direction.adjoint()) / 2.0;
    cert.form_signature = {sig_neg, sig_pos};

    auto col_matrix = [&](const std::vector<Vector>& cols) {
        Matrix m(n, static_cast<int>(cols.size()));
        for (size_t i = 0; i < cols.size(); ++i) m.col(static_cast<int>(i)) = cols[i];
        return m;
    };
    cert.Z = Subspace::from_span(col_matrix(z_cols), 1e-9);
    cert.W = Subspace::from_span(col_matrix(w_cols), 1e-9);

    // --- verification before return ---
    const Matrix& gm = g.matrix();
    for (double r : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
        Matrix cr = cert.at(r);
        double res = (gm.adjoint() * cr * gm - cr).norm() / std::max(1.0, cr.norm());
        if (res > 1e-8) throw CertificateCheckFailed("quadric family is not g-invariant");
        Signature sig = signature(cr, 1e-9);
        if (sig.neg != sig_neg || sig.pos != sig_pos || sig.zero != 0)
            throw CertificateCheckFailed("quadric family signature drifted");
    }
    if (subspace_distance(cert.Z.apply(gm), cert.Z).angle > 1e-7 ||
        subspace_distance(cert.W.apply(gm), cert.W).angle > 1e-7)
        throw CertificateCheckFailed("Z or W is not invariant");
    // Z inside every quadric: the restricted form vanishes
    for (double r : {-1.0, 0.0, 1.0}) {
        Matrix rz = cert.Z.basis().adjoint() * cert.at(r) * cert.Z.basis();
        if (rz.norm() > 1e-8) throw CertificateCheckFailed("Z is not contained in the quadrics");
    }
    return cert;
}

}  // namespace projdyn
