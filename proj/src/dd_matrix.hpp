#pragma once

// Compensated (double-double) complex matrix products for the power
// ladders. Plain repeated squaring of a matrix whose dominant part is
// nilpotent cancels exactly; the eps-level junk left behind then grows like
// real signal and wrecks exponents beyond ~1e6. Double-double products push
// the wall out to ~1e14, far past every schedule used here.

#include <cmath>
#include <vector>

#include "projdyn/types.hpp"

namespace projdyn::detail {

struct dd {
    double hi = 0.0, lo = 0.0;
};

inline dd two_sum(double a, double b) {
    double s = a + b;
    double bb = s - a;
    double err = (a - (s - bb)) + (b - bb);
    return {s, err};
}

inline dd quick_renorm(double hi, double lo) {
    double s = hi + lo;
    double e = lo - (s - hi);
    return {s, e};
}

inline dd two_prod(double a, double b) {
    double p = a * b;
    double e = std::fma(a, b, -p);
    return {p, e};
}

inline dd dd_add(dd a, dd b) {
    dd s = two_sum(a.hi, b.hi);
    return quick_renorm(s.hi, s.lo + a.lo + b.lo);
}

inline dd dd_mul(dd a, dd b) {
    dd p = two_prod(a.hi, b.hi);
    return quick_renorm(p.hi, p.lo + a.hi * b.lo + a.lo * b.hi);
}

inline dd dd_scale_pow2(dd a, double s) {  // s an exact power of two
    return {a.hi * s, a.lo * s};
}

struct ddc {
    dd re, im;
};

inline ddc ddc_add(ddc a, ddc b) { return {dd_add(a.re, b.re), dd_add(a.im, b.im)}; }

inline ddc ddc_mul(ddc a, ddc b) {
    dd re = dd_add(dd_mul(a.re, b.re), dd_mul({-a.im.hi, -a.im.lo}, b.im));
    dd im = dd_add(dd_mul(a.re, b.im), dd_mul(a.im, b.re));
    return {re, im};
}

struct DDMatrix {
    int n = 0;
    std::vector<ddc> entries;  // row major

    ddc& at(int i, int j) { return entries[static_cast<size_t>(i * n + j)]; }
    const ddc& at(int i, int j) const { return entries[static_cast<size_t>(i * n + j)]; }

    static DDMatrix from(const Matrix& m) {
        DDMatrix out;
        out.n = static_cast<int>(m.rows());
        out.entries.resize(static_cast<size_t>(out.n) * out.n);
        for (int i = 0; i < out.n; ++i)
            for (int j = 0; j < out.n; ++j)
                out.at(i, j) = {{m(i, j).real(), 0.0}, {m(i, j).imag(), 0.0}};
        return out;
    }

    Matrix round() const {
        Matrix out(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                out(i, j) = cxd(at(i, j).re.hi + at(i, j).re.lo, at(i, j).im.hi + at(i, j).im.lo);
        return out;
    }

    double sup_abs() const {
        double s = 0.0;
        for (const auto& e : entries) s = std::max(s, std::abs(cxd(e.re.hi, e.im.hi)));
        return s;
    }

    // exact renormalization: divide by the power of two nearest the sup entry
    void renormalize() {
        double s = sup_abs();
        if (s <= 0.0) return;
        double f = std::exp2(-std::round(std::log2(s)));
        for (auto& e : entries) {
            e.re = dd_scale_pow2(e.re, f);
            e.im = dd_scale_pow2(e.im, f);
        }
    }
};

inline DDMatrix dd_matmul(const DDMatrix& a, const DDMatrix& b) {
    DDMatrix out;
    out.n = a.n;
    out.entries.resize(static_cast<size_t>(a.n) * a.n);
    for (int i = 0; i < a.n; ++i)
        for (int j = 0; j < a.n; ++j) {
            ddc acc{{0, 0}, {0, 0}};
            for (int k = 0; k < a.n; ++k) acc = ddc_add(acc, ddc_mul(a.at(i, k), b.at(k, j)));
            out.at(i, j) = acc;
        }
    return out;
}

// Renormalized powers g^m for every m in the ascending schedule, computed in
// compensated arithmetic through a shared cache of g^{2^i}.
inline std::vector<Matrix> dd_scheduled_powers(const Matrix& g, const std::vector<long>& schedule) {
    std::vector<DDMatrix> pow2{DDMatrix::from(g)};
    pow2.front().renormalize();
    auto pow2_at = [&](int i) -> const DDMatrix& {
        while (static_cast<int>(pow2.size()) <= i) {
            DDMatrix next = dd_matmul(pow2.back(), pow2.back());
            next.renormalize();
            pow2.push_back(std::move(next));
        }
        return pow2[static_cast<size_t>(i)];
    };
    const int n = static_cast<int>(g.rows());
    std::vector<Matrix> out;
    out.reserve(schedule.size());
    for (long m : schedule) {
        DDMatrix acc = DDMatrix::from(Matrix::Identity(n, n));
        unsigned long e = static_cast<unsigned long>(m);
        int bit = 0;
        while (e > 0) {
            if (e & 1UL) {
                acc = dd_matmul(acc, pow2_at(bit));
                acc.renormalize();
            }
            e >>= 1UL;
            ++bit;
        }
        Matrix r = acc.round();
        out.push_back(r / r.cwiseAbs().maxCoeff());
    }
    return out;
}

}  // namespace projdyn::detail
