#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>

#include "rteff/errors.hpp"

// Small numeric helpers shared by the statistics modules. Nothing here is
// domain specific; the formulas are the textbook ones.

namespace rteff::math {

/// Regularized incomplete beta function I_x(a, b), a,b > 0, x in [0, 1].
/// Continued fraction (modified Lentz), with the symmetry transform applied
/// when x > (a+1)/(a+b+2) for convergence.
inline double incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw domain_error("incomplete_beta: a, b must be positive");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;

    auto cont_frac = [](double aa, double bb, double xx) {
        const double tiny = 1e-300;
        const double eps = std::numeric_limits<double>::epsilon();
        double qab = aa + bb, qap = aa + 1.0, qam = aa - 1.0;
        double c = 1.0;
        double d = 1.0 - qab * xx / qap;
        if (std::fabs(d) < tiny) d = tiny;
        d = 1.0 / d;
        double h = d;
        for (int m = 1; m <= 300; ++m) {
            const double m2 = 2.0 * m;
            double num = m * (bb - m) * xx / ((qam + m2) * (aa + m2));
            d = 1.0 + num * d;
            if (std::fabs(d) < tiny) d = tiny;
            c = 1.0 + num / c;
            if (std::fabs(c) < tiny) c = tiny;
            d = 1.0 / d;
            h *= d * c;
            num = -(aa + m) * (qab + m) * xx / ((aa + m2) * (qap + m2));
            d = 1.0 + num * d;
            if (std::fabs(d) < tiny) d = tiny;
            c = 1.0 + num / c;
            if (std::fabs(c) < tiny) c = tiny;
            d = 1.0 / d;
            const double del = d * c;
            h *= del;
            if (std::fabs(del - 1.0) < 10.0 * eps) break;
        }
        return h;
    };

    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * cont_frac(a, b, x) / a;
    }
    return 1.0 - std::exp(std::lgamma(a + b) - std::lgamma(b) - std::lgamma(a) +
                          b * std::log1p(-x) + a * std::log(x)) *
                     cont_frac(b, a, 1.0 - x) / b;
}

/// Two-sided p-value of a t statistic with nu degrees of freedom:
/// P(|T| >= |t|) = I_{nu/(nu+t^2)}(nu/2, 1/2).
inline double student_t_two_sided_p(double t, double nu) {
    if (!(nu > 0.0)) throw domain_error("student_t_two_sided_p: dof must be positive");
    if (std::isinf(t)) return 0.0;
    const double x = nu / (nu + t * t);
    return incomplete_beta(0.5 * nu, 0.5, x);
}

using Mat3 = std::array<std::array<double, 3>, 3>;
using Vec3 = std::array<double, 3>;

/// Cholesky factor L of a symmetric positive definite 3x3 matrix, A = L L'.
/// Returns false when a pivot is not positive (rank deficiency), reporting
/// the failing pivot index.
inline bool cholesky3(const Mat3& a, Mat3& l, std::size_t& bad_pivot) {
    l = {};
    for (std::size_t j = 0; j < 3; ++j) {
        double diag = a[j][j];
        for (std::size_t k = 0; k < j; ++k) diag -= l[j][k] * l[j][k];
        // pivot tolerance relative to the column scale
        if (!(diag > 16.0 * std::numeric_limits<double>::epsilon() * std::fabs(a[j][j]))) {
            bad_pivot = j;
            return false;
        }
        l[j][j] = std::sqrt(diag);
        for (std::size_t i = j + 1; i < 3; ++i) {
            double s = a[i][j];
            for (std::size_t k = 0; k < j; ++k) s -= l[i][k] * l[j][k];
            l[i][j] = s / l[j][j];
        }
    }
    return true;
}

/// Solve L L' x = b given the Cholesky factor L.
inline Vec3 cholesky3_solve(const Mat3& l, const Vec3& b) {
    Vec3 y{};
    for (std::size_t i = 0; i < 3; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= l[i][k] * y[k];
        y[i] = s / l[i][i];
    }
    Vec3 x{};
    for (std::size_t ii = 3; ii-- > 0;) {
        double s = y[ii];
        for (std::size_t k = ii + 1; k < 3; ++k) s -= l[k][ii] * x[k];
        x[ii] = s / l[ii][ii];
    }
    return x;
}

/// Inverse of A from its Cholesky factor, by solving against unit vectors.
inline Mat3 cholesky3_inverse(const Mat3& l) {
    Mat3 inv{};
    for (std::size_t c = 0; c < 3; ++c) {
        Vec3 e{};
        e[c] = 1.0;
        const Vec3 col = cholesky3_solve(l, e);
        for (std::size_t r = 0; r < 3; ++r) inv[r][c] = col[r];
    }
    // enforce exact symmetry against round-off
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t c = r + 1; c < 3; ++c) {
            const double v = 0.5 * (inv[r][c] + inv[c][r]);
            inv[r][c] = inv[c][r] = v;
        }
    return inv;
}

} // namespace rteff::math
