#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

#include "rmt/common.hpp"

namespace rmt {

// Marchenko-Pastur model for aspect ratio y in (0,1]:
// density (1/(2 pi x y)) sqrt((b-x)(x-a)) on [a,b], a = (1-sqrt(y))^2,
// b = (1+sqrt(y))^2.
struct MPModel {
    double y;
    double a;
    double b;

    explicit MPModel(double y_) : y(y_) {
        if (!(y > 0.0 && y <= 1.0)) throw std::invalid_argument("MPModel: y outside (0,1]");
        const double sy = std::sqrt(y);
        a = (1.0 - sy) * (1.0 - sy);
        b = (1.0 + sy) * (1.0 + sy);
    }
};

namespace detail {

// adaptive Simpson; T is double or complex<double>
template <typename T, typename F>
T simpson_step(F&& f, double lo, double hi, T flo, T fmid, T fhi, T whole, double tol,
               int depth) {
    const double mid = 0.5 * (lo + hi);
    const double lm = 0.5 * (lo + mid), rm = 0.5 * (mid + hi);
    const T fl = f(lm), fr = f(rm);
    const T left = (mid - lo) / 6.0 * (flo + 4.0 * fl + fmid);
    const T right = (hi - mid) / 6.0 * (fmid + 4.0 * fr + fhi);
    const T delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return simpson_step(f, lo, mid, flo, fl, fmid, left, tol * 0.5, depth - 1) +
           simpson_step(f, mid, hi, fmid, fr, fhi, right, tol * 0.5, depth - 1);
}

template <typename F>
auto integrate(F&& f, double lo, double hi, double tol) {
    using T = decltype(f(lo));
    if (lo == hi) return T{};
    const T flo = f(lo), fhi = f(hi), fmid = f(0.5 * (lo + hi));
    const T whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
    return simpson_step(f, lo, hi, flo, fmid, fhi, whole, tol, 48);
}

// Substitution x = a + (b-a) sin^2(theta/2), theta in [0,pi], which removes
// both square-root endpoint singularities (and the 1/x pole at the hard edge
// y=1, a=0). rho(x) dx = ((b-a)^2/(8 pi y)) * 4 s2 c2 / (a + (b-a) s2) dtheta
// with s2 = sin^2(theta/2), c2 = cos^2(theta/2).
struct ThetaMap {
    double a, b, y;
    double x(double theta) const {
        const double s = std::sin(0.5 * theta);
        return a + (b - a) * s * s;
    }
    double theta(double xv) const {
        const double r = std::clamp((xv - a) / (b - a), 0.0, 1.0);
        return 2.0 * std::asin(std::sqrt(r));
    }
    // density of the pushed-forward measure in theta
    double weight(double theta) const {
        const double s = std::sin(0.5 * theta), c = std::cos(0.5 * theta);
        const double s2 = s * s, c2 = c * c;
        const double denom = a + (b - a) * s2;
        const double ratio = (denom > 0.0) ? s2 * c2 / denom : c2 / (b - a);
        return (b - a) * (b - a) / (8.0 * M_PI * y) * 4.0 * ratio;
    }
};

}  // namespace detail

inline double density(const MPModel& m, double x) {
    if (x < m.a || x > m.b) return 0.0;
    if (x == 0.0)  // hard edge y=1: integrable singularity at zero
        return std::numeric_limits<double>::infinity();
    return std::sqrt((m.b - x) * (x - m.a)) / (2.0 * M_PI * x * m.y);
}

inline double cdf(const MPModel& m, double x) {
    if (x <= m.a) return 0.0;
    if (x > m.b) return 1.0;
    const detail::ThetaMap map{m.a, m.b, m.y};
    const double hi = (x >= m.b) ? M_PI : map.theta(x);
    const double mass =
        detail::integrate([&](double t) { return map.weight(t); }, 0.0, hi, 1e-12);
    return std::min(mass, 1.0);
}

inline double quantile(const MPModel& m, double q) {
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile: q outside [0,1]");
    if (q == 0.0) return m.a;
    if (q == 1.0) return m.b;
    double lo = m.a, hi = m.b;
    while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        (cdf(m, mid) < q ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// sqrt((y+z-1)^2 - 4yz) = sqrt(z-a) sqrt(z-b) with principal roots taken
// factor-wise: cut exactly on [a,b], asymptotic to y+z-1 at infinity.
inline std::complex<double> branch_sqrt(const MPModel& m, std::complex<double> z) {
    return std::sqrt(z - m.a) * std::sqrt(z - m.b);
}

inline std::complex<double> stieltjes(const MPModel& m, std::complex<double> z) {
    if (z.imag() == 0.0 && z.real() >= m.a && z.real() <= m.b)
        throw std::invalid_argument("stieltjes: z on the branch cut [a,b]");
    if (std::abs(z) == 0.0) throw std::invalid_argument("stieltjes: z = 0");
    const std::complex<double> w = m.y + z - 1.0;
    return -(w - branch_sqrt(m, z)) / (2.0 * m.y * z);
}

// residual of s + 1/(y + z - 1 + y z s) = 0
inline double verify_functional_equation(const MPModel& m, std::complex<double> z) {
    const std::complex<double> s = stieltjes(m, z);
    const std::complex<double> denom = m.y + z - 1.0 + m.y * z * s;
    if (std::abs(denom) < 1e-12)
        throw NumericalError("functional equation: degenerate denominator");
    return std::abs(s + 1.0 / denom);
}

// quadrature evaluation of int rho(x)/(x-z) dx, the oracle for stieltjes()
inline std::complex<double> stieltjes_by_quadrature(const MPModel& m, std::complex<double> z,
                                                    double tol = 1e-11) {
    const detail::ThetaMap map{m.a, m.b, m.y};
    return detail::integrate(
        [&](double t) { return map.weight(t) / (map.x(t) - z); }, 0.0, M_PI, tol);
}

// p.v. int_a^b y x rho(x)/(x - lam) dx by symmetric excision in theta with
// Richardson extrapolation; endpoint and exterior lam are ordinary integrals
// after the theta substitution.
inline double pv_edge_integral(const MPModel& m, double lam) {
    const detail::ThetaMap map{m.a, m.b, m.y};
    auto g = [&](double t) { return m.y * map.x(t) * map.weight(t) / (map.x(t) - lam); };
    const double edge_tol = 1e-9 * (m.b - m.a);
    if (lam <= m.a + edge_tol || lam >= m.b - edge_tol) {
        if (std::abs(lam - m.a) <= edge_tol) {
            // pole at theta=0 cancels against the substitution weight:
            // y*x*rho/(x-a) dx = ((b-a)/(2pi)) cos^2(theta/2) dtheta
            return detail::integrate(
                [&](double t) {
                    const double c = std::cos(0.5 * t);
                    return (m.b - m.a) / (2.0 * M_PI) * c * c;
                },
                0.0, M_PI, 1e-10);
        }
        if (std::abs(lam - m.b) <= edge_tol) {
            // y*x*rho/(x-b) dx = -((b-a)/(2pi)) sin^2(theta/2) dtheta
            return detail::integrate(
                [&](double t) {
                    const double s = std::sin(0.5 * t);
                    return -(m.b - m.a) / (2.0 * M_PI) * s * s;
                },
                0.0, M_PI, 1e-10);
        }
        return detail::integrate(g, 0.0, M_PI, 1e-10);
    }
    // interior pole: excise |theta - theta_lam| < eps, extrapolate eps -> 0
    const double tl = map.theta(lam);
    auto excised = [&](double eps) {
        double v = 0.0;
        if (tl - eps > 0.0) v += detail::integrate(g, 0.0, tl - eps, 1e-10);
        if (tl + eps < M_PI) v += detail::integrate(g, tl + eps, M_PI, 1e-10);
        return v;
    };
    const int levels = 4;
    double eps0 = 1e-2 * std::min(tl, M_PI - tl);
    double tab[levels][levels];
    for (int i = 0; i < levels; ++i) tab[i][0] = excised(eps0 / (1 << i));
    // Neville in eps (leading excision error is linear in eps)
    for (int k = 1; k < levels; ++k)
        for (int i = 0; i + k < levels; ++i) {
            const double ei = eps0 / (1 << i), eik = eps0 / (1 << (i + k));
            tab[i][k] = (ei * tab[i + 1][k - 1] - eik * tab[i][k - 1]) / (ei - eik);
        }
    return tab[0][levels - 1];
}

// int rho = 1 check used by the model invariants
inline double total_mass(const MPModel& m) { return cdf(m, m.b); }

// first moment int x rho dx (equals 1 for the MP law at this scaling)
inline double mean(const MPModel& m) {
    const detail::ThetaMap map{m.a, m.b, m.y};
    return detail::integrate([&](double t) { return map.x(t) * map.weight(t); }, 0.0, M_PI,
                             1e-11);
}

}  // namespace rmt
