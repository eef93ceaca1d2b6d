#pragma once

// Quadrature building blocks shared across the library: Gauss-Legendre rules,
// Gauss-Chebyshev sums for (1-t^2)^{-1/2}-weighted integrals, adaptive Simpson
// for mildly singular outer integrals, and equal-weight sphere lattices.

#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace rieszlab {

using Point = std::array<double, 3>;  // zero-padded; distances use all components

inline double dist(const Point& a, const Point& b) {
    const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

struct QuadRule {
    std::vector<double> x;  // nodes on [-1,1]
    std::vector<double> w;
};

// Gauss-Legendre nodes/weights by Newton iteration on P_n. Cached per order.
inline const QuadRule& gauss_legendre(int n) {
    static std::map<int, QuadRule> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    if (n < 1) throw std::invalid_argument("gauss_legendre: order must be >= 1");

    QuadRule rule;
    rule.x.resize(n);
    rule.w.resize(n);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double z1 = 2.0, pp = 0.0;
        while (std::abs(z - z1) > 1e-15) {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1);
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0);
            z1 = z;
            z = z1 - p1 / pp;
        }
        rule.x[i] = -z;
        rule.x[n - 1 - i] = z;
        rule.w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        rule.w[n - 1 - i] = rule.w[i];
    }
    return cache.emplace(n, std::move(rule)).first->second;
}

// Integral over [a,b] with an n-point Gauss-Legendre rule.
inline double integrate_gl(const std::function<double(double)>& f, double a, double b, int n) {
    const QuadRule& r = gauss_legendre(n);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += r.w[i] * f(mid + half * r.x[i]);
    return s * half;
}

// Gauss-Chebyshev (first kind): Int_{-1}^{1} f(t) (1-t^2)^{-1/2} dt
// = (pi/N) sum f(cos((2k-1)pi/2N)). Equal weights; the rule absorbs the
// endpoint singularity exactly.
inline double gauss_chebyshev_weighted(const std::function<double(double)>& f, long n) {
    double s = 0.0;
    const double h = M_PI / (2.0 * n);
    for (long k = 1; k <= n; ++k) s += f(std::cos((2 * k - 1) * h));
    return s * (M_PI / n);
}

// Adaptive Simpson with absolute tolerance. Handles integrable endpoint
// singularities of the outer r-integral in the moment-difference formula.
namespace detail {
inline double simpson(double fa, double fm, double fb, double a, double b) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}
inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b,
                                   double fa, double fm, double fb, double whole, double tol,
                                   int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = simpson(fa, flm, fm, a, m);
    const double right = simpson(fm, frm, fb, m, b);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}
}  // namespace detail

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol = 1e-9, int max_depth = 32) {
    if (!(b > a)) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = detail::simpson(fa, fm, fb, a, b);
    return detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

// Fibonacci lattice on the unit sphere S^2: near-uniform separation at all N.
inline std::vector<Point> fibonacci_sphere(int n) {
    std::vector<Point> pts(n);
    const double golden = M_PI * (1.0 + std::sqrt(5.0));
    for (int k = 0; k < n; ++k) {
        const double c = 1.0 - 2.0 * (k + 0.5) / n;
        const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
        const double th = golden * (k + 0.5);
        pts[k] = {s * std::cos(th), s * std::sin(th), c};
    }
    return pts;
}

// Equally spaced nodes on the unit circle (midpoint rule; spectrally accurate
// for smooth periodic integrands).
inline std::vector<Point> circle_nodes(int n) {
    std::vector<Point> pts(n);
    for (int k = 0; k < n; ++k) {
        const double th = 2.0 * M_PI * (k + 0.5) / n;
        pts[k] = {std::cos(th), std::sin(th), 0.0};
    }
    return pts;
}

// Surface area of the unit sphere S^{m-1} in R^m.
inline double unit_sphere_area(int m) {
    if (m == 1) return 2.0;  // S^0 = two points, counting measure
    return 2.0 * std::pow(M_PI, 0.5 * m) / std::tgamma(0.5 * m);
}

}  // namespace rieszlab
