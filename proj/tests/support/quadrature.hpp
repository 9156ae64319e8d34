#pragma once

// Test-side quadrature oracles, independent of the library's grid sums.

#include <cmath>
#include <functional>

namespace testsupport {

inline double simpson_recurse(const std::function<double(double)>& f, double a, double b,
                              double fa, double fm, double fb, double whole, double tol,
                              int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return simpson_recurse(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
           simpson_recurse(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

/// Adaptive Simpson quadrature of f over [a, b].
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-12, int max_depth = 40) {
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_recurse(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

/// Tensor Simpson on [ax,bx] x [ay,by] with n panels per axis (n even).
inline double integrate_2d(const std::function<double(double, double)>& f, double ax, double bx,
                           double ay, double by, int n = 512) {
    const double hx = (bx - ax) / n, hy = (by - ay) / n;
    auto wt = [n](int k) { return (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0); };
    double total = 0.0;
    for (int i = 0; i <= n; ++i) {
        double row = 0.0;
        for (int j = 0; j <= n; ++j) row += wt(j) * f(ax + i * hx, ay + j * hy);
        total += wt(i) * row;
    }
    return total * hx * hy / 9.0;
}

} // namespace testsupport
