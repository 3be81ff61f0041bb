#pragma once

// Model surface of W^u(C2) pushed into Sigma1In. Psi21 moves the radial
// coordinate by -gamma * kappa(phi2_out) with
//
//   kappa(phi) = surf_amp * (cos(phi - mid) - cos(half)),
//   mid = (theta1_out + theta2_out) / 2,  half = (theta2_out - theta1_out) / 2,
//
// which vanishes exactly on phi = theta1_out and phi = theta2_out. Near theta_i
// the offset form below avoids cancellation:
//
//   kappa_i(x) = A (s_i sin x sin(half) - 2 sin^2(x/2) cos(half)),  s_1 = +1, s_2 = -1.
//
// Everything here is templated so it runs in double and in MPFR.

#include <cmath>

#include "hetnet/errors.hpp"

namespace hetnet {

template <class T>
struct SurfaceShape {
    T amp;
    T sin_half;
    T cos_half;
};

template <class T>
T kappa_offset(const SurfaceShape<T>& s, int branch, const T& x) {
    using std::sin;
    T sx = sin(x);
    T sh = sin(x / 2);
    T sign = branch == 1 ? T(1) : T(-1);
    return s.amp * (sign * sx * s.sin_half - 2 * sh * sh * s.cos_half);
}

template <class T>
T dkappa_offset(const SurfaceShape<T>& s, int branch, const T& x) {
    using std::cos;
    using std::sin;
    T sign = branch == 1 ? T(1) : T(-1);
    return s.amp * (sign * cos(x) * s.sin_half - sin(x) * s.cos_half);
}

// Solves kappa_i(x) = y for x near 0 (the monotone piece through the zero).
// `guess`, when given, replaces the linear starting value.
template <class T>
T kappa_offset_inverse(const SurfaceShape<T>& s, int branch, const T& y, const T& rel_tol, const T* guess = nullptr) {
    using std::fabs;
    T sign = branch == 1 ? T(1) : T(-1);
    T x = guess ? *guess : y / (s.amp * sign * s.sin_half);
    for (int it = 0; it < 200; ++it) {
        T f = kappa_offset(s, branch, x) - y;
        T d = dkappa_offset(s, branch, x);
        if (d == 0) break;
        T dx = f / d;
        x -= dx;
        if (fabs(dx) <= rel_tol * fabs(x) || dx == 0) return x;
    }
    T f = kappa_offset(s, branch, x) - y;
    if (fabs(f) <= rel_tol * (fabs(y) + rel_tol)) return x;
    throw Error(ErrorKind::NonConvergence, "kappa inverse did not converge");
}

} // namespace hetnet
