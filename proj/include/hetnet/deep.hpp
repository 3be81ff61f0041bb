#pragma once

// Log-depth form of the return map, shared by the double and MPFR code paths.
//
// A point of Sigma1In is stored as (lam, x, phi1, branch):
//   lam   = ln(eps) - ln(1 - r1_in)          (depth below the chart edge)
//   psi   = phi2 + xi*omega2*lam             (phi2 of the image under G)
//   x     = psi - theta_branch_out, reduced to [-pi, pi)
// In these variables one return is
//   rho'  = eps*exp(-delta*lam) + gamma*kappa_i(x)        (= 1 - r1_in')
//   lam'  = ln(eps) - ln(rho')
//   phi1' = theta_i_in + x
//   psi'  = phi1 + xi*omega1*lam + xi*omega2*lam'
// and the flight time of the return is xi*lam.

#include <array>
#include <cmath>

#include "hetnet/model.hpp"
#include "hetnet/surface.hpp"

namespace hetnet {

template <class T>
struct DeepModel {
    T eps, log_eps;
    T delta, xi;
    T xw1, xw2;          // xi*omega1, xi*omega2
    T gamma;
    T window;            // eps_out, angular half-width of C_i^out
    T in_window;         // half-width used to read the branch back from phi1_in
    T lam_min;           // depth at which 1 - r2_out = eps_out
    std::array<T, 3> theta_out;  // indices 1, 2
    std::array<T, 3> theta_in;
    SurfaceShape<T> shape;
    T pi, two_pi;
};

template <class T>
struct BoxState {
    T lam{};
    T x{};
    T phi1{};
    int branch = 1;      // nearest connection angle
    bool in_region = false;
};

template <class T>
T wrap_offset(const DeepModel<T>& m, const T& a) {
    using std::floor;
    T r = a - m.two_pi * floor((a + m.pi) / m.two_pi);
    return r;  // in [-pi, pi)
}

template <class T>
T wrap_angle(const DeepModel<T>& m, const T& a) {
    using std::floor;
    return a - m.two_pi * floor(a / m.two_pi);
}

template <class T>
DeepModel<T> make_deep_model(const ModelParams& p, const DerivedConstants& d, const T& gamma, const T& pi) {
    using std::cos;
    using std::log;
    using std::sin;
    DeepModel<T> m;
    m.pi = pi;
    m.two_pi = 2 * pi;
    m.eps = T(p.eps);
    m.log_eps = log(m.eps);
    // Recompute delta and xi in T from the raw rates so MPFR runs are not
    // limited by the double-precision derived constants.
    T C0(p.C0), E0(p.E0), C1(p.C1), E1(p.E1), C2(p.C2), E2(p.E2);
    m.delta = (C0 / E0) * (C1 / E1) * (C2 / E2);
    m.xi = (1 / E1) * (1 + C1 / E0 + C0 * C1 / (E0 * E2));
    (void)d;
    m.xw1 = m.xi * T(p.omega1);
    m.xw2 = m.xi * T(p.omega2);
    m.gamma = gamma;
    m.window = T(p.eps_out);
    m.in_window = T(p.eps_out);
    m.lam_min = (m.log_eps - log(T(p.eps_out))) / m.delta;
    m.theta_out = {T(0), T(p.theta1_out), T(p.theta2_out)};
    m.theta_in = {T(0), T(p.theta1_in), T(p.theta2_in)};
    T diff = T(p.theta2_out) - T(p.theta1_out);
    T half = wrap_angle(m, diff) / 2;
    m.shape = {T(p.surf_amp), sin(half), cos(half)};
    return m;
}

// Branch and offset of an angle with respect to the two out angles.
template <class T>
void classify_psi(const DeepModel<T>& m, const T& psi, int& branch, T& x) {
    using std::fabs;
    T x1 = wrap_offset(m, psi - m.theta_out[1]);
    T x2 = wrap_offset(m, psi - m.theta_out[2]);
    if (fabs(x1) <= fabs(x2)) {
        branch = 1;
        x = x1;
    } else {
        branch = 2;
        x = x2;
    }
}

template <class T>
bool inside_region(const DeepModel<T>& m, const T& lam, const T& x) {
    return lam >= m.lam_min && x >= -m.window && x < m.window;
}

template <class T>
BoxState<T> box_from_angles(const DeepModel<T>& m, const T& lam, const T& phi1, const T& phi2) {
    BoxState<T> s;
    s.lam = lam;
    s.phi1 = phi1;
    classify_psi(m, phi2 + m.xw2 * lam, s.branch, s.x);
    s.in_region = inside_region(m, s.lam, s.x);
    return s;
}

template <class T>
T phi2_of(const DeepModel<T>& m, const BoxState<T>& s) {
    return m.theta_out[s.branch] + s.x - m.xw2 * s.lam;
}

enum class StepStatus { Ok, Escaped, CrossedStableManifold, LeftChart };

template <class T>
struct StepResult {
    StepStatus status = StepStatus::Ok;
    BoxState<T> next;
    T rho{};      // 1 - r1_in of the image
    T flight{};   // xi * lam
};

// One return. The current point must be inside its out region.
template <class T>
StepResult<T> deep_step(const DeepModel<T>& m, const BoxState<T>& s) {
    using std::exp;
    using std::log;
    StepResult<T> r;
    if (!s.in_region) {
        r.status = StepStatus::Escaped;
        return r;
    }
    T sigma = m.eps * exp(-m.delta * s.lam);
    r.rho = sigma + m.gamma * kappa_offset(m.shape, s.branch, s.x);
    r.flight = m.xi * s.lam;
    if (!(r.rho > 0)) {
        r.status = StepStatus::CrossedStableManifold;
        return r;
    }
    if (r.rho > m.eps) {
        r.status = StepStatus::LeftChart;
        return r;
    }
    T lam2 = m.log_eps - log(r.rho);
    r.next.lam = lam2;
    r.next.phi1 = m.theta_in[s.branch] + s.x;
    T psi = s.phi1 + m.xw1 * s.lam + m.xw2 * lam2;
    classify_psi(m, psi, r.next.branch, r.next.x);
    r.next.in_region = inside_region(m, r.next.lam, r.next.x);
    return r;
}

// Log form of g_inverse: 1 - r2_out = sigma  ->  lam = (ln eps - ln sigma) / delta.
template <class T>
T g_inverse_log(const DeepModel<T>& m, const T& sigma) {
    using std::log;
    return (m.log_eps - log(sigma)) / m.delta;
}

template <class T>
struct InverseResult {
    bool ok = false;
    BoxState<T> prev;
};

// One backward return: Psi21^{-1} followed by g_inverse. `s` is the current point,
// its branch/x describe psi of the current point; the preimage branch comes from phi1.
template <class T>
InverseResult<T> deep_inverse_step(const DeepModel<T>& m, const BoxState<T>& s) {
    using std::exp;
    using std::fabs;
    InverseResult<T> r;
    T o1 = wrap_offset(m, s.phi1 - m.theta_in[1]);
    T o2 = wrap_offset(m, s.phi1 - m.theta_in[2]);
    int i = fabs(o1) <= fabs(o2) ? 1 : 2;
    T x = i == 1 ? o1 : o2;
    if (!(x >= -m.in_window && x < m.in_window)) return r;
    T sigma = m.eps * exp(-s.lam) - m.gamma * kappa_offset(m.shape, i, x);
    if (!(sigma > 0)) return r;
    T lam = g_inverse_log(m, sigma);
    T phi2_now = phi2_of(m, s);
    r.prev.lam = lam;
    r.prev.x = x;
    r.prev.branch = i;
    r.prev.phi1 = phi2_now - m.xw1 * lam;
    r.prev.in_region = inside_region(m, lam, x);
    r.ok = r.prev.in_region;
    return r;
}

// Derivative of (lam', x', phi1') with respect to (lam, x, phi1), row major.
template <class T>
std::array<T, 9> deep_jacobian(const DeepModel<T>& m, const BoxState<T>& s) {
    using std::exp;
    T sigma = m.eps * exp(-m.delta * s.lam);
    T rho = sigma + m.gamma * kappa_offset(m.shape, s.branch, s.x);
    T a = m.delta * sigma / rho;
    T b = -m.gamma * dkappa_offset(m.shape, s.branch, s.x) / rho;
    return {a, b, T(0),
            m.xw1 + m.xw2 * a, m.xw2 * b, T(1),
            T(0), T(1), T(0)};
}

} // namespace hetnet
