#include "hetnet/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "hetnet/errors.hpp"
#include "hetnet/local_maps.hpp"

namespace hetnet {

// ---------------------------------------------------------------- coefficients

double delta_c(const HHCoefficients& c) { return c.p21 / c.p11; }
double theta_c(const HHCoefficients& c) { return c.p12 / c.p22; }

std::vector<std::string> coefficient_violations(const HHCoefficients& c) {
    std::vector<std::string> v;
    auto finite = std::isfinite(c.p11) && std::isfinite(c.p12) && std::isfinite(c.p21) && std::isfinite(c.p22) &&
                  std::isfinite(c.s1) && std::isfinite(c.s2) && std::isfinite(c.mu1) && std::isfinite(c.mu2);
    if (!finite) {
        v.push_back("non-finite coefficient");
        return v;
    }
    if (!(c.omega1 > 0) || !(c.omega2 > 0)) v.push_back("omega1, omega2 must be positive");
    if (!(c.p11 * c.p22 < 0)) v.push_back("p11*p22 < 0 fails (not the difficult case)");
    if (c.p11 == 0 || c.p22 == 0) return v;
    double d = delta_c(c), t = theta_c(c);
    if (!(d < 0)) v.push_back("delta_c = p21/p11 < 0 fails");
    if (!(t < 0)) v.push_back("theta_c = p12/p22 < 0 fails");
    if (!(d * t > 1)) v.push_back("delta_c*theta_c > 1 fails");
    double q = c.p21 * (c.p21 - c.p11) * c.s1 + c.p12 * (c.p12 - c.p22) * c.s2;
    if (!(q < 0)) v.push_back("p21(p21-p11)s1 + p12(p12-p22)s2 < 0 fails");
    return v;
}

nlohmann::json to_json(const HHCoefficients& c) {
    return {{"p11", c.p11}, {"p12", c.p12}, {"p21", c.p21}, {"p22", c.p22}, {"s1", c.s1},
            {"s2", c.s2},   {"mu1", c.mu1}, {"mu2", c.mu2}, {"omega1", c.omega1}, {"omega2", c.omega2}};
}

HHCoefficients coefficients_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw Error(ErrorKind::Config, "flow coefficients must be an object");
    HHCoefficients c;
    for (auto& [k, val] : j.items()) {
        if (!val.is_number()) throw Error(ErrorKind::Config, "flow." + k + " must be a number");
        double x = val.get<double>();
        if (k == "p11") c.p11 = x;
        else if (k == "p12") c.p12 = x;
        else if (k == "p21") c.p21 = x;
        else if (k == "p22") c.p22 = x;
        else if (k == "s1") c.s1 = x;
        else if (k == "s2") c.s2 = x;
        else if (k == "mu1") c.mu1 = x;
        else if (k == "mu2") c.mu2 = x;
        else if (k == "omega1") c.omega1 = x;
        else if (k == "omega2") c.omega2 = x;
        else throw Error(ErrorKind::Config, "unknown flow key: " + k);
    }
    return c;
}

// ---------------------------------------------------------------- fields

namespace {

double radial1(double r1, double r2, const HHCoefficients& c) {
    double a = r1 * r1, b = r2 * r2;
    return r1 * (c.mu1 + c.p11 * a + c.p12 * b + c.s1 * b * b);
}

double radial2(double r1, double r2, const HHCoefficients& c) {
    double a = r1 * r1, b = r2 * r2;
    return r2 * (c.mu2 + c.p21 * a + c.p22 * b + c.s2 * a * a);
}

void expect_dim(const Vec& s, Eigen::Index n, const char* op) {
    if (s.size() != n) throw Error(ErrorKind::Precondition, std::string(op) + ": wrong state dimension");
}

} // namespace

Vec truncated_field(const Vec& s, const HHCoefficients& c) {
    expect_dim(s, 4, "truncated_field");
    Vec d(4);
    d << radial1(s[0], s[1], c), radial2(s[0], s[1], c), c.omega1, c.omega2;
    return d;
}

Vec truncated_field_rect(const Vec& x, const HHCoefficients& c) {
    expect_dim(x, 4, "truncated_field_rect");
    double a = x[0] * x[0] + x[1] * x[1];
    double b = x[2] * x[2] + x[3] * x[3];
    double f1 = c.mu1 + c.p11 * a + c.p12 * b + c.s1 * b * b;
    double f2 = c.mu2 + c.p21 * a + c.p22 * b + c.s2 * a * a;
    Vec d(4);
    d << f1 * x[0] - c.omega1 * x[1], f1 * x[1] + c.omega1 * x[0], f2 * x[2] - c.omega2 * x[3],
        f2 * x[3] + c.omega2 * x[2];
    return d;
}

EquivarianceReport check_perturbation(const Perturbation& h, unsigned seed) {
    EquivarianceReport rep;
    for (int k = 0; k < 4; ++k)
        if (!h.H[k]) {
            rep.ok = false;
            rep.warnings.push_back("H" + std::to_string(k + 1) + " is empty");
        }
    if (!rep.ok) return rep;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-0.5, 0.5);
    // sign of H under kappa1 and kappa2
    const int s1[4] = {-1, 1, 1, 1};
    const int s2[4] = {1, -1, 1, 1};
    std::array<bool, 4> sym_bad{}, order_bad{};
    std::array<double, 4> scale{};
    const int n = 64;
    std::vector<std::pair<double, double>> pts;
    for (int i = 0; i < n; ++i) pts.emplace_back(U(rng), U(rng));
    for (auto [a, b] : pts)
        for (int k = 0; k < 4; ++k) scale[k] = std::max(scale[k], std::abs(h.H[k](a, b)));
    for (auto [a, b] : pts) {
        for (int k = 0; k < 4; ++k) {
            double v = h.H[k](a, b);
            double tol = 1e-12 * (1.0 + scale[k]);
            if (std::abs(h.H[k](-a, b) - s1[k] * v) > tol || std::abs(h.H[k](a, -b) - s2[k] * v) > tol)
                sym_bad[k] = true;
            if (k < 2 && std::abs(h.H[k](1e-2 * a, 1e-2 * b)) > 1e-11 * std::max(1.0, scale[k])) order_bad[k] = true;
        }
    }
    for (int k = 2; k < 4; ++k)
        if (std::abs(h.H[k](0.0, 0.0)) > 1e-14) order_bad[k] = true;
    for (int k = 0; k < 4; ++k) {
        std::string name = "H" + std::to_string(k + 1);
        if (sym_bad[k]) {
            rep.ok = false;
            rep.warnings.push_back(name + " is not equivariant under the reflections");
        }
        if (order_bad[k]) {
            rep.ok = false;
            rep.warnings.push_back(name + (k < 2 ? " does not vanish to order 6 at the origin" : " does not vanish at the origin"));
        }
    }
    return rep;
}

Vec gaspard_field(const Vec& s, const HHCoefficients& c, double gamma, const Perturbation& h) {
    Vec d = truncated_field(s, c);
    if (gamma == 0.0) return d;
    for (int k = 0; k < 4; ++k) {
        if (!h.H[k]) continue;
        d[k] += gamma * h.H[k](s[0], s[1]);
    }
    return d;
}

HetCurvePoint het_curve(double mu1, const HHCoefficients& c) {
    double t = theta_c(c);
    if (t == 1.0 || !std::isfinite(t)) throw Error(ErrorKind::InvalidParameters, "het_curve: theta_c = 1");
    HetCurvePoint r;
    r.mu1 = mu1;
    r.mu2 = -((delta_c(c) - 1.0) / (t - 1.0)) * mu1;
    if (r.mu2 == 0.0) r.mu2 = 0.0;   // no negative zero in reports
    r.order = 1;
    return r;
}

// ---------------------------------------------------------------- equilibria

namespace {

Eigen::Matrix2d amplitude_jacobian(double r1, double r2, const HHCoefficients& c) {
    double a = r1 * r1, b = r2 * r2;
    Eigen::Matrix2d J;
    J(0, 0) = c.mu1 + 3 * c.p11 * a + c.p12 * b + c.s1 * b * b;
    J(0, 1) = r1 * (2 * c.p12 * r2 + 4 * c.s1 * b * r2);
    J(1, 0) = r2 * (2 * c.p21 * r1 + 4 * c.s2 * a * r1);
    J(1, 1) = c.mu2 + c.p21 * a + 3 * c.p22 * b + c.s2 * a * a;
    return J;
}

Equilibrium make_equilibrium(std::string name, double r1, double r2, const HHCoefficients& c) {
    Equilibrium e;
    e.name = std::move(name);
    e.r1 = r1;
    e.r2 = r2;
    Eigen::EigenSolver<Eigen::Matrix2d> es(amplitude_jacobian(r1, r2, c));
    auto ev = es.eigenvalues();
    std::array<std::complex<double>, 2> v{ev[0], ev[1]};
    std::sort(v.begin(), v.end(), [](auto x, auto y) { return x.real() < y.real(); });
    e.eigenvalues = v;
    e.residual = std::hypot(radial1(r1, r2, c), radial2(r1, r2, c));
    return e;
}

} // namespace

EquilibriaReport amplitude_equilibria(const HHCoefficients& c) {
    auto bad = coefficient_violations(c);
    if (!bad.empty()) throw Error(ErrorKind::InvalidParameters, "amplitude_equilibria: " + bad.front());

    EquilibriaReport rep;
    rep.points.push_back(make_equilibrium("O", 0.0, 0.0, c));
    // On each axis the s-terms drop out and the radial cubic has one positive root at most.
    double X = -c.mu1 / c.p11;
    if (X > 0) rep.points.push_back(make_equilibrium("E1", std::sqrt(X), 0.0, c));
    double Y = -c.mu2 / c.p22;
    if (Y > 0) rep.points.push_back(make_equilibrium("E2", 0.0, std::sqrt(Y), c));

    // Interior: Newton in (X, Y) = (r1^2, r2^2) on
    //   mu1 + p11 X + p12 Y + s1 Y^2 = 0,  mu2 + p21 X + p22 Y + s2 X^2 = 0.
    double ps = std::max({std::abs(c.p11), std::abs(c.p12), std::abs(c.p21), std::abs(c.p22)});
    double ss = std::max({std::abs(c.s1), std::abs(c.s2), 1e-12});
    double R = std::max({1.0, 4.0 * ps / ss, 4.0 * std::abs(X), 4.0 * std::abs(Y)});
    R = std::min(R, 1e6);
    const int G = 24;
    std::vector<std::pair<double, double>> roots;
    for (int i = 0; i < G; ++i)
        for (int k = 0; k < G; ++k) {
            ++rep.seeds;
            double x = R * std::pow(1e-8, 1.0 - (i + 0.5) / G);
            double y = R * std::pow(1e-8, 1.0 - (k + 0.5) / G);
            bool ok = false;
            for (int it = 0; it < 100; ++it) {
                double f = c.mu1 + c.p11 * x + c.p12 * y + c.s1 * y * y;
                double g = c.mu2 + c.p21 * x + c.p22 * y + c.s2 * x * x;
                double a = c.p11, b = c.p12 + 2 * c.s1 * y, cc = c.p21 + 2 * c.s2 * x, d = c.p22;
                double det = a * d - b * cc;
                if (det == 0 || !std::isfinite(det)) break;
                double dx = (f * d - b * g) / det;
                double dy = (a * g - cc * f) / det;
                x -= dx;
                y -= dy;
                if (!std::isfinite(x) || !std::isfinite(y) || std::abs(x) > 1e3 * R || std::abs(y) > 1e3 * R) break;
                if (std::abs(dx) <= 1e-15 * (1 + std::abs(x)) && std::abs(dy) <= 1e-15 * (1 + std::abs(y))) {
                    ok = true;
                    break;
                }
            }
            if (!ok) {
                ++rep.nonconverged;
                continue;
            }
            if (!(x > 0 && y > 0)) continue;
            bool dup = false;
            for (auto [u, v] : roots)
                if (std::abs(u - x) <= 1e-9 * (1 + u) && std::abs(v - y) <= 1e-9 * (1 + v)) dup = true;
            if (!dup) roots.emplace_back(x, y);
        }
    for (auto [u, v] : roots) rep.points.push_back(make_equilibrium("interior", std::sqrt(u), std::sqrt(v), c));
    return rep;
}

// ---------------------------------------------------------------- Dormand-Prince 5(4)

namespace {

constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

struct Crossing {
    size_t index;
    double t;
    Vec y;
    int dir;
};

int crossing_dir(double g0, double g1) {
    if (g0 < 0 && g1 >= 0) return 1;
    if (g0 > 0 && g1 <= 0) return -1;
    return 0;
}

// Bisection on the dense output until |g| <= 1e-12 or the bracket collapses.
std::pair<double, Vec> locate(const DenseSegment& seg, const EventSpec& ev, double ta, double ga, double tb) {
    Vec ya;
    double a = ta, b = tb;
    for (int it = 0; it < 200; ++it) {
        double m = 0.5 * (a + b);
        if (m == a || m == b) break;
        Vec ym = seg.eval(m);
        double gm = ev.g(m, ym);
        if (std::abs(gm) <= 1e-12) return {m, ym};
        if ((gm < 0) == (ga < 0)) {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    return {b, seg.eval(b)};
}

} // namespace

Vec DenseSegment::eval(double t) const {
    double th = (t - t0) / h;
    double th1 = 1.0 - th;
    return r[0] + th * (r[1] + th1 * (r[2] + th * (r[3] + th1 * r[4])));
}

Vec Trajectory::at(double tq) const {
    if (dense.empty()) throw Error(ErrorKind::Precondition, "trajectory has no dense output");
    bool fwd = dense.front().h > 0;
    auto lo = [&](const DenseSegment& s) { return fwd ? s.t0 : s.t0 + s.h; };
    auto hi = [&](const DenseSegment& s) { return fwd ? s.t0 + s.h : s.t0; };
    double tmin = fwd ? lo(dense.front()) : lo(dense.back());
    double tmax = fwd ? hi(dense.back()) : hi(dense.front());
    if (tq < tmin || tq > tmax) throw Error(ErrorKind::Precondition, "time outside the trajectory");
    // segments are ordered along the integration direction
    auto it = std::lower_bound(dense.begin(), dense.end(), tq, [&](const DenseSegment& s, double v) {
        return fwd ? s.t0 + s.h < v : s.t0 + s.h > v;
    });
    if (it == dense.end()) --it;
    return it->eval(tq);
}

Trajectory integrate(const Field& f, const Vec& y0, double t0, double t1, const IntegrateOptions& opt) {
    if (!(opt.tol >= 1e-13 && opt.tol <= 1e-3)) throw Error(ErrorKind::Precondition, "tol must lie in [1e-13, 1e-3]");
    if (!std::isfinite(t0) || !std::isfinite(t1) || t0 == t1)
        throw Error(ErrorKind::Precondition, "integrate: invalid time span");
    if (!y0.allFinite()) throw Error(ErrorKind::NonFinite, "integrate: non-finite start");
    const Eigen::Index n = y0.size();
    const double dir = t1 > t0 ? 1.0 : -1.0;
    const double tol = opt.tol;
    const double atol = opt.atol < 0 ? tol : opt.atol;

    Trajectory tr;
    tr.tol = tol;
    Vec y = y0, ynew(n), k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), err(n);
    double t = t0;
    f(t, y, k1);

    auto norm = [&](const Vec& v, const Vec& ya, const Vec& yb) {
        double s = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            double sc = atol + tol * std::max(std::abs(ya[i]), std::abs(yb[i]));
            s += (v[i] / sc) * (v[i] / sc);
        }
        return std::sqrt(s / double(n));
    };

    double span = std::abs(t1 - t0);
    double h = opt.h_init;
    if (h <= 0) {
        double dn0 = norm(y, y, y), dn1 = norm(k1, y, y);
        h = (dn0 < 1e-5 || dn1 < 1e-5) ? 1e-6 : 0.01 * dn0 / dn1;
        h = std::min(h, span);
    }
    h = std::min(h, span) * dir;

    if (opt.record) {
        tr.t.push_back(t);
        tr.y.push_back(y);
    }
    std::vector<double> gval(opt.events.size());
    for (size_t e = 0; e < opt.events.size(); ++e) gval[e] = opt.events[e].g(t, y);

    bool done = false;
    while (!done) {
        if (tr.accepted + tr.rejected >= opt.max_steps) throw Error(ErrorKind::StepUnderflow, "integrate: step budget exhausted");
        bool last = false;
        if ((t + h - t1) * dir >= 0) {
            h = t1 - t;
            last = true;
        }
        if (std::abs(h) < 16 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) {
            std::ostringstream os;
            os << "step size underflow at t = " << t;
            throw Error(ErrorKind::StepUnderflow, os.str());
        }
        tmp = y + h * a21 * k1;
        f(t + c2 * h, tmp, k2);
        tmp = y + h * (a31 * k1 + a32 * k2);
        f(t + c3 * h, tmp, k3);
        tmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
        f(t + c4 * h, tmp, k4);
        tmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        f(t + c5 * h, tmp, k5);
        tmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        f(t + h, tmp, k6);
        ynew = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
        f(t + h, ynew, k7);
        err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        double en = norm(err, y, ynew);
        if (!std::isfinite(en)) en = 1e10;

        if (en > 1.0) {
            ++tr.rejected;
            h *= std::max(0.2, 0.9 * std::pow(en, -0.2));
            continue;
        }
        if (!ynew.allFinite() || ynew.norm() > opt.max_norm) {
            std::ostringstream os;
            os << "state norm exceeds " << opt.max_norm << " at t = " << t + h;
            throw Error(ErrorKind::BlowUp, os.str());
        }
        ++tr.accepted;
        tr.error_bound = std::max(tr.error_bound, err.cwiseAbs().maxCoeff());

        DenseSegment seg;
        seg.t0 = t;
        seg.h = h;
        seg.r[0] = y;
        seg.r[1] = ynew - y;
        seg.r[2] = h * k1 - seg.r[1];
        seg.r[3] = seg.r[1] - h * k7 - seg.r[2];
        seg.r[4] = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
        double tnew = last ? t1 : t + h;

        // events on this step, ordered along the integration direction
        std::vector<Crossing> hits;
        for (size_t e = 0; e < opt.events.size(); ++e) {
            const auto& ev = opt.events[e];
            double gn = ev.g(tnew, ynew);
            int d = crossing_dir(gval[e], gn);
            if (d != 0 && (ev.direction == 0 || ev.direction == d)) {
                auto [te, ye] = locate(seg, ev, t, gval[e], tnew);
                hits.push_back({e, te, ye, d});
            }
            gval[e] = gn;
        }
        std::sort(hits.begin(), hits.end(), [&](const Crossing& a, const Crossing& b) { return (a.t - b.t) * dir < 0; });
        bool stop = false;
        for (auto& c : hits) {
            tr.events.push_back({opt.events[c.index].name, c.t, c.y, c.dir});
            if (opt.events[c.index].terminal) {
                stop = true;
                tnew = c.t;
                ynew = c.y;
                break;
            }
        }
        if (opt.record) {
            tr.dense.push_back(std::move(seg));
            if (tnew != tr.t.back()) {
                tr.t.push_back(tnew);
                tr.y.push_back(ynew);
            }
        } else {
            tr.t.assign(1, tnew);
            tr.y.assign(1, ynew);
        }
        if (stop || last) break;

        t = tnew;
        y = ynew;
        k1 = k7;
        double fac = en == 0 ? 10.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 10.0);
        h *= fac;
    }
    return tr;
}

std::vector<EventRecord> poincare_cross(const Trajectory& tr, const EventSpec& ev) {
    std::vector<EventRecord> out;
    for (const auto& seg : tr.dense) {
        double ta = seg.t0, tb = seg.t0 + seg.h;
        if (&seg == &tr.dense.back() && !tr.t.empty()) tb = tr.t.back();
        double ga = ev.g(ta, seg.eval(ta)), gb = ev.g(tb, seg.eval(tb));
        int d = crossing_dir(ga, gb);
        if (d == 0 || (ev.direction != 0 && ev.direction != d)) continue;
        auto [t, y] = locate(seg, ev, ta, ga, tb);
        out.push_back({ev.name, t, y, d});
    }
    if (out.empty()) throw Error(ErrorKind::NoCrossing, "no crossing of " + ev.name + " in span");
    if (!tr.dense.empty() && tr.dense.front().h < 0) std::reverse(out.begin(), out.end());
    return out;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& tr) {
    size_t n = tr.y.empty() ? 0 : size_t(tr.y.front().size());
    os << "t";
    for (size_t i = 0; i < n; ++i) os << ",x" << i + 1;
    os << '\n';
    os.precision(17);
    for (size_t k = 0; k < tr.t.size(); ++k) {
        os << tr.t[k];
        for (size_t i = 0; i < n; ++i) os << ',' << tr.y[k][Eigen::Index(i)];
        os << '\n';
    }
}

// ---------------------------------------------------------------- local maps

LocalComparison compare_local(int node, const std::vector<SectionPoint>& samples, const ModelParams& p, double tol) {
    if (node < 0 || node > 2) throw Error(ErrorKind::Precondition, "node must be 0, 1 or 2");
    LocalComparison rep;
    rep.node = node;
    rep.tol = tol;
    const double C = p.C(node), E = p.E(node), eps = p.eps;
    // state (expanding gap, contracting gap, phi1, phi2)
    Field f = [&](double, const Vec& y, Vec& d) {
        d[0] = E * y[0];
        d[1] = -C * y[1];
        d[2] = p.omega1;
        d[3] = p.omega2;
    };
    IntegrateOptions opt;
    opt.tol = tol;
    // gaps down to 1e-8 eps: control the relative error
    opt.atol = 1e-12 * tol;
    opt.record = false;
    opt.events.push_back({"out", [eps](double, const Vec& y) { return y[0] - eps; }, 1, true});

    for (const auto& s : samples) {
        if (s.section != in_section(node)) throw Error(ErrorKind::SectionMismatch, "compare_local: sample on the wrong section");
        double in_gap = node == 1 ? 1.0 - s.radial : s.radial;
        if (in_gap <= 0.0) {
            ++rep.excluded;
            continue;
        }
        ++rep.samples;
        LocalResult ref = pi_node(node, s, p);
        Vec y0(4);
        y0 << in_gap, eps, s.phi1, s.phi2;
        double tmax = 2.0 * (std::log(eps) - std::log(in_gap)) / E + 1.0;
        Trajectory tr = integrate(f, y0, 0.0, tmax, opt);
        if (tr.events.empty()) throw Error(ErrorKind::NoCrossing, "compare_local: out-section not reached");
        const auto& ev = tr.events.back();
        double out_gap = ev.y[1];
        double radial = node == 2 ? 1.0 - out_gap : out_gap;
        rep.max_radial = std::max(rep.max_radial, std::abs(radial - ref.out.radial));
        rep.max_angle = std::max({rep.max_angle, std::abs(ev.y[2] - ref.out.phi1), std::abs(ev.y[3] - ref.out.phi2)});
        rep.max_time = std::max(rep.max_time, std::abs(ev.t - ref.flight_time));
    }
    return rep;
}

LocalComparison compare_local(int node, size_t n, const ModelParams& p, double tol, unsigned seed) {
    if (node < 0 || node > 2) throw Error(ErrorKind::Precondition, "node must be 0, 1 or 2");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::vector<SectionPoint> pts;
    pts.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        double gap = p.eps * std::pow(1e-8, U(rng));
        SectionPoint s;
        s.section = in_section(node);
        s.radial = node == 1 ? 1.0 - gap : gap;
        s.phi1 = kTwoPi * U(rng);
        s.phi2 = kTwoPi * U(rng);
        pts.push_back(s);
    }
    return compare_local(node, pts, p, tol);
}

// ---------------------------------------------------------------- Het shooting

HetShot het_defect(const HHCoefficients& c, double tol) {
    double X = -c.mu1 / c.p11, Y = -c.mu2 / c.p22;
    if (!(X > 0) || !(Y > 0)) throw Error(ErrorKind::Precondition, "het_defect: E1 or E2 absent from the quadrant");
    double r1s = std::sqrt(X), r2s = std::sqrt(Y);
    double lam_u = c.mu1 + c.p12 * Y + c.s1 * Y * Y;   // r1 direction at E2
    double lam_s = c.mu2 + c.p21 * X + c.s2 * X * X;   // r2 direction at E1
    if (!(lam_u > 0) || !(lam_s < 0)) throw Error(ErrorKind::Precondition, "het_defect: E2 -> E1 saddle pattern absent");

    Field f = [&](double, const Vec& y, Vec& d) {
        d[0] = radial1(y[0], y[1], c);
        d[1] = radial2(y[0], y[1], c);
    };
    auto transversal = [r1s, r2s](double, const Vec& y) { return y[0] / r1s - y[1] / r2s; };
    IntegrateOptions opt;
    opt.tol = tol;
    opt.record = false;
    opt.events.push_back({"transversal", transversal, 0, true});
    const double h = 1e-6;
    double tmax = 200.0 / std::min(lam_u, -lam_s);

    Vec u0(2), s0(2);
    u0 << h * r1s, r2s;
    s0 << r1s, h * r2s;
    Trajectory tu = integrate(f, u0, 0.0, tmax, opt);
    Trajectory ts = integrate(f, s0, 0.0, -tmax, opt);
    if (tu.events.empty() || ts.events.empty()) throw Error(ErrorKind::NoCrossing, "het_defect: transversal not reached");
    const Vec& a = tu.events.back().y;
    const Vec& b = ts.events.back().y;
    HetShot shot;
    shot.mu2 = c.mu2;
    shot.unstable_hit = {a[0], a[1]};
    shot.stable_hit = {b[0], b[1]};
    shot.distance = (a - b).norm();
    shot.defect = a[0] >= b[0] ? shot.distance : -shot.distance;
    return shot;
}

HetShootResult het_shoot(const HHCoefficients& c0, double defect_tol, double tol) {
    auto bad = coefficient_violations(c0);
    if (!bad.empty()) throw Error(ErrorKind::InvalidParameters, "het_shoot: " + bad.front());
    HetShootResult res;
    res.mu1 = c0.mu1;
    res.mu2_first_order = het_curve(c0.mu1, c0).mu2;
    HHCoefficients c = c0;
    auto D = [&](double mu2) {
        c.mu2 = mu2;
        ++res.iterations;
        return het_defect(c, tol).defect;
    };

    double m0 = res.mu2_first_order;
    double f0 = D(m0);
    if (std::abs(f0) <= defect_tol) {
        res.mu2 = m0;
        res.defect = std::abs(f0);
        res.converged = true;
        return res;
    }
    // bracket by geometric expansion on both sides
    double a = m0, fa = f0, b = m0, fb = f0;
    double step = 1e-3 * std::abs(m0);
    bool found = false;
    for (int k = 0; k < 40 && !found; ++k, step *= 2) {
        for (double s : {1.0, -1.0}) {
            double m = m0 + s * step;
            double fm;
            try {
                fm = D(m);
            } catch (const Error&) {
                continue;
            }
            if ((fm < 0) != (f0 < 0)) {
                a = m0, fa = f0, b = m, fb = fm;
                found = true;
                break;
            }
        }
    }
    if (!found) throw Error(ErrorKind::NonConvergence, "het_shoot: no sign change of the defect near the first-order value");

    // Illinois regula falsi
    int side = 0;
    double m = a, fm = fa;
    for (int it = 0; it < 200; ++it) {
        m = (a * fb - b * fa) / (fb - fa);
        if (!(std::min(a, b) < m && m < std::max(a, b))) m = 0.5 * (a + b);
        fm = D(m);
        if (std::abs(fm) <= defect_tol || std::abs(b - a) <= 1e-15 * std::abs(m)) break;
        if ((fm < 0) == (fb < 0)) {
            b = m, fb = fm;
            if (side == -1) fa *= 0.5;
            side = -1;
        } else {
            a = m, fa = fm;
            if (side == 1) fb *= 0.5;
            side = 1;
        }
    }
    res.mu2 = m;
    res.defect = std::abs(fm);
    res.converged = res.defect <= defect_tol;
    return res;
}

nlohmann::json to_json(const HetShootResult& r) {
    return {{"mu1", r.mu1},
            {"mu2", r.mu2},
            {"mu2_first_order", r.mu2_first_order},
            {"mu2_shift", r.mu2 - r.mu2_first_order},
            {"defect", r.defect},
            {"iterations", r.iterations},
            {"converged", r.converged}};
}

nlohmann::json to_json(const EquilibriaReport& r) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& e : r.points) {
        nlohmann::json ev = nlohmann::json::array();
        for (auto z : e.eigenvalues) ev.push_back({{"re", z.real()}, {"im", z.imag()}});
        pts.push_back({{"name", e.name}, {"r1", e.r1}, {"r2", e.r2}, {"eigenvalues", ev}, {"residual", e.residual}});
    }
    return {{"equilibria", pts}, {"seeds", r.seeds}, {"nonconverged", r.nonconverged}};
}

nlohmann::json to_json(const LocalComparison& r) {
    return {{"node", r.node},           {"samples", r.samples},     {"excluded", r.excluded},
            {"max_radial", r.max_radial}, {"max_angle", r.max_angle}, {"max_time", r.max_time},
            {"tol", r.tol}};
}

} // namespace hetnet
