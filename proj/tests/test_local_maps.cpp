#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "hetnet/errors.hpp"
#include "hetnet/local_maps.hpp"

using namespace hetnet;

namespace {

// Fixed-step RK4 on the node's linear system up to the exit event. The last partial
// step is found by bisection on its length. Independent of the library integrator.
struct Rk4Exit {
    double t, out_gap;
};

Rk4Exit rk4_exit(double E, double C, double in_gap, double eps, double h) {
    // state: expanding gap u, contracting gap w
    auto f = [&](const std::array<double, 2>& y) { return std::array<double, 2>{E * y[0], -C * y[1]}; };
    std::array<double, 2> y{in_gap, eps};
    double t = 0;
    for (;;) {
        auto step = [&](double dt) {
            auto k1 = f(y);
            std::array<double, 2> a{y[0] + 0.5 * dt * k1[0], y[1] + 0.5 * dt * k1[1]};
            auto k2 = f(a);
            std::array<double, 2> b{y[0] + 0.5 * dt * k2[0], y[1] + 0.5 * dt * k2[1]};
            auto k3 = f(b);
            std::array<double, 2> c{y[0] + dt * k3[0], y[1] + dt * k3[1]};
            auto k4 = f(c);
            return std::array<double, 2>{y[0] + dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
                                         y[1] + dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])};
        };
        auto next = step(h);
        if (next[0] >= eps) {
            double lo = 0, hi = h;
            for (int it = 0; it < 200 && hi - lo > 0; ++it) {
                double mid = 0.5 * (lo + hi);
                if (mid == lo || mid == hi) break;
                (step(mid)[0] < eps ? lo : hi) = mid;
            }
            auto last = step(hi);
            return {t + hi, last[1]};
        }
        y = next;
        t += h;
    }
}

ModelParams unit_params() {
    ModelParams p;
    p.eps = 1.0;
    return p;
}

} // namespace

TEST_CASE("pi0 examples") {
    ModelParams p = unit_params();
    auto r = pi0({SectionId::Sigma0In, 1.0, 0.0, 0.0}, p);
    CHECK(r.out.radial == doctest::Approx(1));
    CHECK(r.flight_time == 0.0);
    CHECK(r.out.phi1 == 0.0);
    CHECK(r.out.phi2 == 0.0);

    p.E0 = 1; p.C0 = 2; p.omega1 = 1; p.omega2 = 3;
    auto s = pi0({SectionId::Sigma0In, std::exp(-1.0), 0.3, 0.4}, p);
    CHECK(s.flight_time == doctest::Approx(1));
    CHECK(s.out.radial == doctest::Approx(std::exp(-2.0)));
    CHECK(s.out.phi1 == doctest::Approx(1.3));
    CHECK(s.out.phi2 == doctest::Approx(3.4));
    // RK4 oracle on the same system
    auto o = rk4_exit(1, 2, std::exp(-1.0), 1.0, 1e-3);
    CHECK(o.t == doctest::Approx(1).epsilon(1e-9));
    CHECK(o.out_gap == doctest::Approx(std::exp(-2.0)).epsilon(1e-9));

    try {
        pi0({SectionId::Sigma0In, 0.0, 0, 0}, p);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DomainStableManifold);
    }
}

TEST_CASE("pi1 examples") {
    ModelParams p = unit_params();
    auto r = pi1({SectionId::Sigma1In, 0.0, 0.2, 0.3}, p);
    CHECK(r.flight_time == 0.0);
    CHECK(r.out.radial == doctest::Approx(1));
    CHECK(r.out.phi1 == 0.2);
    CHECK(r.out.phi2 == 0.3);

    p.E1 = 1; p.C1 = 3; p.omega1 = 2;
    auto s = pi1({SectionId::Sigma1In, 1 - std::exp(-1.0), 0.5, 0}, p);
    CHECK(s.flight_time == doctest::Approx(1));
    CHECK(s.out.radial == doctest::Approx(std::exp(-3.0)));
    CHECK(s.out.phi1 == doctest::Approx(2.5));

    try {
        pi1({SectionId::Sigma1In, 1.0, 0, 0}, p);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DomainStableManifold);
    }
}

TEST_CASE("pi2 examples") {
    ModelParams p = unit_params();
    auto r = pi2({SectionId::Sigma2In, 1.0, 0.2, 0.3}, p);
    CHECK(r.flight_time == 0.0);
    CHECK(r.out.radial == doctest::Approx(0).epsilon(1e-15));
    CHECK(r.out.phi1 == 0.2);

    p.E2 = 2; p.C2 = 5;
    auto s = pi2({SectionId::Sigma2In, std::exp(-2.0), 0, 0}, p);
    CHECK(s.flight_time == doctest::Approx(1));
    CHECK(s.out.radial == doctest::Approx(1 - std::exp(-5.0)));

    try {
        pi2({SectionId::Sigma2In, 0.0, 0, 0}, p);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DomainStableManifold);
    }
}

TEST_CASE("pi_inverse") {
    ModelParams p = unit_params();
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> U(0, 1);
    for (int i = 0; i < 1000; ++i) {
        SectionPoint q{SectionId::Sigma0In, std::pow(1e-6, U(rng)), kTwoPi * U(rng), kTwoPi * U(rng)};
        SectionPoint back = pi_inverse(0, pi0(q, p).out, p);
        CHECK(back.radial == doctest::Approx(q.radial).epsilon(1e-12));
        CHECK(back.phi1 == doctest::Approx(q.phi1).epsilon(1e-12));
        CHECK(back.phi2 == doctest::Approx(q.phi2).epsilon(1e-12));
    }
    auto in = pi_inverse(0, {SectionId::Sigma0Out, std::exp(-2.0), 0, 0}, p);
    CHECK(in.radial == doctest::Approx(std::exp(-1.0)));
    try {
        pi_inverse(2, {SectionId::Sigma2Out, 1.0, 0, 0}, p);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ImageRange);
    }
    CHECK_THROWS_AS(pi0({SectionId::Sigma1In, 0.5, 0, 0}, p), Error);
}

TEST_CASE("property: flight times decrease with the distance to the stable manifold") {
    ModelParams p = preset_params();
    for (int node = 0; node < 3; ++node) {
        double prev = INFINITY;
        for (int k = 0; k <= 60; ++k) {
            double gap = p.eps * std::pow(10.0, -12.0 + 0.2 * k);
            if (gap > p.eps) break;
            SectionPoint q{in_section(node), node == 1 ? 1 - gap : gap, 0, 0};
            double t = pi_node(node, q, p).flight_time;
            CHECK(t >= 0);
            CHECK(t < prev);
            prev = t;
        }
    }
}

TEST_CASE("property: closed forms agree with RK4 over log-spaced inputs") {
    ModelParams p = preset_params();
    for (int node = 0; node < 3; ++node) {
        double worst = 0;
        for (int k = 0; k < 1000; ++k) {
            double gap = p.eps * std::pow(10.0, -6.0 * (k + 0.5) / 1000);
            SectionPoint q{in_section(node), node == 1 ? 1 - gap : gap, 0.1, 0.2};
            auto r = pi_node(node, q, p);
            auto o = rk4_exit(p.E(node), p.C(node), gap, p.eps, 5e-3);
            double out_gap = node == 2 ? 1 - r.out.radial : r.out.radial;
            worst = std::max({worst, std::abs(o.t - r.flight_time) / r.flight_time,
                              std::abs(o.out_gap - out_gap) / out_gap});
        }
        CHECK(worst < 1e-8);
    }
}

TEST_CASE("property: angle increments are omega times the flight time") {
    ModelParams p = preset_params();
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> U(0, 1);
    for (int node = 0; node < 3; ++node)
        for (int k = 0; k < 200; ++k) {
            double gap = p.eps * std::pow(1e-10, U(rng));
            SectionPoint q{in_section(node), node == 1 ? 1 - gap : gap, U(rng), U(rng)};
            auto r = pi_node(node, q, p);
            CHECK(r.out.phi1 == q.phi1 + p.omega1 * r.flight_time);
            CHECK(r.out.phi2 == q.phi2 + p.omega2 * r.flight_time);
        }
}
