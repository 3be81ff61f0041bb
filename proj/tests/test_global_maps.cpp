#include <doctest.h>

#include <cmath>
#include <random>

#include "hetnet/errors.hpp"
#include "hetnet/global_maps.hpp"

using namespace hetnet;

TEST_CASE("psi02 and psi10 relabel sections") {
    SectionPoint a{SectionId::Sigma0Out, 0.3, 1.0, 2.0};
    SectionPoint b = psi02(a);
    CHECK(b.section == SectionId::Sigma2In);
    CHECK(b.radial == a.radial);
    CHECK(b.phi1 == a.phi1);
    CHECK(b.phi2 == a.phi2);
    SectionPoint c = psi10({SectionId::Sigma1Out, 0.3, 1.0, 2.0});
    CHECK(c.section == SectionId::Sigma0In);
    try {
        psi10(c);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::SectionMismatch);
    }
}

TEST_CASE("psi21 examples") {
    ModelParams p;
    SectionPoint q{SectionId::Sigma2Out, 0.95, 0.2, 0.01};
    SectionPoint r = psi21(q, 0.0, p);
    CHECK(r.section == SectionId::Sigma1In);
    CHECK(r.radial == doctest::Approx(0.95));
    CHECK(r.phi1 == doctest::Approx(0.01));
    CHECK(r.phi2 == doctest::Approx(0.2));

    SectionPoint s = psi21({SectionId::Sigma2Out, 1.0, 0.3, 0.0}, 0.01, p);
    CHECK(s.phi1 == doctest::Approx(0.0).epsilon(1e-15));

    CHECK(psi21_rectangular_angle(1.0, kPi / 2, 0.01) == doctest::Approx(std::atan2(1.0, 0.01)));
    CHECK(psi21_rectangular_angle(1.0, kPi / 2, 0.01) == doctest::Approx(1.5608).epsilon(1e-4));
    CHECK(psi21_rectangular_angle(1.0, 0.0, 0.01) == 0.0);
}

TEST_CASE("property: psi21 is injective on each C_i^out for small gamma") {
    ModelParams p = preset_params();
    double gamma = p.eps_out / 4 * 0.99;
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> U(0, 1);
    double worst = 0;
    for (int k = 0; k < 10000; ++k) {
        int i = 1 + int(U(rng) < 0.5);
        SectionPoint q{SectionId::Sigma2Out, 1 - p.eps_out * U(rng), kTwoPi * U(rng),
                       p.theta_out(i) + p.eps_out * (2 * U(rng) - 1) * 0.999};
        SectionPoint back = psi21_inverse(psi21(q, gamma, p), gamma, p);
        worst = std::max({worst, std::abs(back.radial - q.radial), std::abs(angle_offset(back.phi1, q.phi1)),
                          std::abs(angle_offset(back.phi2, q.phi2))});
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("property: the unstable torus meets the stable torus") {
    ModelParams p = preset_params();
    for (int i = 1; i <= 2; ++i)
        for (int k = -20; k <= 20; ++k) {
            double phi = p.theta_out(i) + p.eps_out * k / 21.0;
            SectionPoint at0 = psi21({SectionId::Sigma2Out, 1.0, 0.4, phi}, 0.0, p);
            CHECK(at0.radial == 1.0);
        }
    // at gamma > 0 the image of {r2_out = 1} crosses {r1_in = 1} exactly where kappa changes sign
    for (int i = 1; i <= 2; ++i) {
        int changes = 0;
        double prev = 0;
        for (int k = -200; k <= 200; ++k) {
            double phi = p.theta_out(i) + p.eps_out * (k + 0.5) / 201.0;
            double d = psi21({SectionId::Sigma2Out, 1.0, 0.4, phi}, 0.01, p).radial - 1.0;
            if (k > -200 && (d > 0) != (prev > 0)) ++changes;
            prev = d;
        }
        CHECK(changes == 1);
    }
}
