#include <doctest.h>

#include <cmath>
#include <random>

#include "hetnet/errors.hpp"
#include "hetnet/sections.hpp"

using namespace hetnet;

TEST_CASE("reduce_angle examples") {
    auto a = reduce_angle(0.0);
    CHECK(a.principal == 0.0);
    CHECK(a.winding == 0);
    auto b = reduce_angle(5 * kPi);
    CHECK(b.principal == doctest::Approx(kPi));
    CHECK(b.winding == 2);
    auto c = reduce_angle(-kPi / 2);
    CHECK(c.principal == doctest::Approx(3 * kPi / 2));
    CHECK(c.winding == -1);
}

TEST_CASE("cartesian charts") {
    ModelParams p;
    p.eps = 1.0;
    State4 s = to_cartesian({SectionId::Sigma0In, 0.0, 0.0, 0.0}, p);
    CHECK(s.x1 == doctest::Approx(1));
    CHECK(s.x2 == doctest::Approx(0));
    CHECK(s.x3 == doctest::Approx(0));
    CHECK(s.x4 == doctest::Approx(0));

    State4 t = to_cartesian({SectionId::Sigma2Out, 1.0, kPi / 2, 0.0}, p);
    CHECK(t.x1 == doctest::Approx(0).epsilon(1e-15));
    CHECK(t.x2 == doctest::Approx(1));
    CHECK(t.x3 == doctest::Approx(1));
    CHECK(t.x4 == doctest::Approx(0));

    CHECK_THROWS_AS(to_section({2, 0, 0, 0}, SectionId::Sigma0In, p), Error);
}

TEST_CASE("property: reduce_angle is 2pi-periodic") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-10, 10);
    std::uniform_int_distribution<long> K(-1000000, 1000000);
    for (int i = 0; i < 2000; ++i) {
        double x = U(rng);
        long k = K(rng);
        double a = reduce_angle(x).principal, b = reduce_angle(std::fma(kTwoPi, double(k), x)).principal;
        double d = std::abs(a - b);
        d = std::min(d, kTwoPi - d);
        CHECK(d < 1e-9);
    }
}

TEST_CASE("property: chart round trip on every section") {
    ModelParams p;
    p.eps = 0.5;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(0, 1);
    const SectionId ids[] = {SectionId::Sigma0In, SectionId::Sigma0Out, SectionId::Sigma1In,
                             SectionId::Sigma1Out, SectionId::Sigma2In, SectionId::Sigma2Out};
    for (SectionId id : ids) {
        double worst = 0;
        for (int i = 0; i < 10000; ++i) {
            SectionPoint q{id, 0.05 + 0.9 * U(rng), kTwoPi * U(rng), kTwoPi * U(rng)};
            SectionPoint r = to_section(to_cartesian(q, p), id, p);
            worst = std::max({worst, std::abs(r.radial - q.radial), std::abs(angle_offset(r.phi1, q.phi1)),
                              std::abs(angle_offset(r.phi2, q.phi2))});
        }
        CHECK(worst < 1e-12);
    }
}

TEST_CASE("angle_offset range") {
    CHECK(angle_offset(0.1, 0.1 + kTwoPi) == doctest::Approx(0).epsilon(1e-12));
    double d = angle_offset(0.0, 3.0);
    CHECK(d >= -kPi);
    CHECK(d < kPi);
}
