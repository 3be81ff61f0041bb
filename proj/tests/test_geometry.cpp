#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "hetnet/errors.hpp"
#include "hetnet/geometry.hpp"
#include "hetnet/return_map.hpp"

using namespace hetnet;

namespace {

MeridianProfile random_quadratic(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> U(-1, 1);
    double a = U(rng), b = U(rng), c = U(rng), d = U(rng);
    MeridianProfile m;
    m.value = [=](double u, double v) { return a + b * u * u + c * v * v + d * u * v; };
    m.du = [=](double u, double v) { return 2 * b * u + d * v; };
    m.dv = [=](double u, double v) { return 2 * c * v + d * u; };
    return m;
}

double claim_ratio(const ModelParams& p) {
    auto d = derived_constants(p);
    return d.xi * p.omega1 / d.delta;
}

} // namespace

TEST_CASE("upsilon examples") {
    ModelParams p;   // delta = 8, xi = 7, omega1 = 1
    auto zero = constant_profile(0.0);
    CHECK(upsilon(1 - std::exp(-8.0), 0.3, zero, p) == doctest::Approx(7));
    for (double r2 : {0.1, 0.5, 0.99, 1 - 1e-9})
        CHECK(upsilon(r2, 1.0, zero, p) == doctest::Approx(-(7.0 / 8.0) * std::log1p(-r2)));
    auto c = constant_profile(0.75);
    for (double r2 : {0.2, 0.9, 1 - 1e-6})
        CHECK(upsilon(r2, 2.0, c, p) - upsilon(r2, 2.0, zero, p) == doctest::Approx(0.75));
}

TEST_CASE("remainder examples") {
    ModelParams p = preset_params();
    for (double s : {1e-2, 1e-4, 1e-7}) CHECK(remainder(1 - s, 0.4, constant_profile(2.0), p).R == 0.0);
    auto q = quadratic_profile();
    for (int k = 0; k < 64; ++k) CHECK(std::abs(remainder(1 - 1e-6, kTwoPi * k / 64, q, p).R) < 1e-3);

    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> U(0, 1);
    int ok = 0;
    for (int k = 0; k < 100; ++k) {
        auto xi = random_quadratic(rng);
        double s = std::pow(10.0, -1 - 5 * U(rng));
        if (remainder(1 - s, kTwoPi * U(rng), xi, p).fd_ok) ++ok;
    }
    CHECK(ok == 100);
}

TEST_CASE("classify_spiral examples") {
    std::vector<SpiralSample> log_spiral, flat;
    for (int k = 0; k < 400; ++k) {
        double s = std::exp(25.0 * k / 399);
        log_spiral.push_back({std::log(s), 0.3 + 1 / s});
        flat.push_back({1.0, 0.3 + 1 / s});
    }
    auto v = classify_spiral(log_spiral);
    CHECK(v.is_spiral);
    CHECK(v.limit_h == doctest::Approx(0.3).epsilon(1e-9));
    CHECK_FALSE(classify_spiral(flat).is_spiral);

    ModelParams p;
    std::vector<SpiralSample> image;
    for (int k = 0; k < 400; ++k) {
        double t = 1 + 9.0 * k / 399;
        SectionPoint q = g_closed({SectionId::Sigma1In, 1 - std::exp(-t), 0.2, 0.7}, p);
        image.push_back({q.phi2, 1 - q.radial});
    }
    CHECK(classify_spiral(image).is_spiral);
}

TEST_CASE("sheet images") {
    ModelParams p = preset_params();
    SheetGrid g;
    CHECK(sheet_image(constant_profile(0.0), g, p).all_spiral);
    CHECK(sheet_image(quadratic_profile(), g, p).all_spiral);
    CHECK(sheet_preimage(quadratic_profile(), g, p).all_spiral);

    SheetGrid shallow = g;
    shallow.t_max = 2.0;
    SheetImage s = sheet_image(constant_profile(0.0), shallow, p);
    CHECK_FALSE(s.all_spiral);
    CHECK(s.slices.front().verdict.reason == "lifted angle span below threshold");
}

TEST_CASE("property: spiralling-sheet limits along 1 - r2") {
    ModelParams p = preset_params();
    auto xi = quadratic_profile();
    double target = claim_ratio(p);
    double prev1 = INFINITY, prev2 = INFINITY;
    for (double s : {1e-3, 1e-4, 1e-5, 1e-6}) {
        double m1 = 0, m2 = 0;
        for (int k = 0; k < 64; ++k) {
            double phi = kTwoPi * k / 64;
            m1 = std::max(m1, std::abs(remainder(1 - s, phi, xi, p).lhs - target));
            m2 = std::max(m2, std::abs(dupsilon_dphi2(1 - s, phi, xi, p)));
        }
        CHECK(m1 < prev1);
        CHECK(((m2 < prev2) || m2 == 0.0));   // the derivative may vanish identically
        prev1 = m1;
        prev2 = m2;
    }
    CHECK(prev1 < 1e-2 * target);
    CHECK(prev2 < 1e-2);
}

TEST_CASE("property: eta is increasing near the torus") {
    ModelParams p = preset_params();
    auto d = derived_constants(p);
    double k = d.delta / (d.xi * p.omega1);
    auto xi = quadratic_profile();
    for (int j = 0; j < 64; ++j) {
        double phi = kTwoPi * j / 64;
        double prev = -INFINITY;
        for (int m = 0; m <= 60; ++m) {
            double s = std::pow(10.0, -2.0 - 6.0 * m / 60);
            double eta = 1 - std::exp(-k * upsilon(1 - s, phi, xi, p));
            CHECK(eta > prev);
            prev = eta;
        }
    }
}

TEST_CASE("property: scrolls") {
    ModelParams p = preset_params();
    SheetGrid g;
    for (int region : {1, 2}) {
        ScrollReport r = scroll_check(region, g, p);
        CHECK(r.both_spiral);
        CHECK(r.interlaced);
        CHECK(r.checked_angles > 0);
    }
}

TEST_CASE("subsidiary connections") {
    ModelParams p = preset_params();
    try {
        find_connections(0.0, 10, 15, p);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::CoincidentManifolds);
    }
    auto curves = find_connections(0.01, 10, 15, p);
    CHECK(curves.size() == 12);
    std::map<int, int> count;
    std::map<int, double> gap;
    for (const auto& c : curves) {
        ++count[c.turn];
        gap[c.turn] = std::max(gap[c.turn], c.max_gap);
        CHECK(c.points.size() > 0);
    }
    auto d = derived_constants(p);
    double rate = kTwoPi / (d.xi * p.omega2);
    for (int N = 10; N <= 15; ++N) CHECK(count[N] == 2);
    for (int N = 10; N < 15; ++N) CHECK(std::log(gap[N] / gap[N + 1]) == doctest::Approx(rate).epsilon(0.1));
}
