#include <doctest.h>

#include <cmath>
#include <set>

#include "hetnet/errors.hpp"
#include "hetnet/horseshoe.hpp"
#include "hetnet/return_map.hpp"

using namespace hetnet;

namespace {

double regression_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double n = double(x.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace

TEST_CASE("shell constants") {
    ModelParams p;
    auto d = derived_constants(p);
    // omega2 chosen so that 2 pi delta / (xi omega2) = 2
    p.omega2 = kPi * d.delta / d.xi;
    for (int N = 1; N <= 6; ++N) CHECK(shell_a(N, p) == doctest::Approx(std::exp(-2.0 * N)));

    ModelParams q = preset_params();
    auto dq = derived_constants(q);
    for (int N = 1; N <= 10; ++N)
        CHECK(shell_a(N, q) / shell_a(N + 1, q) ==
              doctest::Approx(std::exp(kTwoPi * dq.delta / (dq.xi * q.omega2))).epsilon(1e-12));

    ModelParams r;   // eps_out = 0.1, delta = 8, xi = 7, omega2 = 2
    CHECK(n_threshold(r) == doctest::Approx(-std::log(0.1) * 14 / (16 * kPi)));
    CHECK(n_threshold(r) == doctest::Approx(0.64).epsilon(0.01));
    CHECK_THROWS_AS(out_slab(0, 1, r), Error);
    CHECK_NOTHROW(out_slab(1, 1, r));
}

TEST_CASE("slab boundaries and winding") {
    ModelParams p;
    const int N = 2;
    InSlab s = in_slab_boundaries(N, 1, p, 32);
    CHECK(s.forward_residual < 1e-9);
    const auto& el = s.faces[int(Face::EL)].front();
    CHECK(el.phi2 == doctest::Approx(-p.eps_out - kTwoPi * N).epsilon(1e-12));
    auto d = derived_constants(p);
    for (const auto& b : s.faces[int(Face::TI)])
        CHECK(b.gap == doctest::Approx(std::exp(-kTwoPi * N / (d.xi * p.omega2))).epsilon(1e-12));
    WindingReport w = winding_check(s, p);
    CHECK(w.ok);
    CHECK(w.phi2_span[int(Face::EL)] == doctest::Approx(kTwoPi).epsilon(1e-12));
    CHECK(w.phi2_span[int(Face::ER)] == doctest::Approx(kTwoPi).epsilon(1e-12));
}

TEST_CASE("vanishing window") {
    ModelParams p;
    p.eps_out = 0.0;
    CHECK_THROWS_AS(out_slab(5, 1, p), Error);
    p.eps_out = 1e-12;
    int N = int(std::ceil(n_threshold(p))) + 1;
    InSlab s = in_slab_boundaries(N, 1, p, 8);
    WindingReport w = winding_check(s, p);
    CHECK(w.phi2_span[int(Face::TI)] < 1e-11);
    CHECK(w.phi2_span[int(Face::TO)] < 1e-11);
}

TEST_CASE("Conley-Moser conditions") {
    ModelParams p = preset_params();
    std::vector<double> ns, lognu;
    for (int N = 2; N <= 7; ++N) {
        ConleyMoserReport r = verify_conley_moser(N, 0.01, p, 32);
        CHECK(r.pass);
        CHECK(r.width_S == doctest::Approx(shell_b(N, p) - shell_b(N + 1, p)).epsilon(1e-12));
        CHECK(r.nu_h < 1);
        CHECK(r.nu_v < 1);
        ns.push_back(N);
        lognu.push_back(std::log(r.nu_h));
    }
    CHECK(regression_slope(ns, lognu) == doctest::Approx(-kTwoPi).epsilon(0.15));

    ConleyMoserReport bad;
    CHECK_NOTHROW(bad = verify_conley_moser(2, 0.5, p, 16));
    CHECK_FALSE(bad.pass);
    ConleyMoserReport zero = verify_conley_moser(2, 0.0, p, 16);
    CHECK_FALSE(zero.pass);
}

TEST_CASE("word realization") {
    ModelParams p = preset_params();
    SUBCASE("the one-letter word is a near-periodic point") {
        WordRealization r = realize_word({1}, 2, 0.01, p);
        CHECK(itinerary_verified(r));
        CHECK(r.periodic_residual < 1e-8);
    }
    SUBCASE("12 and 21 are distinct") {
        WordRealization a = realize_word({1, 2}, 2, 0.01, p);
        WordRealization b = realize_word({2, 1}, 2, 0.01, p);
        REQUIRE(itinerary_verified(a));
        REQUIRE(itinerary_verified(b));
        CHECK(a.forward_symbols[0] == 1);
        CHECK(a.forward_symbols[1] == 2);
        CHECK(b.forward_symbols[0] == 2);
        CHECK(b.forward_symbols[1] == 1);
        CHECK(std::abs(a.lam - b.lam) + std::abs(angle_offset(a.point.phi1, b.point.phi1)) > 1e-6);
    }
    SUBCASE("all words of length 3") {
        std::set<std::string> seen;
        for (const auto& w : all_words(3)) {
            WordRealization r = realize_word(w, 2, 0.01, p);
            CHECK(itinerary_verified(r));
            seen.insert(word_string(w));
        }
        CHECK(seen.size() == 8);
    }
    SUBCASE("forward orbit by the double-precision return map") {
        // rounding the start to double costs about one step of the orbit per 1e-16 of gap
        // resolution, so only the shallowest shell is followed this way
        WordRealization r = realize_word({1, 2}, 2, 0.01, p);
        Itinerary it = iterate(r.point, 0.01, 2, p);
        REQUIRE(it.symbols.size() == 2);
        CHECK(it.symbols[0] == 1);
        CHECK(it.symbols[1] == 2);
    }
}

TEST_CASE("lambda cover") {
    ModelParams p = preset_params();
    const int N = 2, depth = 4;
    LambdaCover c = lambda_cover(N, 0.01, depth, p);
    REQUIRE(c.content.size() == size_t(depth + 1));
    double s0 = 2 * (shell_b(N, p) - shell_b(N + 1, p)) * 2 * p.eps_out * kTwoPi;
    CHECK(c.content[0] == doctest::Approx(s0).epsilon(1e-6));
    for (int d = 0; d < depth; ++d) CHECK(c.content[d + 1] < c.content[d]);
    CHECK(c.decreasing);
    for (int L = 1; L <= depth; ++L)
        for (const auto& w : all_words(L)) {
            WordRealization r = realize_word(w, N, 0.01, p);
            REQUIRE(itinerary_verified(r));
            CHECK(cover_contains(c, L, r));
            CHECK(cover_contains(c, depth, r));
        }
}

TEST_CASE("word parsing") {
    CHECK(parse_word("1212") == Word{1, 2, 1, 2});
    CHECK(word_string({2, 2, 1}) == "221");
    CHECK_THROWS_AS(parse_word("123"), Error);
    CHECK(all_words(4).size() == 16);
}
