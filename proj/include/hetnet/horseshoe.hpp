#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "hetnet/model.hpp"
#include "hetnet/sections.hpp"

namespace hetnet {

using Word = std::vector<int>;

// Shell constants. With lam_N = ln(eps)/delta + 2 pi N/(xi omega2):
//   a_N = 1 - r2_out on the inner face  = exp(-2 pi N delta/(xi omega2))
//   b_N = 1 - r1_in  on its preimage    = eps^(1 - 1/delta) exp(-2 pi N/(xi omega2))
double shell_a(int N, const ModelParams& p);
double shell_b(int N, const ModelParams& p);
// Smallest real N0 such that N > N0 keeps the slab inside C_i^out.
double n_threshold(const ModelParams& p);

struct OutSlab {
    int N = 0;
    int region = 1;
    double a_N = 0, a_N1 = 0;
    double lam_N = 0, lam_N1 = 0;
    double phi2_left = 0, phi2_right = 0;   // E^L, E^R
    double r2_inner = 0, r2_outer = 0;      // T^I, T^O
};

// Throws NTooSmall when N is at or below n_threshold.
OutSlab out_slab(int N, int region, const ModelParams& p);

struct BoundarySample {
    double lam = 0;    // depth of the Sigma1In point
    double gap = 0;    // 1 - r1_in
    double phi1 = 0;   // lifted
    double phi2 = 0;   // lifted
};

enum class Face { EL = 0, ER = 1, TI = 2, TO = 3 };
std::string to_string(Face f);

struct InSlab {
    OutSlab out;
    double b_N = 0, b_N1 = 0;
    std::array<std::vector<BoundarySample>, 4> faces;
    double forward_residual = 0;   // max distance of g_closed(sample) from its named face
};

InSlab in_slab_boundaries(int N, int region, const ModelParams& p, int grid = 64);

struct WindingReport {
    std::array<double, 4> phi1_span{};
    std::array<double, 4> phi2_span{};
    bool ok = false;
};

WindingReport winding_check(const InSlab& slab, const ModelParams& p);

struct PairReport {
    int i = 1, j = 1;
    bool empty = false;       // V_{j,i} = R(S_i) n S_j not found on the grid
    bool slab_ok = false;
    bool full = false;        // every base point carries a nonempty H fibre
    bool interior = false;    // H fibres stay strictly inside the window of S_i
    bool boundary_map = false;// fibre ends map onto the boundary of S_j
    bool vertical_full = false;
    double nu_h = 0, nu_v = 0, K = 0;
    double width_h = 0;       // sup r1 height of H_{i,j}
    double width_v = 0;       // sup phi1 extent of V_{j,i}
    double boundary_residual = 0;
    std::string note;
};

struct ConleyMoserReport {
    int N = 0;
    double gamma = 0;
    double width_S = 0;       // b_N - b_{N+1}
    std::vector<PairReport> pairs;
    double nu_h = 0, nu_v = 0, K = 0;
    bool pass = false;
};

ConleyMoserReport verify_conley_moser(int N, double gamma, const ModelParams& p, int grid = 64);

struct RealizeOptions {
    int backward_steps = 0;   // 0: chosen so the free-start spread is below 1e-12
    int forward_margin = 2;
    int digits = 0;           // 0: chosen from the expansion rates
};

struct WordRealization {
    Word word;
    int N = 0;
    double gamma = 0;
    int digits = 0;
    SectionPoint point;           // Sigma1In, principal angles, radial rounded to double
    double lam = 0;               // depth of the point
    double gap = 0;               // 1 - r1_in
    double x = 0;                 // offset of phi2 of its image from theta_out
    int phi1_branch = 1;          // phi1 = theta_in[phi1_branch] + phi1_offset
    double phi1_offset = 0;
    std::vector<int> forward_symbols;
    std::vector<int> backward_symbols;   // symbols met while walking back from the L-th iterate
    std::vector<double> flight_times;
    bool forward_ok = false;
    bool backward_ok = false;
    double backward_mismatch = 0;         // relative distance of the walked-back point to the start
    double box_diameter = 0;              // spread over free starts, in (r1, phi1, phi2)
    double periodic_residual = 0;         // distance between the start and its L-th iterate
    std::string failure;
};

// Throws RefinementFailure with the depth reached when the chain cannot be closed.
WordRealization realize_word(const Word& w, int N, double gamma, const ModelParams& p,
                             const RealizeOptions& opt = {});

bool itinerary_verified(const WordRealization& r);

struct CoverBox {
    std::vector<int> backward;   // u_{-1}, u_{-2}, ..., u_{-d}
    int v0 = 1, v1 = 0;          // current and next symbol (v1 = 0 at depth 0)
    double lam_lo = 0, lam_hi = 0;
    double x_lo = 0, x_hi = 0;
    int phi1_branch = 0;         // 0: phi1 unconstrained
    double f_lo = 0, f_hi = 0;   // phi1 offset from theta_in[phi1_branch], or phi1 itself when branch 0
    double content = 0;
};

struct LambdaCover {
    int N = 0;
    double gamma = 0;
    std::vector<std::vector<CoverBox>> levels;   // index = depth
    std::vector<double> content;
    bool decreasing = false;
};

LambdaCover lambda_cover(int N, double gamma, int depth, const ModelParams& p);

// True when the realized point lies in one of the boxes of the given depth.
bool cover_contains(const LambdaCover& cover, int depth, const WordRealization& r);

nlohmann::json to_json(const ConleyMoserReport& r);
nlohmann::json to_json(const WordRealization& r);
nlohmann::json to_json(const WindingReport& r);
void write_cover_csv(std::ostream& os, const LambdaCover& c);

// All 2^L words over {1, 2}.
std::vector<Word> all_words(int L);
Word parse_word(const std::string& s);
std::string word_string(const Word& w);

} // namespace hetnet
