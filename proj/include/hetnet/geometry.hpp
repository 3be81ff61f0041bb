#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hetnet/model.hpp"
#include "hetnet/sections.hpp"

namespace hetnet {

// Real-valued profile on the planar annulus 1 - delta_hat <= u^2 + v^2 <= 1,
// constant on the unit circle, with analytic partial derivatives.
struct MeridianProfile {
    std::function<double(double, double)> value;
    std::function<double(double, double)> du;
    std::function<double(double, double)> dv;
    double delta_hat = 0.5;
};

MeridianProfile constant_profile(double c);
// 1 - u^2 - v^2, vanishing on the unit circle.
MeridianProfile quadratic_profile();

// Max minus min of the profile over `samples` points of the unit circle.
double circle_spread(const MeridianProfile& xi, int samples = 256);

// phi1_out of the pushed surface as a function of (r2_out, phi2_out).
double upsilon(double r2, double phi2, const MeridianProfile& xi, const ModelParams& p);
double dupsilon_dphi2(double r2, double phi2, const MeridianProfile& xi, const ModelParams& p);

struct Remainder {
    double R = 0, R1 = 0, R2 = 0;
    double lhs = 0;            // (1 - r2) dUpsilon/dr2 from the analytic form
    double fd = 0;             // same quantity from a central difference of upsilon
    bool fd_ok = false;        // |fd - lhs| <= 1e-5 |lhs|
};

Remainder remainder(double r2, double phi2, const MeridianProfile& xi, const ModelParams& p);

struct SpiralSample {
    double theta = 0;  // lifted angle
    double h = 0;
};

struct SpiralVerdict {
    bool is_spiral = false;
    size_t theta_monotone_from = 0;   // first sample index of the monotone tail
    double theta_range = 0;           // lifted span over the tail
    std::vector<double> envelope_upper;
    std::vector<double> envelope_lower;
    double limit_h = 0;
    std::string reason;
};

struct SpiralOptions {
    double tol = 1e-6;
    double min_span = 6.0 * kPi;
};

SpiralVerdict classify_spiral(const std::vector<SpiralSample>& samples, const SpiralOptions& opt = {});

struct SheetGrid {
    int slices = 16;        // source angle slices
    int samples = 400;      // points per slice
    double t_min = 1.0;     // depth range: 1 - r = eps * exp(-t)
    double t_max = 40.0;
};

struct SheetSlice {
    double source_angle = 0;
    std::vector<SectionPoint> points;   // image points
    SpiralVerdict verdict;
};

struct SheetImage {
    std::vector<SheetSlice> slices;
    bool all_spiral = false;
};

// Pushes F_in = {phi1_in = Xi(r1 cos phi2_in, r1 sin phi2_in)} through g_closed.
// Slices are the source lines phi2_in = const; each image slice is projected to
// (phi2_out lifted, 1 - r2_out) and must spiral onto r2_out = 1.
SheetImage sheet_image(const MeridianProfile& xi, const SheetGrid& grid, const ModelParams& p);

// Mirror statement: F_out = {phi1_out = Xi(r2 cos phi2_out, r2 sin phi2_out)} pulled back
// by g_inverse, projected to (phi2_in lifted, 1 - r1_in), spiralling onto r1_in = 1.
SheetImage sheet_preimage(const MeridianProfile& xi, const SheetGrid& grid, const ModelParams& p);

struct ScrollReport {
    int region = 1;
    bool both_spiral = false;
    bool interlaced = false;
    int checked_angles = 0;
};

// Pull-back of the two boundary disks phi2_out = theta_i -/+ eps_out of C_i^out.
ScrollReport scroll_check(int region, const SheetGrid& grid, const ModelParams& p);

struct ConnectionPoint {
    double phi2_in = 0;   // ray angle
    double lam = 0;       // ln(eps) - ln(1 - r1_in)
    double gap = 0;       // 1 - r1_in
    double phi1_in = 0;
};

struct ConnectionCurve {
    int turn = 0;      // shell index N
    int symbol = 0;    // out region reached by the image
    int sheet = 1;     // branch of the model surface
    std::vector<ConnectionPoint> points;
    double max_gap = 0;
};

struct ConnectionOptions {
    int sheet = 1;
    int rays = 64;
    double lam_tol = 1e-12;
};

// Curves on the model surface W^u(C2) n Sigma1In (sheet `sheet`) whose return lands
// on {r1_in = 1}. Throws CoincidentManifolds when gamma == 0.
std::vector<ConnectionCurve> find_connections(double gamma, int n_min, int n_max, const ModelParams& p,
                                              const ConnectionOptions& opt = {});

// Depth of the inner shell boundary: lam_N = ln(eps)/delta + 2 pi N / (xi omega2).
double shell_depth(int N, const ModelParams& p);

} // namespace hetnet
