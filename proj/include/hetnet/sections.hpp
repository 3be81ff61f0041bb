#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "hetnet/model.hpp"

namespace hetnet {

enum class SectionId { Sigma0In, Sigma0Out, Sigma1In, Sigma1Out, Sigma2In, Sigma2Out };

const char* to_string(SectionId id);
SectionId section_from_string(const std::string& s);

// A point on one of the six cross sections. `radial` is the free radial
// coordinate of that section; phi1, phi2 are lifted (never reduced mod 2pi).
//
//   section     fixed coordinate   radial
//   Sigma0In    r1 = eps           r2 in (0, eps]
//   Sigma0Out   r2 = eps           r1
//   Sigma1In    r2 = eps           r1 in [1-eps, 1)
//   Sigma1Out   r1 = 1-eps         r2
//   Sigma2In    r2 = 1-eps         r1 in (0, eps]
//   Sigma2Out   r1 = eps           r2
struct SectionPoint {
    SectionId section = SectionId::Sigma1In;
    double radial = 0.0;
    double phi1 = 0.0;
    double phi2 = 0.0;
};

struct State4 {
    double x1 = 0, x2 = 0, x3 = 0, x4 = 0;
};

struct ReducedAngle {
    double principal = 0.0;  // in [0, 2pi)
    long winding = 0;
};

ReducedAngle reduce_angle(double lifted);

// Principal part only, convenience for comparisons.
inline double principal_angle(double lifted) { return reduce_angle(lifted).principal; }

// Signed distance from `a` to `b` on the circle, in [-pi, pi).
double angle_offset(double a, double b);

// Value of the fixed radial coordinate that defines the section.
double fixed_radius(SectionId id, const ModelParams& p);

// True when the fixed coordinate is r1 (so the radial coordinate is r2).
bool fixed_is_r1(SectionId id);

State4 to_cartesian(const SectionPoint& q, const ModelParams& p);

// Rejects points whose fixed coordinate differs from the section value by more than tol.
SectionPoint to_section(const State4& s, SectionId id, const ModelParams& p, double tol = 1e-12);

struct ChartCheck {
    bool inside = false;
    bool boundary = false;  // on a local stable/unstable manifold locus
};

ChartCheck chart_check(const SectionPoint& q, const ModelParams& p);

// Columns section,radial,phi1,phi2 with 17 significant digits.
void write_section_csv(std::ostream& os, const std::vector<SectionPoint>& pts);

} // namespace hetnet
