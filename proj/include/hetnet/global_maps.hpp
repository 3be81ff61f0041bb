#pragma once

#include "hetnet/model.hpp"
#include "hetnet/sections.hpp"
#include "hetnet/surface.hpp"

namespace hetnet {

// Membership in C_i^out (r2_out in [1-eps_out, 1], phi2_out within eps_out of
// theta_i_out, half-open window). Returns 0 outside both regions.
int out_region(const SectionPoint& q, const ModelParams& p);

// Index i of the angular window [theta_i - w, theta_i + w) containing `angle`, 0 if none.
int angular_window(double angle, double theta1, double theta2, double w);

SectionPoint psi02(const SectionPoint& p);
SectionPoint psi10(const SectionPoint& p);

// Full-circle surface function kappa(phi) and its offset form around theta_i_out.
double surface_kappa(double phi2_out, const ModelParams& p);
SurfaceShape<double> surface_shape(const ModelParams& p);

// Sigma2Out (inside C1_out or C2_out) -> Sigma1In:
//   r1_in = r2_out - gamma * kappa(phi2_out),
//   phi1_in = phi2_out + (theta_i_in - theta_i_out),  phi2_in = phi1_out.
// At gamma = 0 this is the plain relabeling of the two planes.
SectionPoint psi21(const SectionPoint& q, double gamma, const ModelParams& p);

// Inverse of psi21; the branch is read from phi1_in.
SectionPoint psi21_inverse(const SectionPoint& p_in, double gamma, const ModelParams& p);

// Angle produced by the raw rectangular recipe: shift X1 by gamma in the plane of
// (r2_out cos phi2_out, r2_out sin phi2_out) and read atan2. Kept as a reference
// for the chart-matching discussion; psi21 uses surface_kappa instead.
double psi21_rectangular_angle(double r2_out, double phi2_out, double gamma);

} // namespace hetnet
