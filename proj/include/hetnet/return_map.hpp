#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "hetnet/deep.hpp"
#include "hetnet/model.hpp"
#include "hetnet/sections.hpp"

namespace hetnet {

// Closed form of G = Pi2 o Psi02 o Pi0 o Psi10 o Pi1 : Sigma1In -> Sigma2Out.
SectionPoint g_closed(const SectionPoint& p, const ModelParams& params);
// Explicit composition of the five maps (oracle for g_closed).
SectionPoint g_composed(const SectionPoint& p, const ModelParams& params);
SectionPoint g_inverse(const SectionPoint& q, const ModelParams& params);

// Closed forms in log-gap variables, for points too close to the invariant tori
// to be written as r1_in or r2_out in double precision.
//   forward: lam = ln(eps) - ln(1 - r1_in)  ->  sigma = 1 - r2_out = eps exp(-delta lam)
//   inverse: sigma -> lam = (ln(eps) - ln(sigma)) / delta
struct DepthImage {
    double sigma = 0;   // 1 - r2_out (forward) or 1 - r1_in (inverse)
    double phi1 = 0;
    double phi2 = 0;
};
DepthImage g_closed_depth(double lam, double phi1, double phi2, const ModelParams& params);
DepthImage g_inverse_depth(double sigma, double phi1, double phi2, const ModelParams& params);

// Total flight time of one pass of G from a Sigma1In point.
double g_flight_time(const SectionPoint& p, const ModelParams& params);

struct ReturnResult {
    bool escaped = false;
    int symbol = 0;          // 1 or 2, 0 when escaped
    SectionPoint g_image;    // G(p) on Sigma2Out
    SectionPoint point;      // Psi21(G(p)) on Sigma1In, valid unless escaped
    double flight_time = 0.0;
};

// R_gamma = Psi21 o G. Escape from the network is a normal outcome.
ReturnResult return_map(const SectionPoint& p, double gamma, const ModelParams& params);

struct Itinerary {
    SectionPoint start;
    std::vector<int> symbols;
    std::vector<SectionPoint> points;
    std::vector<double> flight_times;
    bool escaped = false;
    bool domain_error = false;
    std::string stop_reason;
};

Itinerary iterate(const SectionPoint& p, double gamma, int n, const ModelParams& params);

// Columns step,symbol,r1in,phi1,phi2,flight_time.
void write_itinerary_csv(std::ostream& os, const Itinerary& it);

DeepModel<double> deep_model(const ModelParams& params, double gamma);

// Conversions between Sigma1In section points and log-depth box states.
BoxState<double> to_box(const SectionPoint& p, const DeepModel<double>& m);
SectionPoint from_box(const BoxState<double>& s, const DeepModel<double>& m);

struct PeriodicSearch {
    bool converged = false;
    std::vector<BoxState<double>> orbit;  // orbit[0] is the located point
    double residual = 0.0;               // max norm of R^n(p) - p in (lam, x, phi1)
    int iterations = 0;
};

// Damped Newton on R^n(p) = p in log-depth coordinates, with analytic partials.
// The initial depths come from the linear part of the cycle condition,
// xi*omega1*lam_k + xi*omega2*lam_{k+1} = const (mod 2pi), near `lam_hint`.
PeriodicSearch find_periodic_point(const std::vector<int>& word, double gamma, const ModelParams& params,
                                   double lam_hint, double tol = 1e-13);

} // namespace hetnet
