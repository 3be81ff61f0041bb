#pragma once

#include <array>
#include <complex>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "hetnet/model.hpp"
#include "hetnet/sections.hpp"

namespace hetnet {

using Vec = Eigen::VectorXd;

struct HHCoefficients {
    double p11 = 1.0, p12 = 3.0, p21 = -2.0, p22 = -1.0;
    double s1 = -0.1, s2 = -0.1;
    double mu1 = -1e-3, mu2 = 7.5e-4;
    double omega1 = 1.0, omega2 = 2.0;
};

// Difficult-case and coefficient conditions; empty when all hold.
std::vector<std::string> coefficient_violations(const HHCoefficients& c);
double delta_c(const HHCoefficients& c);   // p21/p11
double theta_c(const HHCoefficients& c);   // p12/p22

nlohmann::json to_json(const HHCoefficients& c);
// Strict: unknown keys are a Config error.
HHCoefficients coefficients_from_json(const nlohmann::json& j);

// Bipolar state (r1, r2, phi1, phi2).
Vec truncated_field(const Vec& s, const HHCoefficients& c);

struct Perturbation {
    // H1, H2 perturb the radial equations, H3, H4 the angular ones.
    std::array<std::function<double(double, double)>, 4> H;
};

struct EquivarianceReport {
    bool ok = true;
    std::vector<std::string> warnings;
};

// Samples H at random points: H1 odd in r1 and even in r2, H2 the mirror, H3 and H4
// even in both; H1, H2 vanish to order 6 at the origin.
EquivarianceReport check_perturbation(const Perturbation& h, unsigned seed = 7);
Vec gaspard_field(const Vec& s, const HHCoefficients& c, double gamma, const Perturbation& h);

// Rectangular form (x1, y1, x2, y2) of the truncated field, used near r = 0.
Vec truncated_field_rect(const Vec& x, const HHCoefficients& c);

struct HetCurvePoint {
    double mu1 = 0, mu2 = 0;
    int order = 1;
};

// First-order Het curve mu2 = -((delta_c - 1)/(theta_c - 1)) mu1. Throws InvalidParameters at theta_c = 1.
HetCurvePoint het_curve(double mu1, const HHCoefficients& c);

struct Equilibrium {
    std::string name;   // O, E1, E2, interior
    double r1 = 0, r2 = 0;
    std::array<std::complex<double>, 2> eigenvalues{};
    double residual = 0;
};

struct EquilibriaReport {
    std::vector<Equilibrium> points;
    int seeds = 0;                       // interior Newton seeds tried
    int nonconverged = 0;
};

EquilibriaReport amplitude_equilibria(const HHCoefficients& c);

// ---------------------------------------------------------------- integrator

using Field = std::function<void(double, const Vec&, Vec&)>;

struct EventSpec {
    std::string name;
    std::function<double(double, const Vec&)> g;
    int direction = 0;     // +1 rising, -1 falling, 0 both (with respect to the integration direction)
    bool terminal = false;
};

struct EventRecord {
    std::string name;
    double t = 0;
    Vec y;
    int direction = 0;
};

// One accepted step with its continuous extension (Dormand-Prince dense output).
struct DenseSegment {
    double t0 = 0, h = 0;
    std::array<Vec, 5> r;
    Vec eval(double t) const;
};

struct Trajectory {
    std::vector<double> t;
    std::vector<Vec> y;
    std::vector<DenseSegment> dense;
    std::vector<EventRecord> events;
    double tol = 0;
    double error_bound = 0;   // largest accepted local error estimate, absolute
    size_t accepted = 0, rejected = 0;
    std::string method = "Dormand-Prince 5(4), order-4 dense output";
    Vec at(double t) const;
};

struct IntegrateOptions {
    double tol = 1e-10;           // relative tolerance
    double atol = -1;             // absolute tolerance; negative means atol = tol
    double max_norm = 1e8;        // blow-up bound
    double h_init = 0;            // 0: automatic
    size_t max_steps = 20'000'000;
    bool record = true;           // keep samples and dense output
    std::vector<EventSpec> events;
};

// Integrates from t0 to t1 (t1 < t0 runs backward). Throws StepUnderflow, BlowUp, Precondition.
Trajectory integrate(const Field& f, const Vec& y0, double t0, double t1, const IntegrateOptions& opt = {});

// Crossings of a level set on a recorded trajectory, in time order. Throws NoCrossing.
std::vector<EventRecord> poincare_cross(const Trajectory& tr, const EventSpec& ev);

void write_trajectory_csv(std::ostream& os, const Trajectory& tr);

// ---------------------------------------------------------------- local maps against the flow

struct LocalComparison {
    int node = 0;
    size_t samples = 0;
    size_t excluded = 0;          // samples on the local stable manifold
    double max_radial = 0;
    double max_angle = 0;
    double max_time = 0;
    double tol = 0;
};

// Integrates the linear local system of `node` from each sample to the out-section event and
// compares with pi_node.
LocalComparison compare_local(int node, const std::vector<SectionPoint>& samples, const ModelParams& p, double tol);
// Random samples, log-uniform in the gap to the stable manifold over [1e-8 eps, eps].
LocalComparison compare_local(int node, size_t n, const ModelParams& p, double tol, unsigned seed);

// ---------------------------------------------------------------- Het connection by shooting

struct HetShot {
    double mu2 = 0;
    double defect = 0;           // signed difference of r1 at the transversal crossings
    double distance = 0;         // Euclidean distance of the two crossings
    std::array<double, 2> unstable_hit{};
    std::array<double, 2> stable_hit{};
};

struct HetShootResult {
    double mu1 = 0;
    double mu2 = 0;
    double mu2_first_order = 0;
    double defect = 0;           // Euclidean distance at the located mu2
    int iterations = 0;
    bool converged = false;
};

// W^u(E2) forward and W^s(E1) backward to the transversal r1/r1* = r2/r2*.
HetShot het_defect(const HHCoefficients& c, double tol = 1e-12);
HetShootResult het_shoot(const HHCoefficients& c, double defect_tol = 1e-10, double tol = 1e-12);

nlohmann::json to_json(const HetShootResult& r);
nlohmann::json to_json(const EquilibriaReport& r);
nlohmann::json to_json(const LocalComparison& r);

} // namespace hetnet
