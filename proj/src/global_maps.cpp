#include "hetnet/global_maps.hpp"

#include <cmath>
#include <sstream>

#include "hetnet/errors.hpp"

namespace hetnet {

namespace {

void expect_section(const SectionPoint& p, SectionId id, const char* op) {
    if (p.section != id) {
        std::ostringstream os;
        os << op << " expects " << to_string(id) << ", got " << to_string(p.section);
        throw Error(ErrorKind::SectionMismatch, os.str());
    }
}

bool in_window(double angle, double theta, double w) {
    double d = angle_offset(theta, angle);
    return d >= -w && d < w;
}

} // namespace

int angular_window(double angle, double theta1, double theta2, double w) {
    if (in_window(angle, theta1, w)) return 1;
    if (in_window(angle, theta2, w)) return 2;
    return 0;
}

int out_region(const SectionPoint& q, const ModelParams& p) {
    if (q.section != SectionId::Sigma2Out) return 0;
    if (!(q.radial >= 1.0 - p.eps_out && q.radial <= 1.0)) return 0;
    return angular_window(q.phi2, p.theta1_out, p.theta2_out, p.eps_out);
}

SectionPoint psi02(const SectionPoint& p) {
    expect_section(p, SectionId::Sigma0Out, "psi02");
    SectionPoint q = p;
    q.section = SectionId::Sigma2In;
    return q;
}

SectionPoint psi10(const SectionPoint& p) {
    expect_section(p, SectionId::Sigma1Out, "psi10");
    SectionPoint q = p;
    q.section = SectionId::Sigma0In;
    return q;
}

SurfaceShape<double> surface_shape(const ModelParams& p) {
    double half = 0.5 * principal_angle(p.theta2_out - p.theta1_out);
    return {p.surf_amp, std::sin(half), std::cos(half)};
}

double surface_kappa(double phi2_out, const ModelParams& p) {
    double half = 0.5 * principal_angle(p.theta2_out - p.theta1_out);
    double mid = p.theta1_out + half;
    return p.surf_amp * (std::cos(phi2_out - mid) - std::cos(half));
}

SectionPoint psi21(const SectionPoint& q, double gamma, const ModelParams& p) {
    expect_section(q, SectionId::Sigma2Out, "psi21");
    int i = out_region(q, p);
    if (i == 0) {
        std::ostringstream os;
        os << "psi21: point (r2=" << q.radial << ", phi2=" << q.phi2 << ") is outside C1_out and C2_out";
        throw Error(ErrorKind::OutsideDomain, os.str());
    }
    auto shape = surface_shape(p);
    double x = angle_offset(p.theta_out(i), q.phi2);
    SectionPoint r;
    r.section = SectionId::Sigma1In;
    r.radial = q.radial - gamma * kappa_offset(shape, i, x);
    r.phi1 = q.phi2 + (p.theta_in(i) - p.theta_out(i));
    r.phi2 = q.phi1;
    return r;
}

SectionPoint psi21_inverse(const SectionPoint& pin, double gamma, const ModelParams& p) {
    expect_section(pin, SectionId::Sigma1In, "psi21_inverse");
    int i = angular_window(pin.phi1, p.theta1_in, p.theta2_in, p.eps_out);
    if (i == 0) throw Error(ErrorKind::OutsideDomain, "psi21_inverse: phi1_in outside the image windows");
    auto shape = surface_shape(p);
    double x = angle_offset(p.theta_in(i), pin.phi1);
    SectionPoint q;
    q.section = SectionId::Sigma2Out;
    q.radial = pin.radial + gamma * kappa_offset(shape, i, x);
    q.phi2 = pin.phi1 - (p.theta_in(i) - p.theta_out(i));
    q.phi1 = pin.phi2;
    return q;
}

double psi21_rectangular_angle(double r2_out, double phi2_out, double gamma) {
    return std::atan2(r2_out * std::sin(phi2_out), r2_out * std::cos(phi2_out) + gamma);
}

} // namespace hetnet
