#include "hetnet/local_maps.hpp"

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

void expect_finite(const SectionPoint& p) {
    if (!std::isfinite(p.radial) || !std::isfinite(p.phi1) || !std::isfinite(p.phi2))
        throw Error(ErrorKind::NonFinite, "non-finite section point");
}

SectionPoint rotate(SectionId id, double radial, const SectionPoint& from, double t, const ModelParams& q) {
    SectionPoint out;
    out.section = id;
    out.radial = radial;
    out.phi1 = from.phi1 + q.omega1 * t;
    out.phi2 = from.phi2 + q.omega2 * t;
    return out;
}

} // namespace

SectionId in_section(int node) {
    return node == 0 ? SectionId::Sigma0In : node == 1 ? SectionId::Sigma1In : SectionId::Sigma2In;
}

SectionId out_section(int node) {
    return node == 0 ? SectionId::Sigma0Out : node == 1 ? SectionId::Sigma1Out : SectionId::Sigma2Out;
}

LocalResult pi0(const SectionPoint& p, const ModelParams& q) {
    expect_section(p, SectionId::Sigma0In, "pi0");
    expect_finite(p);
    double r2 = p.radial;
    if (r2 <= 0.0) throw Error(ErrorKind::DomainStableManifold, "pi0: r2_in <= 0 lies on the local stable manifold of O");
    if (r2 > q.eps) throw Error(ErrorKind::DomainRange, "pi0: r2_in > eps");
    double depth = std::log(q.eps) - std::log(r2);  // ln(eps / r2_in) >= 0
    double t = depth / q.E0;
    double r1 = q.eps * std::exp(-(q.C0 / q.E0) * depth);
    return {rotate(SectionId::Sigma0Out, r1, p, t, q), t};
}

LocalResult pi1(const SectionPoint& p, const ModelParams& q) {
    expect_section(p, SectionId::Sigma1In, "pi1");
    expect_finite(p);
    double r1 = p.radial;
    if (r1 == 1.0) throw Error(ErrorKind::DomainStableManifold, "pi1: r1_in = 1 lies on the local stable manifold of C1");
    if (r1 > 1.0 || r1 < 1.0 - q.eps) throw Error(ErrorKind::DomainRange, "pi1: r1_in outside [1-eps, 1)");
    double depth = std::log(q.eps) - std::log1p(-r1);
    double t = depth / q.E1;
    double r2 = q.eps * std::exp(-(q.C1 / q.E1) * depth);
    return {rotate(SectionId::Sigma1Out, r2, p, t, q), t};
}

LocalResult pi2(const SectionPoint& p, const ModelParams& q) {
    expect_section(p, SectionId::Sigma2In, "pi2");
    expect_finite(p);
    double r1 = p.radial;
    if (r1 <= 0.0) throw Error(ErrorKind::DomainStableManifold, "pi2: r1_in <= 0 lies on the local stable manifold of C2");
    if (r1 > q.eps) throw Error(ErrorKind::DomainRange, "pi2: r1_in > eps");
    double depth = std::log(q.eps) - std::log(r1);
    double t = depth / q.E2;
    double r2 = 1.0 - q.eps * std::exp(-(q.C2 / q.E2) * depth);
    return {rotate(SectionId::Sigma2Out, r2, p, t, q), t};
}

LocalResult pi_node(int node, const SectionPoint& p, const ModelParams& q) {
    switch (node) {
    case 0: return pi0(p, q);
    case 1: return pi1(p, q);
    case 2: return pi2(p, q);
    default: throw Error(ErrorKind::Precondition, "node must be 0, 1 or 2");
    }
}

SectionPoint pi_inverse(int node, const SectionPoint& q, const ModelParams& p) {
    if (node < 0 || node > 2) throw Error(ErrorKind::Precondition, "node must be 0, 1 or 2");
    expect_section(q, out_section(node), "pi_inverse");
    expect_finite(q);
    // gap: distance of the out radial to the manifold the orbit leaves along.
    double gap = node == 2 ? 1.0 - q.radial : q.radial;
    if (!(gap > 0.0) || gap > p.eps) {
        std::ostringstream os;
        os << "pi_inverse(" << node << "): radial " << q.radial << " outside the forward image";
        throw Error(ErrorKind::ImageRange, os.str());
    }
    double depth_out = std::log(p.eps) - std::log(gap);  // C_node * T
    double t = depth_out / p.C(node);
    double depth_in = t * p.E(node);
    SectionPoint in;
    in.section = in_section(node);
    double in_gap = p.eps * std::exp(-depth_in);
    in.radial = node == 1 ? 1.0 - in_gap : in_gap;
    in.phi1 = q.phi1 - p.omega1 * t;
    in.phi2 = q.phi2 - p.omega2 * t;
    return in;
}

} // namespace hetnet
