#include "hetnet/sections.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "hetnet/errors.hpp"

namespace hetnet {

const char* to_string(SectionId id) {
    switch (id) {
    case SectionId::Sigma0In: return "Sigma0In";
    case SectionId::Sigma0Out: return "Sigma0Out";
    case SectionId::Sigma1In: return "Sigma1In";
    case SectionId::Sigma1Out: return "Sigma1Out";
    case SectionId::Sigma2In: return "Sigma2In";
    case SectionId::Sigma2Out: return "Sigma2Out";
    }
    return "?";
}

SectionId section_from_string(const std::string& s) {
    for (auto id : {SectionId::Sigma0In, SectionId::Sigma0Out, SectionId::Sigma1In,
                    SectionId::Sigma1Out, SectionId::Sigma2In, SectionId::Sigma2Out})
        if (s == to_string(id)) return id;
    throw Error(ErrorKind::Config, "unknown section '" + s + "'");
}

ReducedAngle reduce_angle(double lifted) {
    if (!std::isfinite(lifted)) throw Error(ErrorKind::NonFinite, "reduce_angle of non-finite value");
    ReducedAngle r;
    double w = std::floor(lifted / kTwoPi);
    double principal = std::fma(-kTwoPi, w, lifted);   // one rounding even for large windings
    if (principal >= kTwoPi) {
        principal -= kTwoPi;
        w += 1.0;
    } else if (principal < 0.0) {
        principal += kTwoPi;
        w -= 1.0;
    }
    if (principal >= kTwoPi) principal = 0.0;
    r.principal = principal;
    r.winding = static_cast<long>(w);
    return r;
}

double angle_offset(double a, double b) {
    double d = principal_angle(b - a);
    if (d >= kPi) d -= kTwoPi;
    return d;
}

bool fixed_is_r1(SectionId id) {
    switch (id) {
    case SectionId::Sigma0In:
    case SectionId::Sigma1Out:
    case SectionId::Sigma2Out:
        return true;
    default:
        return false;
    }
}

double fixed_radius(SectionId id, const ModelParams& p) {
    switch (id) {
    case SectionId::Sigma0In:
    case SectionId::Sigma0Out:
    case SectionId::Sigma1In:
    case SectionId::Sigma2Out:
        return p.eps;
    case SectionId::Sigma1Out:
    case SectionId::Sigma2In:
        return 1.0 - p.eps;
    }
    return 0.0;
}

State4 to_cartesian(const SectionPoint& q, const ModelParams& p) {
    double fixed = fixed_radius(q.section, p);
    double r1 = fixed_is_r1(q.section) ? fixed : q.radial;
    double r2 = fixed_is_r1(q.section) ? q.radial : fixed;
    return {r1 * std::cos(q.phi1), r1 * std::sin(q.phi1), r2 * std::cos(q.phi2), r2 * std::sin(q.phi2)};
}

SectionPoint to_section(const State4& s, SectionId id, const ModelParams& p, double tol) {
    double r1 = std::hypot(s.x1, s.x2);
    double r2 = std::hypot(s.x3, s.x4);
    double fixed = fixed_radius(id, p);
    double actual = fixed_is_r1(id) ? r1 : r2;
    if (!(std::fabs(actual - fixed) <= tol)) {
        std::ostringstream os;
        os << "point is off " << to_string(id) << ": fixed radius " << actual << " vs " << fixed;
        throw Error(ErrorKind::OffSection, os.str());
    }
    SectionPoint q;
    q.section = id;
    q.radial = fixed_is_r1(id) ? r2 : r1;
    q.phi1 = principal_angle(std::atan2(s.x2, s.x1));
    q.phi2 = principal_angle(std::atan2(s.x4, s.x3));
    return q;
}

ChartCheck chart_check(const SectionPoint& q, const ModelParams& p) {
    ChartCheck c;
    double r = q.radial;
    double e = p.eps;
    switch (q.section) {
    case SectionId::Sigma0In:
    case SectionId::Sigma2In:
        c.inside = r >= 0.0 && r <= e;
        c.boundary = r == 0.0;
        break;
    case SectionId::Sigma1In:
        c.inside = r >= 1.0 - e && r <= 1.0;
        c.boundary = r == 1.0;
        break;
    case SectionId::Sigma2Out:
        c.inside = r >= 1.0 - p.eps_out && r <= 1.0;
        c.boundary = r == 1.0;
        break;
    case SectionId::Sigma0Out:
    case SectionId::Sigma1Out:
        c.inside = r >= 0.0;
        c.boundary = r == 0.0;
        break;
    }
    return c;
}

void write_section_csv(std::ostream& os, const std::vector<SectionPoint>& pts) {
    os << "section,radial,phi1,phi2\n";
    os << std::setprecision(17);
    for (const auto& q : pts)
        os << to_string(q.section) << ',' << q.radial << ',' << q.phi1 << ',' << q.phi2 << '\n';
}

} // namespace hetnet
