#include "hetnet/return_map.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <Eigen/Dense>

#include "hetnet/errors.hpp"
#include "hetnet/global_maps.hpp"
#include "hetnet/local_maps.hpp"

namespace hetnet {

namespace {

void expect_section(const SectionPoint& p, SectionId id, const char* op) {
    if (p.section != id) {
        std::ostringstream os;
        os << op << " expects " << to_string(id) << ", got " << to_string(p.section);
        throw Error(ErrorKind::SectionMismatch, os.str());
    }
}

// ln(eps) - ln(1 - r1) for a Sigma1In point, with the domain checks of g_closed.
double depth_of(const SectionPoint& p, const ModelParams& q) {
    expect_section(p, SectionId::Sigma1In, "g_closed");
    if (!std::isfinite(p.radial) || !std::isfinite(p.phi1) || !std::isfinite(p.phi2))
        throw Error(ErrorKind::NonFinite, "non-finite section point");
    if (p.radial == 1.0) throw Error(ErrorKind::DomainStableManifold, "r1_in = 1 lies on the local stable manifold of C1");
    if (p.radial > 1.0 || p.radial < 1.0 - q.eps) throw Error(ErrorKind::DomainRange, "r1_in outside [1-eps, 1)");
    return std::log(q.eps) - std::log1p(-p.radial);
}

} // namespace

SectionPoint g_closed(const SectionPoint& p, const ModelParams& params) {
    auto d = derived_constants(params);
    double lam = depth_of(p, params);
    SectionPoint q;
    q.section = SectionId::Sigma2Out;
    q.radial = 1.0 - params.eps * std::exp(-d.delta * lam);
    q.phi1 = p.phi1 + d.xi * params.omega1 * lam;
    q.phi2 = p.phi2 + d.xi * params.omega2 * lam;
    return q;
}

SectionPoint g_composed(const SectionPoint& p, const ModelParams& params) {
    auto a = pi1(p, params);
    auto b = pi0(psi10(a.out), params);
    auto c = pi2(psi02(b.out), params);
    return c.out;
}

DepthImage g_closed_depth(double lam, double phi1, double phi2, const ModelParams& params) {
    auto d = derived_constants(params);
    if (!(lam >= 0.0)) throw Error(ErrorKind::DomainRange, "negative depth is outside the Sigma1In chart");
    if (std::isinf(lam)) throw Error(ErrorKind::DomainStableManifold, "infinite depth lies on the local stable manifold of C1");
    return {params.eps * std::exp(-d.delta * lam), phi1 + d.xi * params.omega1 * lam, phi2 + d.xi * params.omega2 * lam};
}

DepthImage g_inverse_depth(double sigma, double phi1, double phi2, const ModelParams& params) {
    auto d = derived_constants(params);
    if (!(sigma > 0.0)) throw Error(ErrorKind::DomainUnstableManifold, "1 - r2_out must be positive");
    if (sigma > params.eps) throw Error(ErrorKind::DomainRange, "1 - r2_out > eps has no preimage in the chart");
    double lam = (std::log(params.eps) - std::log(sigma)) / d.delta;
    return {params.eps * std::exp(-lam), phi1 - d.xi * params.omega1 * lam, phi2 - d.xi * params.omega2 * lam};
}

double g_flight_time(const SectionPoint& p, const ModelParams& params) {
    auto d = derived_constants(params);
    return d.xi * depth_of(p, params);
}

SectionPoint g_inverse(const SectionPoint& q, const ModelParams& params) {
    expect_section(q, SectionId::Sigma2Out, "g_inverse");
    auto d = derived_constants(params);
    if (q.radial == 1.0) throw Error(ErrorKind::DomainUnstableManifold, "r2_out = 1 lies on the local unstable manifold of C2");
    double sigma = 1.0 - q.radial;
    if (!(sigma > 0.0)) throw Error(ErrorKind::DomainRange, "r2_out > 1");
    if (sigma > params.eps) throw Error(ErrorKind::DomainRange, "1 - r2_out > eps has no preimage in the chart");
    double lam = (std::log(params.eps) - std::log(sigma)) / d.delta;
    SectionPoint p;
    p.section = SectionId::Sigma1In;
    p.radial = 1.0 - params.eps * std::exp(-lam);
    p.phi1 = q.phi1 - d.xi * params.omega1 * lam;
    p.phi2 = q.phi2 - d.xi * params.omega2 * lam;
    return p;
}

ReturnResult return_map(const SectionPoint& p, double gamma, const ModelParams& params) {
    ReturnResult r;
    r.g_image = g_closed(p, params);
    r.flight_time = g_flight_time(p, params);
    r.symbol = out_region(r.g_image, params);
    if (r.symbol == 0) {
        r.escaped = true;
        return r;
    }
    r.point = psi21(r.g_image, gamma, params);
    return r;
}

Itinerary iterate(const SectionPoint& p, double gamma, int n, const ModelParams& params) {
    if (n < 1) throw Error(ErrorKind::Precondition, "iterate needs n >= 1");
    Itinerary it;
    it.start = p;
    SectionPoint cur = p;
    for (int k = 0; k < n; ++k) {
        ReturnResult r;
        try {
            r = return_map(cur, gamma, params);
        } catch (const Error& e) {
            it.domain_error = true;
            it.stop_reason = e.what();
            return it;
        }
        if (r.escaped) {
            it.escaped = true;
            it.stop_reason = "escaped the network neighbourhood";
            return it;
        }
        it.symbols.push_back(r.symbol);
        it.points.push_back(r.point);
        it.flight_times.push_back(r.flight_time);
        cur = r.point;
    }
    return it;
}

void write_itinerary_csv(std::ostream& os, const Itinerary& it) {
    os << "step,symbol,r1in,phi1,phi2,flight_time\n";
    os << std::setprecision(17);
    os << 0 << ",," << it.start.radial << ',' << it.start.phi1 << ',' << it.start.phi2 << ",\n";
    for (size_t k = 0; k < it.points.size(); ++k)
        os << k + 1 << ',' << it.symbols[k] << ',' << it.points[k].radial << ',' << it.points[k].phi1 << ','
           << it.points[k].phi2 << ',' << it.flight_times[k] << '\n';
}

DeepModel<double> deep_model(const ModelParams& params, double gamma) {
    return make_deep_model<double>(params, derived_constants(params), gamma, kPi);
}

BoxState<double> to_box(const SectionPoint& p, const DeepModel<double>& m) {
    expect_section(p, SectionId::Sigma1In, "to_box");
    if (p.radial >= 1.0) throw Error(ErrorKind::DomainStableManifold, "r1_in >= 1");
    double lam = m.log_eps - std::log1p(-p.radial);
    return box_from_angles(m, lam, p.phi1, p.phi2);
}

SectionPoint from_box(const BoxState<double>& s, const DeepModel<double>& m) {
    SectionPoint p;
    p.section = SectionId::Sigma1In;
    p.radial = 1.0 - m.eps * std::exp(-s.lam);
    p.phi1 = s.phi1;
    p.phi2 = phi2_of(m, s);
    return p;
}

PeriodicSearch find_periodic_point(const std::vector<int>& word, double gamma, const ModelParams& params,
                                   double lam_hint, double tol) {
    if (word.empty()) throw Error(ErrorKind::Precondition, "empty word");
    for (int w : word)
        if (w != 1 && w != 2) throw Error(ErrorKind::Precondition, "symbols must be 1 or 2");
    if (!(gamma > 0.0)) throw Error(ErrorKind::CoincidentManifolds, "periodic search needs gamma > 0");
    const auto m = deep_model(params, gamma);
    const int n = static_cast<int>(word.size());

    // Linear part of the cycle condition, solved for the integer lift closest to lam_hint.
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd c(n), lam = Eigen::VectorXd::Constant(n, lam_hint);
    for (int k = 0; k < n; ++k) {
        int kn = (k + 1) % n;
        int kp = (k + n - 1) % n;
        M(k, k) += m.xw1;
        M(k, kn) += m.xw2;
        c(k) = m.theta_out[word[kn]] - m.theta_in[word[kp]];
    }
    for (int pass = 0; pass < 4; ++pass) {
        Eigen::VectorXd rhs = c;
        Eigen::VectorXd ml = M * lam;
        for (int k = 0; k < n; ++k) rhs(k) += kTwoPi * std::round((ml(k) - c(k)) / kTwoPi);
        lam = M.partialPivLu().solve(rhs);
    }

    PeriodicSearch out;
    BoxState<double> z;
    z.lam = lam(0);
    z.branch = word[0];
    {
        double ynum = m.eps * std::exp(-lam(n > 1 ? 1 : 0)) - m.eps * std::exp(-m.delta * lam(0));
        z.x = kappa_offset_inverse(m.shape, word[0], ynum / gamma, 1e-15);
        double xprev_num = m.eps * std::exp(-lam(0)) - m.eps * std::exp(-m.delta * lam(n - 1));
        double xprev = kappa_offset_inverse(m.shape, word[n - 1], xprev_num / gamma, 1e-15);
        z.phi1 = m.theta_in[word[n - 1]] + xprev;
    }
    z.in_region = inside_region(m, z.lam, z.x);

    auto run = [&](const BoxState<double>& s0, Eigen::Matrix3d* jac, std::vector<BoxState<double>>* orbit) {
        BoxState<double> s = s0;
        s.in_region = inside_region(m, s.lam, s.x);
        Eigen::Matrix3d J = Eigen::Matrix3d::Identity();
        if (orbit) orbit->assign(1, s);
        for (int k = 0; k < n; ++k) {
            if (s.branch != word[k] || !s.in_region) return false;
            if (jac) {
                auto a = deep_jacobian(m, s);
                Eigen::Matrix3d D;
                D << a[0], a[1], a[2], a[3], a[4], a[5], a[6], a[7], a[8];
                J = D * J;
            }
            auto r = deep_step(m, s);
            if (r.status != StepStatus::Ok) return false;
            s = r.next;
            if (orbit) orbit->push_back(s);
        }
        if (jac) *jac = J;
        return true;
    };

    auto residual_of = [&](const std::vector<BoxState<double>>& orb, Eigen::Vector3d& F) {
        const auto& a = orb.front();
        const auto& b = orb.back();
        if (b.branch != a.branch) return false;
        F << b.lam - a.lam, b.x - a.x, angle_offset(a.phi1, b.phi1);
        return true;
    };

    std::vector<BoxState<double>> orbit;
    Eigen::Matrix3d J;
    Eigen::Vector3d F;
    for (int it = 0; it < 60; ++it) {
        out.iterations = it;
        if (!run(z, &J, &orbit) || !residual_of(orbit, F)) return out;
        out.residual = F.cwiseAbs().maxCoeff();
        if (out.residual < tol) {
            out.converged = true;
            out.orbit.assign(orbit.begin(), orbit.end() - 1);
            return out;
        }
        Eigen::Vector3d dz = (J - Eigen::Matrix3d::Identity()).fullPivLu().solve(-F);
        double t = 1.0;
        bool accepted = false;
        for (int h = 0; h < 30; ++h, t *= 0.5) {
            BoxState<double> trial = z;
            trial.lam += t * dz(0);
            trial.x += t * dz(1);
            trial.phi1 += t * dz(2);
            std::vector<BoxState<double>> orb2;
            Eigen::Vector3d F2;
            if (run(trial, nullptr, &orb2) && residual_of(orb2, F2) &&
                F2.cwiseAbs().maxCoeff() < out.residual) {
                z = trial;
                accepted = true;
                break;
            }
        }
        if (!accepted) return out;
    }
    return out;
}

} // namespace hetnet
