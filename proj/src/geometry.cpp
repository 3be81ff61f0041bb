#include "hetnet/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "hetnet/deep.hpp"
#include "hetnet/errors.hpp"
#include "hetnet/return_map.hpp"
#include "hetnet/surface.hpp"

namespace hetnet {

MeridianProfile constant_profile(double c) {
    MeridianProfile m;
    m.value = [c](double, double) { return c; };
    m.du = [](double, double) { return 0.0; };
    m.dv = [](double, double) { return 0.0; };
    return m;
}

MeridianProfile quadratic_profile() {
    MeridianProfile m;
    m.value = [](double u, double v) { return 1.0 - u * u - v * v; };
    m.du = [](double u, double) { return -2.0 * u; };
    m.dv = [](double, double v) { return -2.0 * v; };
    return m;
}

double circle_spread(const MeridianProfile& xi, int samples) {
    double lo = INFINITY, hi = -INFINITY;
    for (int k = 0; k < samples; ++k) {
        double a = kTwoPi * k / samples;
        double v = xi.value(std::cos(a), std::sin(a));
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return hi - lo;
}

namespace {

struct UpsilonParts {
    double lam, rho_hat, M, W, u, v;
};

// Everything below is written in s = 1 - r2 so the finite difference can step in s directly.
UpsilonParts upsilon_parts(double s, double phi2, const ModelParams& p, const DerivedConstants& d) {
    if (!(s > 0.0)) throw Error(ErrorKind::DomainUnstableManifold, "upsilon needs r2 < 1");
    if (!std::isfinite(s) || !std::isfinite(phi2)) throw Error(ErrorKind::NonFinite, "upsilon input");
    UpsilonParts q;
    q.lam = (std::log(p.eps) - std::log(s)) / d.delta;
    q.rho_hat = p.eps * std::exp(-q.lam);
    q.M = 1.0 - q.rho_hat;
    q.W = phi2 - d.xi * p.omega2 * q.lam;
    q.u = q.M * std::cos(q.W);
    q.v = q.M * std::sin(q.W);
    return q;
}

double upsilon_s(double s, double phi2, const MeridianProfile& xi, const ModelParams& p, const DerivedConstants& d) {
    auto q = upsilon_parts(s, phi2, p, d);
    return xi.value(q.u, q.v) + d.xi * p.omega1 * q.lam;
}

} // namespace

double upsilon(double r2, double phi2, const MeridianProfile& xi, const ModelParams& p) {
    auto d = derived_constants(p);
    return upsilon_s(1.0 - r2, phi2, xi, p, d);
}

double dupsilon_dphi2(double r2, double phi2, const MeridianProfile& xi, const ModelParams& p) {
    auto d = derived_constants(p);
    auto q = upsilon_parts(1.0 - r2, phi2, p, d);
    // u = M cos W, v = M sin W with dW/dphi2 = 1
    return xi.du(q.u, q.v) * (-q.v) + xi.dv(q.u, q.v) * q.u;
}

Remainder remainder(double r2, double phi2, const MeridianProfile& xi, const ModelParams& p) {
    auto d = derived_constants(p);
    double s = 1.0 - r2;
    auto q = upsilon_parts(s, phi2, p, d);
    double xu = xi.du(q.u, q.v), xv = xi.dv(q.u, q.v);
    double c = std::cos(q.W), sn = std::sin(q.W);
    Remainder out;
    out.R1 = q.rho_hat / d.delta * (xu * c + xv * sn);
    out.R2 = d.xi * p.omega2 / d.delta * q.M * (xu * sn - xv * c);
    out.R = out.R1 + out.R2;
    out.lhs = d.xi * p.omega1 / d.delta + out.R;

    // (1 - r2) dUpsilon/dr2 = -s dUpsilon/ds
    double h = 1e-7 * s;
    double up = upsilon_s(s + h, phi2, xi, p, d);
    double dn = upsilon_s(s - h, phi2, xi, p, d);
    out.fd = -s * (up - dn) / (2.0 * h);
    out.fd_ok = std::fabs(out.fd - out.lhs) <= 1e-5 * std::fabs(out.lhs);
    return out;
}

SpiralVerdict classify_spiral(const std::vector<SpiralSample>& samples, const SpiralOptions& opt) {
    const size_t n = samples.size();
    if (n < 100) throw Error(ErrorKind::Precondition, "classify_spiral needs at least 100 samples");
    for (const auto& s : samples)
        if (!std::isfinite(s.theta) || !std::isfinite(s.h)) throw Error(ErrorKind::NonFinite, "spiral sample");

    SpiralVerdict v;
    auto sgn = [](double a) { return (a > 0) - (a < 0); };
    int dir = sgn(samples[n - 1].theta - samples[n - 2].theta);
    if (dir == 0) {
        v.theta_monotone_from = n - 1;
        v.limit_h = samples[n - 1].h;
        v.reason = "theta is not strictly monotone at the end of the sample";
        return v;
    }
    size_t k0 = n - 1;
    while (k0 > 0 && sgn(samples[k0].theta - samples[k0 - 1].theta) == dir) --k0;
    v.theta_monotone_from = k0;
    v.theta_range = std::fabs(samples[n - 1].theta - samples[k0].theta);
    v.limit_h = samples[n - 1].h;

    const size_t L = n - k0;
    double mean = 0;
    for (size_t k = k0; k < n; ++k) mean += samples[k].h;
    mean /= double(L);
    const bool from_above = mean >= v.limit_h;

    // Envelopes over the monotone tail. From above both are non-increasing, from
    // below both are non-decreasing; in either case they close onto limit_h.
    v.envelope_upper.assign(L, 0.0);
    v.envelope_lower.assign(L, 0.0);
    double run = from_above ? INFINITY : -INFINITY;
    for (size_t k = 0; k < L; ++k) {
        double h = samples[k0 + k].h;
        if (from_above) {
            run = std::min(run, h);
            v.envelope_lower[k] = run;
        } else {
            run = std::max(run, h);
            v.envelope_upper[k] = run;
        }
    }
    run = from_above ? -INFINITY : INFINITY;
    for (size_t k = L; k-- > 0;) {
        double h = samples[k0 + k].h;
        if (from_above) {
            run = std::max(run, h);
            v.envelope_upper[k] = run;
        } else {
            run = std::min(run, h);
            v.envelope_lower[k] = run;
        }
    }

    if (v.theta_range < opt.min_span) {
        v.reason = "lifted angle span below threshold";
        return v;
    }
    if (L < 20) {
        v.reason = "monotone tail too short";
        return v;
    }
    const size_t last = k0 + (L * 9) / 10;
    double end_dev = 0;
    for (size_t k = last; k < n; ++k) end_dev = std::max(end_dev, std::fabs(samples[k].h - v.limit_h));
    double start_dev = std::fabs(samples[k0].h - v.limit_h);
    if (end_dev > opt.tol) {
        v.reason = "envelopes do not close within tolerance";
        return v;
    }
    if (!(start_dev > end_dev) || start_dev <= opt.tol) {
        v.reason = "h does not approach its limit (closed curve rather than spiral)";
        return v;
    }
    v.is_spiral = true;
    v.reason = "ok";
    return v;
}

namespace {

double depth_param(const SheetGrid& g, int k) {
    if (g.samples < 2) throw Error(ErrorKind::Precondition, "sheet grid needs at least two samples per slice");
    return g.t_min + (g.t_max - g.t_min) * k / (g.samples - 1);
}

void check_grid(const SheetGrid& g) {
    if (g.slices < 1 || g.samples < 100) throw Error(ErrorKind::Precondition, "sheet grid too coarse");
    if (!(g.t_min >= 0.0) || !(g.t_max > g.t_min)) throw Error(ErrorKind::Precondition, "sheet grid depth range");
}

} // namespace

SheetImage sheet_image(const MeridianProfile& xi, const SheetGrid& grid, const ModelParams& p) {
    require_valid(p);
    check_grid(grid);
    SheetImage out;
    out.all_spiral = true;
    for (int j = 0; j < grid.slices; ++j) {
        SheetSlice sl;
        sl.source_angle = kTwoPi * j / grid.slices;
        std::vector<SpiralSample> proj;
        for (int k = 0; k < grid.samples; ++k) {
            double t = depth_param(grid, k);
            double gap = p.eps * std::exp(-t);
            double r1 = 1.0 - gap;
            double phi1 = xi.value(r1 * std::cos(sl.source_angle), r1 * std::sin(sl.source_angle));
            auto img = g_closed_depth(t, phi1, sl.source_angle, p);
            sl.points.push_back({SectionId::Sigma2Out, 1.0 - img.sigma, img.phi1, img.phi2});
            proj.push_back({img.phi2, img.sigma});
        }
        sl.verdict = classify_spiral(proj);
        out.all_spiral = out.all_spiral && sl.verdict.is_spiral && std::fabs(sl.verdict.limit_h) <= 1e-6;
        out.slices.push_back(std::move(sl));
    }
    return out;
}

SheetImage sheet_preimage(const MeridianProfile& xi, const SheetGrid& grid, const ModelParams& p) {
    require_valid(p);
    check_grid(grid);
    SheetImage out;
    out.all_spiral = true;
    for (int j = 0; j < grid.slices; ++j) {
        SheetSlice sl;
        sl.source_angle = kTwoPi * j / grid.slices;
        std::vector<SpiralSample> proj;
        for (int k = 0; k < grid.samples; ++k) {
            double t = depth_param(grid, k);
            double sigma = p.eps * std::exp(-t);
            double r2 = 1.0 - sigma;
            double phi1 = xi.value(r2 * std::cos(sl.source_angle), r2 * std::sin(sl.source_angle));
            auto pre = g_inverse_depth(sigma, phi1, sl.source_angle, p);
            sl.points.push_back({SectionId::Sigma1In, 1.0 - pre.sigma, pre.phi1, pre.phi2});
            proj.push_back({pre.phi2, pre.sigma});
        }
        sl.verdict = classify_spiral(proj);
        out.all_spiral = out.all_spiral && sl.verdict.is_spiral && std::fabs(sl.verdict.limit_h) <= 1e-6;
        out.slices.push_back(std::move(sl));
    }
    return out;
}

namespace {

struct Hit {
    double h;
    int label;
};

// Points where a sampled curve with monotone lifted angle crosses alpha (mod 2 pi).
// h is interpolated in log scale since it decays exponentially along the curve.
void collect_hits(const std::vector<SpiralSample>& c, double alpha, int label, std::vector<Hit>& out) {
    for (size_t k = 0; k + 1 < c.size(); ++k) {
        double a = c[k].theta, b = c[k + 1].theta;
        double lo = std::min(a, b), hi = std::max(a, b);
        double m0 = std::ceil((lo - alpha) / kTwoPi);
        for (double m = m0; alpha + kTwoPi * m < hi; m += 1.0) {
            double target = alpha + kTwoPi * m;
            double w = (target - a) / (b - a);
            double lh = (1 - w) * std::log(c[k].h) + w * std::log(c[k + 1].h);
            out.push_back({std::exp(lh), label});
        }
    }
}

} // namespace

ScrollReport scroll_check(int region, const SheetGrid& grid, const ModelParams& p) {
    require_valid(p);
    check_grid(grid);
    if (region != 1 && region != 2) throw Error(ErrorKind::Precondition, "region must be 1 or 2");
    ScrollReport rep;
    rep.region = region;
    rep.both_spiral = true;
    rep.interlaced = true;
    const double theta = p.theta_out(region);
    const double sign_edge[2] = {-1.0, 1.0};

    for (int j = 0; j < grid.slices; ++j) {
        double phi1_out = kTwoPi * j / grid.slices;
        std::vector<SpiralSample> curve[2];
        for (int e = 0; e < 2; ++e) {
            double phi2_out = theta + sign_edge[e] * p.eps_out;
            for (int k = 0; k < grid.samples; ++k) {
                double t = depth_param(grid, k);
                double sigma = std::min(p.eps, p.eps_out) * std::exp(-(t - grid.t_min));
                auto pre = g_inverse_depth(sigma, phi1_out, phi2_out, p);
                curve[e].push_back({pre.phi2, pre.sigma});
            }
            auto v = classify_spiral(curve[e]);
            rep.both_spiral = rep.both_spiral && v.is_spiral;
        }
        const int n_alpha = 32;
        for (int a = 0; a < n_alpha; ++a) {
            double alpha = kTwoPi * (a + 0.5) / n_alpha;
            std::vector<Hit> hits;
            collect_hits(curve[0], alpha, 0, hits);
            collect_hits(curve[1], alpha, 1, hits);
            if (hits.size() < 4) continue;
            std::sort(hits.begin(), hits.end(), [](const Hit& x, const Hit& y) { return x.h > y.h; });
            // Both ends of the sampled range can clip one curve, so drop the outermost hit
            // at either end before testing alternation.
            bool alt = true;
            for (size_t k = 2; k + 1 < hits.size() - 1; ++k)
                if (hits[k].label == hits[k - 1].label) alt = false;
            ++rep.checked_angles;
            rep.interlaced = rep.interlaced && alt;
        }
    }
    if (rep.checked_angles == 0) rep.interlaced = false;
    return rep;
}

double shell_depth(int N, const ModelParams& p) {
    auto d = derived_constants(p);
    return std::log(p.eps) / d.delta + kTwoPi * N / (d.xi * p.omega2);
}

namespace {

// Sign of r1_in(Psi21(G(p))) - 1 at depth lam on the ray phi2_in = ray, evaluated
// without forming 1 - r in linear scale. Returns +1, -1, or 0 when the image is
// outside both out regions (Psi21 undefined).
int defect_sign(const DeepModel<double>& m, double lam, double ray) {
    int branch = 1;
    double x = 0;
    classify_psi(m, ray + m.xw2 * lam, branch, x);
    if (!inside_region(m, lam, x)) return 0;
    double k = m.gamma * kappa_offset(m.shape, branch, x);
    // defect = -(eps exp(-delta lam) + gamma kappa)
    if (k >= 0) return -1;
    double log_sigma = m.log_eps - m.delta * lam;
    return std::log(-k) > log_sigma ? 1 : -1;
}

} // namespace

std::vector<ConnectionCurve> find_connections(double gamma, int n_min, int n_max, const ModelParams& p,
                                              const ConnectionOptions& opt) {
    require_valid(p);
    if (!std::isfinite(gamma) || gamma < 0.0) throw Error(ErrorKind::InvalidParameters, "gamma must be >= 0");
    if (gamma == 0.0)
        throw Error(ErrorKind::CoincidentManifolds, "gamma = 0: W^u(C2) and W^s(C1) coincide, connections are not isolated");
    if (n_max < n_min) throw Error(ErrorKind::Precondition, "empty turn range");
    if (opt.sheet != 1 && opt.sheet != 2) throw Error(ErrorKind::Precondition, "sheet must be 1 or 2");
    if (opt.rays < 4) throw Error(ErrorKind::Precondition, "need at least 4 rays");

    auto d = derived_constants(p);
    auto m = make_deep_model<double>(p, d, gamma, kPi);
    const double shell = kTwoPi / m.xw2;
    const double lo = std::max(shell_depth(n_min, p) - shell, m.lam_min);
    const double hi = shell_depth(n_max + 2, p);
    const double step = shell / 128.0;
    const double turn_offset = m.xw2 * m.log_eps / m.delta;

    std::map<std::pair<int, int>, ConnectionCurve> curves;
    for (int r = 0; r < opt.rays; ++r) {
        double ray = kTwoPi * r / opt.rays;
        double a = lo;
        int sa = defect_sign(m, a, ray);
        for (double b = lo + step; b <= hi + step; b += step) {
            int sb = defect_sign(m, b, ray);
            if (sa != 0 && sb != 0 && sa != sb) {
                double l = a, u = b;
                while (u - l > opt.lam_tol) {
                    double mid = 0.5 * (l + u);
                    int sm = defect_sign(m, mid, ray);
                    if (sm == 0) break;
                    if (sm == sa) l = mid; else u = mid;
                    if (mid == l && mid == u) break;
                }
                double root = 0.5 * (l + u);
                int branch = 1;
                double x = 0;
                double psi = ray + m.xw2 * root;
                classify_psi(m, psi, branch, x);
                int k = int(std::lround((psi - m.theta_out[branch] - turn_offset) / kTwoPi));
                int N = k - 1;
                if (N >= n_min && N <= n_max) {
                    double gap = p.eps * std::exp(-root);
                    double xs = kappa_offset_inverse(m.shape, opt.sheet, gap / gamma, 1e-14);
                    auto& c = curves[{N, branch}];
                    c.turn = N;
                    c.symbol = branch;
                    c.sheet = opt.sheet;
                    c.points.push_back({ray, root, gap, p.theta_in(opt.sheet) + xs});
                    c.max_gap = std::max(c.max_gap, gap);
                }
            }
            a = b;
            sa = sb;
        }
    }
    std::vector<ConnectionCurve> out;
    for (auto& kv : curves) out.push_back(std::move(kv.second));
    return out;
}

} // namespace hetnet
