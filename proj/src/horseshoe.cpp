#include "hetnet/horseshoe.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include <boost/multiprecision/mpfr.hpp>

#include "hetnet/deep.hpp"
#include "hetnet/errors.hpp"
#include "hetnet/return_map.hpp"
#include "hetnet/surface.hpp"

namespace hetnet {

namespace mp = boost::multiprecision;
using Real = mp::number<mp::mpfr_float_backend<0>, mp::et_off>;

double shell_a(int N, const ModelParams& p) {
    auto d = derived_constants(p);
    return std::exp(-kTwoPi * N * d.delta / (d.xi * p.omega2));
}

double shell_b(int N, const ModelParams& p) {
    auto d = derived_constants(p);
    return std::pow(p.eps, 1.0 - 1.0 / d.delta) * std::exp(-kTwoPi * N / (d.xi * p.omega2));
}

double n_threshold(const ModelParams& p) {
    auto d = derived_constants(p);
    return -std::log(p.eps_out) * d.xi * p.omega2 / (kTwoPi * d.delta);
}

OutSlab out_slab(int N, int region, const ModelParams& p) {
    require_valid(p);
    if (region != 1 && region != 2) throw Error(ErrorKind::Precondition, "region must be 1 or 2");
    double thr = n_threshold(p);
    if (!(N > thr)) {
        std::ostringstream os;
        os << "N = " << N << " must exceed " << thr;
        throw Error(ErrorKind::NTooSmall, os.str());
    }
    auto d = derived_constants(p);
    OutSlab s;
    s.N = N;
    s.region = region;
    s.a_N = shell_a(N, p);
    s.a_N1 = shell_a(N + 1, p);
    s.lam_N = std::log(p.eps) / d.delta + kTwoPi * N / (d.xi * p.omega2);
    s.lam_N1 = std::log(p.eps) / d.delta + kTwoPi * (N + 1) / (d.xi * p.omega2);
    s.phi2_left = p.theta_out(region) - p.eps_out;
    s.phi2_right = p.theta_out(region) + p.eps_out;
    s.r2_inner = 1.0 - s.a_N;
    s.r2_outer = 1.0 - s.a_N1;
    return s;
}

std::string to_string(Face f) {
    switch (f) {
    case Face::EL: return "E_L";
    case Face::ER: return "E_R";
    case Face::TI: return "T_I";
    case Face::TO: return "T_O";
    }
    return "?";
}

InSlab in_slab_boundaries(int N, int region, const ModelParams& p, int grid) {
    if (grid < 2) throw Error(ErrorKind::Precondition, "boundary grid needs at least 2 points per side");
    InSlab s;
    s.out = out_slab(N, region, p);
    auto d = derived_constants(p);
    const double xw1 = d.xi * p.omega1, xw2 = d.xi * p.omega2;
    s.b_N = p.eps * std::exp(-s.out.lam_N);
    s.b_N1 = p.eps * std::exp(-s.out.lam_N1);
    const double theta = p.theta_out(region);

    auto push = [&](Face f, double lam, double phi1_out, double phi2_out) {
        BoundarySample b;
        b.lam = lam;
        b.gap = p.eps * std::exp(-lam);
        b.phi1 = phi1_out - xw1 * lam;
        b.phi2 = phi2_out - xw2 * lam;
        auto img = g_closed_depth(b.lam, b.phi1, b.phi2, p);
        double res = 0;
        if (f == Face::EL || f == Face::ER) {
            res = std::fabs(img.phi2 - phi2_out);
            double lo = s.out.a_N1 * (1 - 1e-12), hi = s.out.a_N * (1 + 1e-12);
            if (img.sigma < lo) res = std::max(res, (lo - img.sigma) / lo);
            if (img.sigma > hi) res = std::max(res, (img.sigma - hi) / hi);
        } else {
            double target = f == Face::TI ? s.out.a_N : s.out.a_N1;
            res = std::fabs(img.sigma - target) / target;
            double off = img.phi2 - theta;
            double w = off - kTwoPi * std::floor((off + kPi) / kTwoPi);
            if (std::fabs(w) > p.eps_out + 1e-12) res = std::max(res, std::fabs(w) - p.eps_out);
        }
        res = std::max(res, std::fabs(img.phi1 - phi1_out));
        s.forward_residual = std::max(s.forward_residual, res);
        s.faces[int(f)].push_back(b);
    };

    for (int a = 0; a < grid; ++a) {
        double t = double(a) / (grid - 1);
        for (int c = 0; c < grid; ++c) {
            double phi1_out = kTwoPi * c / (grid - 1);
            double lam = s.out.lam_N + t * (s.out.lam_N1 - s.out.lam_N);
            push(Face::EL, lam, phi1_out, s.out.phi2_left);
            push(Face::ER, lam, phi1_out, s.out.phi2_right);
            double phi2_out = s.out.phi2_left + t * (s.out.phi2_right - s.out.phi2_left);
            push(Face::TI, s.out.lam_N, phi1_out, phi2_out);
            push(Face::TO, s.out.lam_N1, phi1_out, phi2_out);
        }
    }
    return s;
}

WindingReport winding_check(const InSlab& slab, const ModelParams& p) {
    WindingReport w;
    for (int f = 0; f < 4; ++f) {
        const auto& pts = slab.faces[f];
        if (pts.empty()) continue;
        double lo1 = INFINITY, hi1 = -INFINITY, lo2 = INFINITY, hi2 = -INFINITY;
        for (const auto& b : pts) {
            lo1 = std::min(lo1, b.phi1);
            hi1 = std::max(hi1, b.phi1);
            lo2 = std::min(lo2, b.phi2);
            hi2 = std::max(hi2, b.phi2);
        }
        w.phi1_span[f] = hi1 - lo1;
        w.phi2_span[f] = hi2 - lo2;
    }
    const double tol = 1e-9;
    w.ok = w.phi1_span[0] >= kTwoPi - tol && w.phi1_span[1] >= kTwoPi - tol &&
           std::fabs(w.phi2_span[0] - kTwoPi) <= tol && std::fabs(w.phi2_span[1] - kTwoPi) <= tol &&
           w.phi1_span[2] >= kTwoPi - tol && w.phi1_span[3] >= kTwoPi - tol &&
           std::fabs(w.phi2_span[2] - 2 * p.eps_out) <= tol && std::fabs(w.phi2_span[3] - 2 * p.eps_out) <= tol;
    return w;
}

namespace {

DeepModel<double> double_model(const ModelParams& p, double gamma) {
    auto d = derived_constants(p);
    return make_deep_model<double>(p, d, gamma, kPi);
}

bool try_kappa_inverse(const DeepModel<double>& m, int branch, double y, double& x) {
    try {
        x = kappa_offset_inverse(m.shape, branch, y, 1e-15);
    } catch (const Error&) {
        return false;
    }
    return std::isfinite(x);
}

// Adapted-norm contraction of the map induced on the stable coordinates (lam, phi1)
// at fixed unstable output x'. With r = omega1/omega2 and A = gamma kappa'/rho',
//   B = [[delta sigma/rho' - r, -1/(xi omega2)], [r/A, 1/(xi omega2 A)]]
// and the weighted norm |dlam| + c |dphi1|, c = 1/(r xi omega2).
double stable_contraction(const DeepModel<double>& m, double sigma, double rho_next, double dkappa) {
    double r = m.xw1 / m.xw2;
    double A = m.gamma * dkappa / rho_next;
    double b11 = m.delta * sigma / rho_next - r;
    double b12 = -1.0 / m.xw2;
    double b21 = r / A;
    double b22 = 1.0 / (m.xw2 * A);
    double c = 1.0 / (r * m.xw2);
    return std::max(std::fabs(b11) + c * std::fabs(b21), std::fabs(b12) / c + std::fabs(b22));
}

} // namespace

ConleyMoserReport verify_conley_moser(int N, double gamma, const ModelParams& p, int grid) {
    if (grid < 2) throw Error(ErrorKind::Precondition, "grid too small");
    auto slab = out_slab(N, 1, p);
    if (!std::isfinite(gamma) || gamma < 0) throw Error(ErrorKind::InvalidParameters, "gamma must be >= 0");
    ConleyMoserReport rep;
    rep.N = N;
    rep.gamma = gamma;
    const double lamN = slab.lam_N, lamN1 = slab.lam_N1, shell = lamN1 - lamN;
    rep.width_S = p.eps * std::exp(-lamN) - p.eps * std::exp(-lamN1);
    auto m = double_model(p, gamma);
    const double eps_w = p.eps_out;
    const double a_pow = std::exp(kTwoPi * N);   // a_N^(-xi omega2/delta)

    for (int i = 1; i <= 2; ++i) {
        for (int j = 1; j <= 2; ++j) {
            PairReport pr;
            pr.i = i;
            pr.j = j;
            if (gamma == 0.0) {
                pr.empty = true;
                pr.note = std::string(to_string(ErrorKind::EmptyIntersection)) + ": gamma = 0, S_i is not mapped across the shell";
                rep.pairs.push_back(pr);
                continue;
            }
            if (gamma > p.eps_out) {
                // outside the small-unfolding regime the slab construction assumes
                pr.note = "slab condition fails: gamma exceeds eps_out";
                rep.pairs.push_back(pr);
                continue;
            }
            bool any = false, full = true, interior = true;
            double resid = 0, nu_h = 0, nu_v = 0, width_h = 0;
            for (int a = 0; a < grid; ++a) {
                double lam = lamN + shell * (a + 0.5) / grid;
                double sigma = p.eps * std::exp(-m.delta * lam);
                double rho = p.eps * std::exp(-lam);
                for (int c = 0; c < grid; ++c) {
                    double phi1 = kTwoPi * (c + 0.5) / grid;
                    double base = phi1 + m.xw1 * lam + m.xw2 * lamN;
                    double t0 = wrap_angle(m, m.theta_out[j] - eps_w - base);
                    double pieces[2][2];
                    int np = 0;
                    if (t0 + 2 * eps_w <= kTwoPi) {
                        pieces[np][0] = lamN + t0 / m.xw2;
                        pieces[np][1] = lamN + (t0 + 2 * eps_w) / m.xw2;
                        ++np;
                    } else {
                        pieces[np][0] = lamN + t0 / m.xw2;
                        pieces[np][1] = lamN1;
                        ++np;
                        pieces[np][0] = lamN;
                        pieces[np][1] = lamN + (t0 + 2 * eps_w - kTwoPi) / m.xw2;
                        ++np;
                    }
                    bool fibre = false;
                    double hsum = 0;
                    for (int q = 0; q < np; ++q) {
                        double xe[2];
                        bool ok = true;
                        for (int e = 0; e < 2; ++e) {
                            double lt = pieces[q][e];
                            double y = (p.eps * std::exp(-lt) - sigma) / gamma;
                            if (!try_kappa_inverse(m, i, y, xe[e])) {
                                ok = false;
                                break;
                            }
                        }
                        if (!ok) {
                            interior = false;
                            continue;
                        }
                        for (int e = 0; e < 2; ++e) {
                            if (!(std::fabs(xe[e]) < eps_w)) interior = false;
                            // forward image of the fibre end: must sit on the face it was solved for
                            BoxState<double> s;
                            s.lam = lam;
                            s.x = xe[e];
                            s.phi1 = phi1;
                            s.branch = i;
                            s.in_region = true;
                            auto st = deep_step(m, s);
                            if (st.status != StepStatus::Ok) {
                                resid = INFINITY;
                                continue;
                            }
                            double lt = pieces[q][e];
                            double psi_target = base + m.xw2 * (lt - lamN);
                            double psi_now = phi1 + m.xw1 * lam + m.xw2 * st.next.lam;
                            resid = std::max(resid, std::fabs(st.next.lam - lt));
                            resid = std::max(resid, std::fabs(wrap_offset(m, psi_now - psi_target)));
                            double dk = dkappa_offset(m.shape, i, xe[e]);
                            nu_h = std::max(nu_h, rho / (m.xw2 * gamma * std::fabs(dk)));
                            nu_v = std::max(nu_v, stable_contraction(m, sigma, st.rho, dk));
                        }
                        fibre = true;
                        hsum += rho * std::fabs(xe[1] - xe[0]) / m.xw2;
                    }
                    if (fibre) any = true; else full = false;
                    width_h = std::max(width_h, hsum);
                }
            }
            // V_{j,i}: for each lam' of S_j the phi1' fibre is theta_i_in + kappa_i^{-1}((rho' - sigma)/gamma)
            // over lam in the shell; phi1 of the preimage is free so the fibre does not depend on x'.
            bool vfull = true;
            double width_v = 0;
            for (int a = 0; a < grid; ++a) {
                double lam2 = lamN + shell * (a + 0.5) / grid;
                double rho2 = p.eps * std::exp(-lam2);
                double xa = 0, xb = 0;
                bool oka = try_kappa_inverse(m, i, (rho2 - p.eps * std::exp(-m.delta * lamN)) / gamma, xa);
                bool okb = try_kappa_inverse(m, i, (rho2 - p.eps * std::exp(-m.delta * lamN1)) / gamma, xb);
                if (!oka || !okb || !(std::fabs(xa) < eps_w) || !(std::fabs(xb) < eps_w)) {
                    vfull = false;
                    continue;
                }
                width_v = std::max(width_v, std::fabs(xb - xa));
            }
            pr.empty = !any;
            pr.full = full;
            pr.interior = interior;
            pr.boundary_map = resid <= 1e-9;
            pr.vertical_full = vfull;
            pr.slab_ok = any && full && interior && pr.boundary_map && vfull;
            pr.nu_h = nu_h;
            pr.nu_v = nu_v;
            pr.K = nu_h * a_pow;
            pr.width_h = width_h;
            pr.width_v = width_v;
            pr.boundary_residual = resid;
            if (pr.empty)
                pr.note = std::string(to_string(ErrorKind::EmptyIntersection)) + ": R(S_i) misses S_j on the grid";
            else if (!pr.slab_ok)
                pr.note = "slab condition fails";
            rep.pairs.push_back(pr);
        }
    }
    rep.pass = true;
    for (const auto& pr : rep.pairs) {
        rep.nu_h = std::max(rep.nu_h, pr.nu_h);
        rep.nu_v = std::max(rep.nu_v, pr.nu_v);
        rep.pass = rep.pass && pr.slab_ok;
    }
    rep.K = rep.nu_h * a_pow;
    rep.pass = rep.pass && rep.nu_h < 1.0 && rep.nu_v < 1.0;
    return rep;
}

// ---------------------------------------------------------------- word realization

namespace {

struct PrecisionGuard {
    unsigned old;
    explicit PrecisionGuard(unsigned digits) : old(Real::default_precision()) { Real::default_precision(digits); }
    ~PrecisionGuard() { Real::default_precision(old); }
};

Real real_pi() {
    Real pi;
    mpfr_const_pi(pi.backend().data(), MPFR_RNDN);
    return pi;
}

int sym_at(const Word& w, long k) {
    long L = long(w.size());
    return w[size_t(((k % L) + L) % L)];
}

struct Chain {
    long lo = 0;   // index of the first entry
    std::vector<Real> l, x, f;
    Real& L(long k) { return l[size_t(k - lo)]; }
    Real& X(long k) { return x[size_t(k - lo)]; }
    Real& F(long k) { return f[size_t(k - lo)]; }
};

// Orbit segment p_{-B}, ..., p_{L+F} following the periodic extension of w, started
// from the free depth `start` at the far past. The depth recursion
//   l_{k+1} = (theta_out[w_{k+1}] + x_{k+1} - f_k - xi omega1 l_k) / (xi omega2)   (mod shell)
// contracts by omega1/omega2 per step, so the start is forgotten geometrically.
Chain build_chain(const DeepModel<Real>& m, const Word& w, const Real& lamN, const Real& shell, long B, long L,
                  long F, const Real& start, const Real& tol, int& sweeps_used) {
    Chain c;
    c.lo = -B;
    size_t n = size_t(B + L + F + 2);
    c.l.assign(n, Real(0));
    c.x.assign(n, Real(0));
    c.f.assign(n, Real(0));
    const long hi = L + F + 1;
    auto wrap_shell = [&](const Real& v) {
        using std::floor;
        return Real(v - shell * floor((v - lamN) / shell));
    };
    sweeps_used = 0;
    for (int sweep = 0; sweep < 2000; ++sweep) {
        c.L(-B) = start;
        c.L(-B + 1) = start;
        c.F(-B) = m.theta_out[sym_at(w, -B + 1)] + c.X(-B + 1) - m.xw1 * c.L(-B) - m.xw2 * c.L(-B + 1);
        for (long k = -B + 1; k < hi; ++k) {
            c.F(k) = m.theta_in[sym_at(w, k - 1)] + c.X(k - 1);
            Real v = (m.theta_out[sym_at(w, k + 1)] + c.X(k + 1) - c.F(k) - m.xw1 * c.L(k)) / m.xw2;
            c.L(k + 1) = wrap_shell(v);
        }
        c.F(hi) = m.theta_in[sym_at(w, hi - 1)] + c.X(hi - 1);
        Real change = 0;
        for (long k = -B; k < hi; ++k) {
            using std::exp;
            using std::fabs;
            Real y = (m.eps * exp(-c.L(k + 1)) - m.eps * exp(-m.delta * c.L(k))) / m.gamma;
            Real nx;
            try {
                const Real* guess = sweep > 0 ? &c.X(k) : nullptr;
                nx = kappa_offset_inverse(m.shape, sym_at(w, k), y, tol, guess);
            } catch (const Error&) {
                std::ostringstream os;
                os << "no surface point at chain index " << k;
                throw Error(ErrorKind::RefinementFailure, os.str());
            }
            Real dlt = fabs(nx - c.X(k));
            Real scale = fabs(nx) + Real(1e-300);
            if (dlt / scale > change) change = dlt / scale;
            c.X(k) = nx;
        }
        ++sweeps_used;
        if (change <= tol) return c;
    }
    throw Error(ErrorKind::RefinementFailure, "chain did not converge");
}

double to_d(const Real& r) { return r.convert_to<double>(); }

} // namespace

WordRealization realize_word(const Word& w, int N, double gamma, const ModelParams& p, const RealizeOptions& opt) {
    if (w.empty()) throw Error(ErrorKind::Precondition, "word must not be empty");
    for (int s : w)
        if (s != 1 && s != 2) throw Error(ErrorKind::Precondition, "word symbols must be 1 or 2");
    if (!(gamma > 0)) throw Error(ErrorKind::Precondition, "realize_word needs gamma > 0");
    auto slab = out_slab(N, 1, p);
    auto dc = derived_constants(p);
    const long L = long(w.size());
    const long F = std::max(1, opt.forward_margin);

    // Contraction of the depth recursion and the expansion rates that set the precision budget.
    double r = p.omega1 / p.omega2;
    if (!(r < 1)) throw Error(ErrorKind::Precondition, "depth recursion needs omega1 < omega2");
    long B = opt.backward_steps;
    if (B <= 0) B = long(std::ceil(std::log(1e-13 / kTwoPi) / std::log(r))) + 2;
    int digits = opt.digits;
    if (digits <= 0) {
        double bN = shell_b(N, p), bN1 = shell_b(N + 1, p), aN1 = shell_a(N + 1, p);
        double fwd = std::log10(gamma * dc.xi * p.omega2 * p.surf_amp / bN1);
        double bwd = std::log10(bN / (dc.delta * aN1));
        double per = std::max(0.0, fwd) + std::max(0.0, bwd) + 2.0;
        digits = int(std::ceil(50 + per * double(L + F + 2)));
    }
    PrecisionGuard guard(static_cast<unsigned>(digits));
    const Real pi = real_pi();
    auto m = make_deep_model<Real>(p, dc, Real(gamma), pi);
    const Real shell = m.two_pi / m.xw2;
    const Real lamN = m.log_eps / m.delta + shell * N;
    const Real lamN1 = lamN + shell;
    const Real tol = mp::pow(Real(10), -(digits - 10));
    (void)slab;

    WordRealization out;
    out.word = w;
    out.N = N;
    out.gamma = gamma;
    out.digits = digits;

    int sweeps = 0;
    Chain c = build_chain(m, w, lamN, shell, B, L, F, lamN + shell / 2, tol, sweeps);
    for (long k = -B; k <= L + F; ++k) {
        using std::fabs;
        if (!(fabs(c.X(k)) < m.window)) {
            std::ostringstream os;
            os << "chain leaves the out window at index " << k << " (depth reached " << k + B << ")";
            throw Error(ErrorKind::RefinementFailure, os.str());
        }
    }

    BoxState<Real> s0;
    s0.lam = c.L(0);
    s0.x = c.X(0);
    s0.phi1 = c.F(0);
    s0.branch = w[0];
    s0.in_region = inside_region(m, s0.lam, s0.x);

    out.lam = to_d(s0.lam);
    out.x = to_d(s0.x);
    out.gap = to_d(m.eps * mp::exp(-s0.lam));
    out.phi1_branch = sym_at(w, -1);
    out.phi1_offset = to_d(c.X(-1));
    Real phi2 = phi2_of(m, s0);
    out.point.section = SectionId::Sigma1In;
    out.point.radial = 1.0 - out.gap;
    out.point.phi1 = to_d(wrap_angle(m, s0.phi1));
    out.point.phi2 = to_d(wrap_angle(m, phi2));

    auto in_shell = [&](const Real& lam) {
        Real slack = shell * Real(1e-12);
        return lam >= lamN - slack && lam <= lamN1 + slack;
    };

    // forward walk
    BoxState<Real> s = s0;
    bool fwd = s.in_region && in_shell(s.lam);
    for (long k = 0; k < L && fwd; ++k) {
        out.forward_symbols.push_back(s.branch);
        auto st = deep_step(m, s);
        if (st.status != StepStatus::Ok) {
            fwd = false;
            out.failure = "forward step " + std::to_string(k) + " left the chart";
            break;
        }
        out.flight_times.push_back(to_d(st.flight));
        s = st.next;
        if (!s.in_region || !in_shell(s.lam)) {
            fwd = false;
            out.failure = "iterate " + std::to_string(k + 1) + " left S_N";
        }
    }
    fwd = fwd && s.branch == w[0];
    for (long k = 0; k < L && fwd; ++k)
        if (out.forward_symbols[size_t(k)] != w[size_t(k)]) fwd = false;
    out.forward_ok = fwd;

    {
        using std::fabs;
        Real dl = fabs(s.lam - s0.lam);
        Real dx = fabs(s.x - s0.x);
        Real df = fabs(wrap_offset(m, s.phi1 - s0.phi1));
        out.periodic_residual = to_d(std::max({dl, dx, df}));
    }

    // backward walk from the L-th iterate
    if (fwd) {
        BoxState<Real> b = s;
        bool ok = true;
        std::vector<int> back;
        for (long k = 0; k < L; ++k) {
            auto ir = deep_inverse_step(m, b);
            if (!ir.ok || !in_shell(ir.prev.lam)) {
                ok = false;
                out.failure = "backward step " + std::to_string(k) + " left S_N";
                break;
            }
            b = ir.prev;
            back.push_back(b.branch);
        }
        out.backward_symbols = back;
        if (ok) {
            for (long k = 0; k < L; ++k)
                if (back[size_t(k)] != w[size_t(L - 1 - k)]) ok = false;
            using std::fabs;
            Real ml = fabs(b.lam - s0.lam) / fabs(s0.lam);
            Real mx = fabs(b.x - s0.x) / fabs(s0.x);
            Real mf = fabs(wrap_offset(m, b.phi1 - s0.phi1));
            out.backward_mismatch = to_d(std::max({ml, mx, mf}));
            ok = ok && out.backward_mismatch < 1e-6;
        }
        out.backward_ok = ok;
    }

    // spread over free starts
    double diam = 0;
    for (double frac : {0.1, 0.9}) {
        int sw = 0;
        Chain c2 = build_chain(m, w, lamN, shell, B, L, F, lamN + shell * Real(frac), tol, sw);
        Real g1 = m.eps * mp::exp(-c.L(0)), g2 = m.eps * mp::exp(-c2.L(0));
        BoxState<Real> t;
        t.lam = c2.L(0);
        t.x = c2.X(0);
        t.branch = w[0];
        Real p2a = phi2_of(m, s0), p2b = phi2_of(m, t);
        diam = std::max({diam, to_d(mp::abs(g1 - g2)), to_d(mp::abs(c.F(0) - c2.F(0))), to_d(mp::abs(p2a - p2b))});
    }
    out.box_diameter = diam;
    return out;
}

bool itinerary_verified(const WordRealization& r) {
    return r.forward_ok && r.backward_ok && r.box_diameter < 1e-9;
}

// ---------------------------------------------------------------- cover

namespace {

struct Piece {
    double lo, hi;     // current depth interval
    double plo, phi;   // interval of the previous depth it came from
    double ulo = 0, uhi = 0;   // lo, hi before reduction into the shell
};

// Affine step of the depth recursion on an interval, split at the shell seam.
std::vector<Piece> step_interval(const DeepModel<double>& m, double lamN, double shell, double c, double pad,
                                 const Piece& in) {
    double A = (c - m.xw1 * in.hi - pad) / m.xw2;
    double B = (c - m.xw1 * in.lo + pad) / m.xw2;
    double k = std::floor((A - lamN) / shell);
    double shift = k * shell;
    A -= shift;
    B -= shift;
    std::vector<Piece> out;
    double lamN1 = lamN + shell;
    if (B <= lamN1) {
        out.push_back({A, B, in.lo, in.hi, A + shift, B + shift});
    } else {
        out.push_back({A, lamN1, in.lo, in.hi, A + shift, lamN1 + shift});
        double top = std::min(B - shell, lamN1);
        out.push_back({lamN, top, in.lo, in.hi, lamN + shell + shift, top + shell + shift});
    }
    return out;
}

void kappa_range(const DeepModel<double>& m, int branch, double ylo, double yhi, double& xlo, double& xhi) {
    double a = kappa_offset_inverse(m.shape, branch, ylo, 1e-15);
    double b = kappa_offset_inverse(m.shape, branch, yhi, 1e-15);
    xlo = std::min(a, b);
    xhi = std::max(a, b);
    double pad = 1e-9 * std::max(std::fabs(xlo), std::fabs(xhi));
    xlo -= pad;
    xhi += pad;
}

// Range of (eps e^{-l_next} - eps e^{-delta l_prev}) / gamma over two intervals.
void y_range(const DeepModel<double>& m, double nlo, double nhi, double plo, double phi, double& ylo, double& yhi) {
    ylo = (m.eps * std::exp(-nhi) - m.eps * std::exp(-m.delta * plo)) / m.gamma;
    yhi = (m.eps * std::exp(-nlo) - m.eps * std::exp(-m.delta * phi)) / m.gamma;
}

} // namespace

LambdaCover lambda_cover(int N, double gamma, int depth, const ModelParams& p) {
    if (depth < 0) throw Error(ErrorKind::Precondition, "depth must be >= 0");
    if (depth > 12) throw Error(ErrorKind::Precondition, "depth above 12 exhausts the box budget");
    if (!(gamma > 0)) throw Error(ErrorKind::Precondition, "lambda_cover needs gamma > 0");
    auto slab = out_slab(N, 1, p);
    auto m = double_model(p, gamma);
    const double lamN = slab.lam_N, shell = slab.lam_N1 - slab.lam_N;
    const double bN = p.eps * std::exp(-lamN), bN1 = p.eps * std::exp(-slab.lam_N1);

    // bound on |x| over H: |kappa^{-1}(y)| with |y| <= b_N / gamma
    double X1 = 0;
    for (int br = 1; br <= 2; ++br)
        for (double y : {bN / gamma, -bN / gamma}) X1 = std::max(X1, std::fabs(kappa_offset_inverse(m.shape, br, y, 1e-15)));
    X1 *= 1.01;
    const double lam_pad = 1e-12 * slab.lam_N1;

    LambdaCover cov;
    cov.N = N;
    cov.gamma = gamma;
    for (int d = 0; d <= depth; ++d) {
        std::vector<CoverBox> boxes;
        if (d == 0) {
            for (int v0 = 1; v0 <= 2; ++v0) {
                CoverBox b;
                b.v0 = v0;
                b.v1 = 0;
                b.lam_lo = lamN;
                b.lam_hi = lamN + shell;
                b.x_lo = -p.eps_out;
                b.x_hi = p.eps_out;
                b.phi1_branch = 0;
                b.f_lo = 0;
                b.f_hi = kTwoPi;
                b.content = (bN - bN1) * (b.x_hi - b.x_lo) * (b.f_hi - b.f_lo);
                boxes.push_back(b);
            }
        } else {
            for (const auto& u : all_words(d)) {     // u[0] = u_{-1}, ..., u[d-1] = u_{-d}
                for (int v0 = 1; v0 <= 2; ++v0) {
                    auto sym = [&](long k) { return k >= 0 ? v0 : u[size_t(-k - 1)]; };
                    // depths l_{-d+1}, ..., l_0 (l_{-d} and l_{-d+1} are free)
                    std::vector<Piece> pieces{{lamN, lamN + shell, lamN, lamN + shell}};
                    for (long k = -d + 1; k <= -1; ++k) {
                        double c = m.theta_out[sym(k + 1)] - m.theta_in[sym(k - 1)];
                        std::vector<Piece> next;
                        for (const auto& pc : pieces) {
                            auto sp = step_interval(m, lamN, shell, c, 2 * X1, pc);
                            next.insert(next.end(), sp.begin(), sp.end());
                        }
                        pieces.swap(next);
                    }
                    const int ub = u[0];
                    for (int v1 = 1; v1 <= 2; ++v1) {
                        for (const auto& pc : pieces) {
                            // phi1 offset x_{-1} from (l_0, l_{-1})
                            double ylo, yhi, flo, fhi;
                            y_range(m, pc.lo, pc.hi, pc.plo, pc.phi, ylo, yhi);
                            kappa_range(m, ub, ylo, yhi, flo, fhi);
                            double c0 = m.theta_out[v1] - m.theta_in[ub];
                            double cmid = c0 - 0.5 * (flo + fhi);
                            double pad = 0.5 * (fhi - flo) + X1;
                            auto l1 = step_interval(m, lamN, shell, cmid, pad, {pc.lo, pc.hi, pc.lo, pc.hi});
                            for (const auto& q : l1) {
                                // l_0 range feeding this l_1 piece, from the unwrapped affine relation
                                double a0 = (cmid - m.xw2 * q.uhi - pad) / m.xw1;
                                double b0 = (cmid - m.xw2 * q.ulo + pad) / m.xw1;
                                double lo0 = std::max(pc.lo, a0) - lam_pad, hi0 = std::min(pc.hi, b0) + lam_pad;
                                if (lo0 > hi0) continue;
                                CoverBox b;
                                b.backward = u;
                                b.v0 = v0;
                                b.v1 = v1;
                                b.lam_lo = lo0;
                                b.lam_hi = hi0;
                                double sy0, sy1;
                                y_range(m, q.lo, q.hi, lo0, hi0, sy0, sy1);
                                kappa_range(m, v0, sy0, sy1, b.x_lo, b.x_hi);
                                double fy0, fy1;
                                y_range(m, lo0, hi0, pc.plo, pc.phi, fy0, fy1);
                                b.phi1_branch = ub;
                                kappa_range(m, ub, fy0, fy1, b.f_lo, b.f_hi);
                                b.content = (p.eps * std::exp(-b.lam_lo) - p.eps * std::exp(-b.lam_hi)) *
                                            (b.x_hi - b.x_lo) * (b.f_hi - b.f_lo);
                                boxes.push_back(b);
                            }
                        }
                    }
                }
            }
        }
        double total = 0;
        for (const auto& b : boxes) total += b.content;
        cov.content.push_back(total);
        cov.levels.push_back(std::move(boxes));
    }
    cov.decreasing = true;
    for (size_t k = 1; k < cov.content.size(); ++k)
        if (!(cov.content[k] < cov.content[k - 1])) cov.decreasing = false;
    return cov;
}

bool cover_contains(const LambdaCover& cover, int depth, const WordRealization& r) {
    if (depth < 0 || size_t(depth) >= cover.levels.size()) throw Error(ErrorKind::Precondition, "depth not in cover");
    const int v0 = r.word.empty() ? 0 : r.word[0];
    for (const auto& b : cover.levels[size_t(depth)]) {
        if (b.v0 != v0) continue;
        if (r.lam < b.lam_lo || r.lam > b.lam_hi) continue;
        if (r.x < b.x_lo || r.x > b.x_hi) continue;
        if (b.phi1_branch != 0) {
            if (b.phi1_branch != r.phi1_branch) continue;
            if (r.phi1_offset < b.f_lo || r.phi1_offset > b.f_hi) continue;
        }
        return true;
    }
    return false;
}

nlohmann::json to_json(const ConleyMoserReport& r) {
    nlohmann::json j;
    j["n"] = r.N;
    j["gamma"] = r.gamma;
    j["width_S"] = r.width_S;
    j["nu_h"] = r.nu_h;
    j["nu_v"] = r.nu_v;
    j["K"] = r.K;
    j["pass"] = r.pass;
    j["pairs"] = nlohmann::json::array();
    for (const auto& p : r.pairs) {
        j["pairs"].push_back({{"i", p.i}, {"j", p.j}, {"slab_ok", p.slab_ok}, {"empty", p.empty},
                              {"full", p.full}, {"interior", p.interior}, {"boundary_map", p.boundary_map},
                              {"vertical_full", p.vertical_full}, {"nu_h", p.nu_h}, {"nu_v", p.nu_v},
                              {"K", p.K}, {"width_h", p.width_h}, {"width_v", p.width_v},
                              {"boundary_residual", p.boundary_residual}, {"note", p.note}});
    }
    return j;
}

nlohmann::json to_json(const WordRealization& r) {
    nlohmann::json j;
    j["word"] = word_string(r.word);
    j["n"] = r.N;
    j["gamma"] = r.gamma;
    j["digits"] = r.digits;
    j["point"] = {{"section", to_string(r.point.section)}, {"r1", r.point.radial}, {"phi1", r.point.phi1},
                  {"phi2", r.point.phi2}};
    j["lam"] = r.lam;
    j["gap"] = r.gap;
    j["x"] = r.x;
    j["forward_symbols"] = r.forward_symbols;
    j["backward_symbols"] = r.backward_symbols;
    j["flight_times"] = r.flight_times;
    j["forward_ok"] = r.forward_ok;
    j["backward_ok"] = r.backward_ok;
    j["backward_mismatch"] = r.backward_mismatch;
    j["box_diameter"] = r.box_diameter;
    j["periodic_residual"] = r.periodic_residual;
    j["verified"] = itinerary_verified(r);
    if (!r.failure.empty()) j["failure"] = r.failure;
    return j;
}

nlohmann::json to_json(const WindingReport& r) {
    nlohmann::json j;
    for (int f = 0; f < 4; ++f)
        j[to_string(Face(f))] = {{"phi1_span", r.phi1_span[size_t(f)]}, {"phi2_span", r.phi2_span[size_t(f)]}};
    j["ok"] = r.ok;
    return j;
}

void write_cover_csv(std::ostream& os, const LambdaCover& c) {
    os << "depth,backward,v0,v1,lam_lo,lam_hi,x_lo,x_hi,phi1_branch,f_lo,f_hi,content\n";
    os.precision(17);
    for (size_t d = 0; d < c.levels.size(); ++d)
        for (const auto& b : c.levels[d])
            os << d << ',' << word_string(b.backward) << ',' << b.v0 << ',' << b.v1 << ',' << b.lam_lo << ','
               << b.lam_hi << ',' << b.x_lo << ',' << b.x_hi << ',' << b.phi1_branch << ',' << b.f_lo << ','
               << b.f_hi << ',' << b.content << '\n';
}

std::vector<Word> all_words(int L) {
    if (L < 0 || L > 24) throw Error(ErrorKind::Precondition, "word length out of range");
    std::vector<Word> out;
    for (unsigned long code = 0; code < (1ul << L); ++code) {
        Word w(static_cast<size_t>(L));
        for (int k = 0; k < L; ++k) w[size_t(k)] = ((code >> (L - 1 - k)) & 1u) ? 2 : 1;
        out.push_back(w);
    }
    return out;
}

Word parse_word(const std::string& s) {
    Word w;
    for (char ch : s) {
        if (ch == '1') w.push_back(1);
        else if (ch == '2') w.push_back(2);
        else if (ch == ',' || ch == ' ' || ch == '-') continue;
        else throw Error(ErrorKind::Config, "word may only contain the symbols 1 and 2");
    }
    if (w.empty()) throw Error(ErrorKind::Config, "empty word");
    return w;
}

std::string word_string(const Word& w) {
    std::string s;
    for (int c : w) s += char('0' + c);
    return s;
}

} // namespace hetnet
