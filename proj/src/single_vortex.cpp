#include "hvortex/single_vortex.hpp"

#include "hvortex/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const cx kI{0.0, 1.0};

Trace shifted(const Trace& a, int k) {
    if (a.empty()) return {};
    Trace out;
    out.reset(a.lo() + k, a.data(), a.loss());
    return out;
}

// conj(bgamma)/(2 pi i) + i conj(bomega): the factor carrying the pressure
// row's dependence on the kinematic row
cx pressure_coupling(const VortexParams& p) {
    return std::conj(p.bgamma()) / (2.0 * pi * kI) + kI * std::conj(p.bomega());
}

int auto_cap(const MFoldState& s) {
    int w = 1;
    for (const Trace* t : {&s.mu, &s.nu}) {
        if (t->empty()) continue;
        w = std::max({w, std::abs(t->lo()), std::abs(t->hi())});
    }
    return 2 * (w + s.m) + 64;
}

int mode_count(const MFoldState& s) {
    int n = 0;
    if (!s.mu.empty()) n = std::max(n, (std::abs(s.mu.lo()) + 1 + s.m - 1) / s.m);
    if (!s.nu.empty()) n = std::max(n, (std::abs(s.nu.lo()) + s.m - 1) / s.m);
    return n;
}

}  // namespace

double VortexParams::q0() const {
    const cx j = bgamma() / (2.0 * pi) - bomega();
    return 0.5 * std::norm(j) - 0.5 * std::norm(bomega());
}

MFoldState trivial_state(int m, const VortexParams& params) {
    MFoldState s;
    s.m = m;
    s.q = params.q0();
    return s;
}

cx mu_mode(const MFoldState& s, int n) { return s.mu.coeff(1 - s.m * n); }
cx nu_mode(const MFoldState& s, int n) { return s.nu.coeff(-s.m * n); }

void set_mu_mode(MFoldState& s, int n, cx v) {
    s.mu.set_coeff(1 - s.m * n, v);
    s.mu.set_coeff(s.m * n - 1, std::conj(v));
}

void set_nu_mode(MFoldState& s, int n, cx v) {
    s.nu.set_coeff(-s.m * n, v);
    s.nu.set_coeff(s.m * n, std::conj(v));
}

double lattice_defect(const MFoldState& s) {
    double d = 0.0;
    for (int j = s.mu.lo(); j <= s.mu.hi(); ++j) {
        // mu lives on indices 1 - mn and mn - 1, n >= 1
        const bool on = ((1 - j) % s.m == 0 && j <= 1 - s.m) || ((j + 1) % s.m == 0 && j >= s.m - 1);
        if (!on) d = std::max(d, std::abs(s.mu.coeff(j)));
    }
    for (int j = s.nu.lo(); j <= s.nu.hi(); ++j) {
        bool on = (j % s.m == 0) && j != 0;
        if (!on) d = std::max(d, std::abs(s.nu.coeff(j)));
    }
    return d;
}

double even_defect(const MFoldState& s) {
    double d = std::max(realness_defect(s.mu), realness_defect(s.nu));
    for (int n = 1; n <= mode_count(s); ++n) {
        d = std::max(d, std::abs(mu_mode(s, n).imag()));
        d = std::max(d, std::abs(nu_mode(s, n).real()));
    }
    return d;
}

double conformal_margin(const MFoldState& s) {
    Trace fp = Trace::constant(1.0) + dtau(cauchy(s.mu));
    const int w = fp.hi() - fp.lo() + 1;
    const int K = next_pow2(std::max(4 * w, 1024));
    double mn = kInf;
    for (const cx& v : fft_samples(fp, K)) mn = std::min(mn, std::abs(v));
    return mn;
}

cx boundary_map(const MFoldState& s, cx zeta) { return zeta + eval(cauchy(s.mu), zeta); }

cx boundary_map_deriv(const MFoldState& s, cx zeta) {
    return 1.0 + eval(dtau(cauchy(s.mu)), zeta);
}

cx potential_deriv(const MFoldState& s, const VortexParams& p, cx zeta) {
    return p.bgamma() / (2.0 * pi * kI * zeta) + eval(dtau(cauchy(s.nu)), zeta);
}

double BoundaryResidual::max_norm() const {
    return std::max(max_abs(kinematic), max_abs(bernoulli));
}

ResidualWorkspace make_workspace(const MFoldState& s, const VortexParams& p, int cap,
                                 bool with_jets) {
    ResidualWorkspace ws;
    ws.cap = cap > 0 ? cap : auto_cap(s);

    const Trace cmu = cauchy(s.mu);
    ws.f = Trace::monomial(1, 1.0) + cmu;
    ws.fp = Trace::constant(1.0) + dtau(cmu);

    const int w = ws.fp.hi() - ws.fp.lo() + 1;
    const int K = next_pow2(std::max({4 * (ws.cap + 2), 2 * w, 512}));
    const auto fpv = fft_samples(ws.fp, K);
    ws.margin = kInf;
    for (const cx& v : fpv) ws.margin = std::min(ws.margin, std::abs(v));
    if (!(ws.margin > 1e-9))
        throw std::domain_error("boundary map loses local univalence (|f'| ~ 0 on the circle)");

    std::vector<cx> inv(fpv.size()), invsq(fpv.size());
    for (size_t i = 0; i < fpv.size(); ++i) {
        const double d = std::norm(fpv[i]);
        inv[i] = 1.0 / d;
        invsq[i] = 1.0 / (d * d);
    }
    ws.inv2 = trace_from_fft(std::move(inv), -ws.cap, ws.cap);
    if (with_jets) ws.inv2sq = trace_from_fft(std::move(invsq), -ws.cap, ws.cap);

    ws.fpcf = product(ws.fp, conjt(ws.f), ws.cap);
    ws.vel = Trace::monomial(-1, p.bgamma() / (2.0 * pi * kI)) + dtau(cauchy(s.nu)) +
             kI * p.bomega() * ws.fpcf;
    ws.vel2 = product(ws.vel, conjt(ws.vel), ws.cap);
    ws.rad2 = product(ws.f, conjt(ws.f), ws.cap);
    return ws;
}

BoundaryResidual residual(const ResidualWorkspace& ws, const MFoldState& s,
                          const VortexParams& p) {
    BoundaryResidual r;
    r.kinematic = re(shifted(ws.vel, 1));
    const double om2 = std::norm(p.bomega());
    r.bernoulli = cx(0.5) * product(ws.vel2, ws.inv2, ws.cap) + cx(-0.5 * om2) * ws.rad2;
    r.bernoulli.add_coeff(0, -s.q);
    return r;
}

BoundaryResidual residual(const MFoldState& s, const VortexParams& p, int cap) {
    const ResidualWorkspace ws = make_workspace(s, p, cap, false);
    return residual(ws, s, p);
}

BoundaryResidual directional_derivative(const ResidualWorkspace& ws, const MFoldState& s,
                                        const VortexParams& p, const StateDirection& dir) {
    (void)s;
    const int cap = ws.cap;
    const cx bo = p.bomega();
    const double om = bo.real();
    const double om2 = std::norm(bo);

    const Trace dcmu = cauchy(dir.dmu);
    const Trace& df = dcmu;
    const Trace dfp = dtau(dcmu);

    Trace dvel = dtau(cauchy(dir.dnu)) +
                 kI * bo * (product(dfp, conjt(ws.f), cap) + product(ws.fp, conjt(df), cap));
    if (dir.domega != 0.0) dvel = dvel + cx(0.0, dir.domega) * ws.fpcf;

    BoundaryResidual out;
    out.kinematic = re(shifted(dvel, 1));

    const Trace dd = cx(2.0) * re(product(dfp, conjt(ws.fp), cap));
    const Trace dinv2 = -product(ws.inv2sq, dd, cap);
    const Trace dvel2 = cx(2.0) * re(product(dvel, conjt(ws.vel), cap));
    const Trace drad2 = cx(2.0) * re(product(df, conjt(ws.f), cap));

    out.bernoulli = cx(0.5) * (product(dvel2, ws.inv2, cap) + product(ws.vel2, dinv2, cap)) +
                    cx(-om * dir.domega) * ws.rad2 + cx(-0.5 * om2) * drad2;
    out.bernoulli.add_coeff(0, -dir.dq);
    return out;
}

cx dispersion(int m, int n, const VortexParams& p) {
    const cx cbo = std::conj(p.bomega());
    const double a = p.frame.Omega - p.gamma / (2.0 * pi);
    return (1.0 - static_cast<double>(m) * n) * a * a + (p.gamma / pi) * cbo - cbo * cbo;
}

cx dispersion_domega(int m, int n, const VortexParams& p) {
    const cx cbo = std::conj(p.bomega());
    const double a = p.frame.Omega - p.gamma / (2.0 * pi);
    return 2.0 * (1.0 - static_cast<double>(m) * n) * a + p.gamma / pi - 2.0 * cbo;
}

double rotating_root(int m, int sign, double gamma, int n) {
    return gamma / (2.0 * pi) * (1.0 + sign / std::sqrt(static_cast<double>(m) * n));
}

StateDirection kernel_direction(int m, int n, const VortexParams& p, int which) {
    const cx bo = p.bomega();
    const double mn = static_cast<double>(m) * n;
    const cx bon = ((mn - 1.0) * bo + std::conj(bo)) / mn;
    const cx muh = which ? kI : cx(1.0);
    const cx nuh = -kI * bon * muh;
    StateDirection d;
    d.dmu.set_coeff(1 - m * n, muh);
    d.dmu.set_coeff(m * n - 1, std::conj(muh));
    d.dnu.set_coeff(-m * n, nuh);
    d.dnu.set_coeff(m * n, std::conj(nuh));
    return d;
}

namespace {

struct ModeBlock {
    cx a11, a12, a21, a22;  // (mu, nu) -> (kinematic, pressure) coefficients
};

ModeBlock mode_block(int m, int n, const VortexParams& p) {
    const cx bo = p.bomega();
    const double mn = static_cast<double>(m) * n;
    ModeBlock b;
    b.a11 = 0.5 * kI * ((mn - 1.0) * bo + std::conj(bo));
    b.a12 = 0.5 * mn;
    const cx kp = pressure_coupling(p);
    b.a21 = 0.5 * dispersion(m, n, p) - kp * b.a11;
    b.a22 = -kp * b.a12;
    return b;
}

}  // namespace

Eigen::MatrixXd linearized_matrix(int m, int nmax, const VortexParams& p) {
    const int d = 4 * nmax + 1;
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(d, d);
    auto put = [&M](int row, int col, cx w) {
        // complex-linear action w * z in real coordinates
        M(row, col) = w.real();
        M(row, col + 1) = -w.imag();
        M(row + 1, col) = w.imag();
        M(row + 1, col + 1) = w.real();
    };
    for (int n = 1; n <= nmax; ++n) {
        const ModeBlock b = mode_block(m, n, p);
        const int cm = 2 * (n - 1), cn = 2 * nmax + 2 * (n - 1);
        const int rk = 2 * (n - 1), rb = 2 * nmax + 2 * (n - 1);
        put(rk, cm, b.a11);
        put(rk, cn, b.a12);
        put(rb, cm, b.a21);
        put(rb, cn, b.a22);
    }
    M(4 * nmax, 4 * nmax) = -1.0;  // Bernoulli mean picks up -dq
    return M;
}

Eigen::MatrixXd linearized_matrix_even(int m, int nmax, const VortexParams& p) {
    const int d = 2 * nmax + 1;
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(d, d);
    for (int n = 1; n <= nmax; ++n) {
        const ModeBlock b = mode_block(m, n, p);
        const int cm = n - 1, cn = nmax + n - 1;
        const int rk = n - 1, rb = nmax + n - 1;
        M(rk, cm) = b.a11.imag();        // Im of a11 * (real mu)
        M(rk, cn) = b.a12.real();        // Im of a12 * (i beta)
        M(rb, cm) = b.a21.real();
        M(rb, cn) = -b.a22.imag();       // Re of a22 * (i beta)
    }
    M(2 * nmax, 2 * nmax) = -1.0;
    return M;
}

double kinematic_row_sensitivity(int m, int sign, double gamma) {
    VortexParams p{gamma, Frame{rotating_root(m, sign, gamma), kInf}};
    // Omega-derivative of the kinematic row applied to the frozen null
    // direction (mu-hat = 1): i m in the doubled-coefficient convention
    const cx a_om = kI * static_cast<double>(m);
    return (pressure_coupling(p) * a_om).real();
}

double transversality_pairing(int m, int sign, double gamma) {
    VortexParams p{gamma, Frame{rotating_root(m, sign, gamma), kInf}};
    return kinematic_row_sensitivity(m, sign, gamma) + dispersion_domega(m, 1, p).real();
}

double direct_pairing(int m, int sign, double gamma) {
    VortexParams p{gamma, Frame{rotating_root(m, sign, gamma), kInf}};
    const cx kp = pressure_coupling(p);
    const cx a_om = kI * static_cast<double>(m);
    const cx b_om = dispersion_domega(m, 1, p) - kp * a_om;
    return (kp * a_om + b_om).real();
}

BranchSeries branch_series(int m, int sign, double eps, double gamma) {
    const double r = std::sqrt(static_cast<double>(m));
    const double s = sign;
    const double g = gamma / (2.0 * pi);
    const double u = r + s;  // sqrt(m) +/- 1
    BranchSeries out;
    out.mu1 = -eps;
    out.mu2 = eps * eps * u * u;
    out.mu3 = -1.5 * eps * eps * eps * u * u * u * u;
    out.beta1 = g * (eps * u / r + s * eps * eps * eps * u * u * u * u / (2.0 * r));
    out.beta2 = -g * eps * eps * u * u * u / r;
    out.beta3 = g * 1.5 * eps * eps * eps * u * u * u * u * u / r;
    out.omega = g * (u / r + s * eps * eps * u * u * u * (r + 3.0 * s) / (2.0 * r));
    out.q = g * g * (-(r + 2.0 * s) / (2.0 * r) -
                     s * eps * eps * u * u * (m + 3.0 * s * r + 3.0) / (2.0 * r));
    return out;
}

namespace {

// packings shared by the two Newton drivers

MFoldState even_state_from(const Eigen::VectorXd& x, int m, int nmax, double eps) {
    MFoldState s;
    s.m = m;
    set_mu_mode(s, 1, -eps);
    for (int n = 2; n <= nmax; ++n) set_mu_mode(s, n, x[n - 2]);
    for (int n = 1; n <= nmax; ++n) set_nu_mode(s, n, cx(0.0, x[nmax - 1 + n - 1]));
    s.q = x[2 * nmax - 1];
    return s;
}

Eigen::VectorXd pack_even_residual(const BoundaryResidual& r, int m, int nmax) {
    Eigen::VectorXd v(2 * nmax + 1);
    for (int n = 1; n <= nmax; ++n) {
        v[n - 1] = r.kinematic.coeff(-m * n).imag();
        v[nmax + n - 1] = r.bernoulli.coeff(-m * n).real();
    }
    v[2 * nmax] = r.bernoulli.coeff(0).real();
    return v;
}

StateDirection even_unit_direction(int j, int m, int nmax) {
    StateDirection d;
    if (j < nmax - 1) {
        const int n = j + 2;
        d.dmu.set_coeff(1 - m * n, 1.0);
        d.dmu.set_coeff(m * n - 1, 1.0);
    } else if (j < 2 * nmax - 1) {
        const int n = j - (nmax - 1) + 1;
        d.dnu.set_coeff(-m * n, kI);
        d.dnu.set_coeff(m * n, -kI);
    } else if (j == 2 * nmax - 1) {
        d.dq = 1.0;
    } else {
        d.domega = 1.0;
    }
    return d;
}

}  // namespace

BranchPoint continue_branch(int m, int sign, double eps, double gamma,
                            const BranchOptions& opt) {
    const int nmax = opt.nmax > 0 ? opt.nmax : 32 * m;
    if (nmax < 4) throw std::invalid_argument("continue_branch: nmax too small");
    const int cap_it = opt.cap > 0 ? opt.cap : m * (nmax + 2);

    const BranchSeries ser = branch_series(m, sign, eps, gamma);
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(2 * nmax + 1);
    x0[0] = ser.mu2;
    x0[1] = ser.mu3;
    x0[nmax - 1] = ser.beta1;
    x0[nmax] = ser.beta2;
    x0[nmax + 1] = ser.beta3;
    x0[2 * nmax - 1] = ser.q;
    x0[2 * nmax] = ser.omega;

    auto params_at = [gamma](double om) { return VortexParams{gamma, Frame{om, kInf}}; };

    auto residual_fn = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        const MFoldState s = even_state_from(x, m, nmax, eps);
        const VortexParams p = params_at(x[2 * nmax]);
        try {
            return pack_even_residual(residual(s, p, cap_it), m, nmax);
        } catch (const std::domain_error&) {
            return Eigen::VectorXd::Constant(2 * nmax + 1, kInf);
        }
    };
    auto jacobian_fn = [&](const Eigen::VectorXd& x) -> Eigen::MatrixXd {
        const MFoldState s = even_state_from(x, m, nmax, eps);
        const VortexParams p = params_at(x[2 * nmax]);
        const ResidualWorkspace ws = make_workspace(s, p, cap_it, true);
        Eigen::MatrixXd J(2 * nmax + 1, 2 * nmax + 1);
        for (int j = 0; j <= 2 * nmax; ++j) {
            const StateDirection d = even_unit_direction(j, m, nmax);
            J.col(j) = pack_even_residual(directional_derivative(ws, s, p, d), m, nmax);
        }
        return J;
    };

    const NewtonResult nr =
        newton_solve(x0, residual_fn, jacobian_fn, NewtonOptions{opt.tol, opt.max_iter, 1e-6});

    BranchPoint bp;
    bp.m = m;
    bp.sign = sign;
    bp.eps = eps;
    bp.gamma = gamma;
    bp.omega = nr.x[2 * nmax];
    bp.state = even_state_from(nr.x, m, nmax, eps);
    bp.iterations = nr.iterations;
    bp.converged = nr.converged;

    // report the residual on a widened window so truncation shows up
    const VortexParams pf = params_at(bp.omega);
    const int cap_report = 2 * m * (nmax + 2) + 64;
    bp.residual_norm = residual(bp.state, pf, cap_report).max_norm();

    double full = 0.0, tail = 0.0;
    const int n_tail = nmax - nmax / 4 + 1;
    for (int n = 1; n <= nmax; ++n) {
        const double a = std::norm(mu_mode(bp.state, n)) + std::norm(nu_mode(bp.state, n));
        full += a;
        if (n >= n_tail) tail += a;
    }
    bp.tail_norm = full > 0.0 ? std::sqrt(tail / full) : 0.0;
    bp.tail_ok = bp.tail_norm <= opt.tail_rel;
    return bp;
}

void to_json(nlohmann::json& j, const BranchPoint& b) {
    nlohmann::json mu = nlohmann::json::array();
    nlohmann::json nu = nlohmann::json::array();
    const int nmax = mode_count(b.state);
    for (int n = 1; n <= nmax; ++n) {
        const cx mc = mu_mode(b.state, n), nc = nu_mode(b.state, n);
        mu.push_back({n, mc.real(), mc.imag()});
        nu.push_back({n, nc.real(), nc.imag()});
    }
    j = nlohmann::json{{"m", b.m},
                       {"sign", b.sign},
                       {"eps", b.eps},
                       {"gamma", b.gamma},
                       {"Omega", b.omega},
                       {"q", b.state.q},
                       {"mu_coeffs", std::move(mu)},
                       {"nu_coeffs", std::move(nu)},
                       {"residual", b.residual_norm},
                       {"tail_norm", b.tail_norm},
                       {"iterations", b.iterations},
                       {"converged", b.converged}};
}

PitchforkResult pitchfork_direction(int m, int sign, double gamma, double probe_eps,
                                    const BranchOptions& opt) {
    BranchOptions po = opt;
    if (po.nmax == 0) po.nmax = 32;  // probe amplitudes decay fast; a short lattice suffices
    const BranchPoint bp = continue_branch(m, sign, probe_eps, gamma, po);
    if (!bp.converged)
        throw std::runtime_error("pitchfork_direction: probe continuation did not converge");
    PitchforkResult out;
    out.omega0 = rotating_root(m, sign, gamma);
    out.delta_omega = bp.omega - out.omega0;
    out.probe_eps = probe_eps;
    const double thresh = 10.0 * po.tol;
    if (out.delta_omega > thresh)
        out.type = PitchforkType::supercritical;
    else if (out.delta_omega < -thresh)
        out.type = PitchforkType::subcritical;
    else
        out.type = PitchforkType::degenerate;
    return out;
}

namespace {

MFoldState full_state_from(const Eigen::VectorXd& x, int m, int nmax) {
    MFoldState s;
    s.m = m;
    for (int n = 1; n <= nmax; ++n) {
        set_mu_mode(s, n, cx(x[2 * (n - 1)], x[2 * (n - 1) + 1]));
        set_nu_mode(s, n, cx(x[2 * nmax + 2 * (n - 1)], x[2 * nmax + 2 * (n - 1) + 1]));
    }
    s.q = x[4 * nmax];
    return s;
}

Eigen::VectorXd pack_full_residual(const BoundaryResidual& r, int m, int nmax) {
    Eigen::VectorXd v(4 * nmax + 1);
    for (int n = 1; n <= nmax; ++n) {
        const cx k = r.kinematic.coeff(-m * n), b = r.bernoulli.coeff(-m * n);
        v[2 * (n - 1)] = k.real();
        v[2 * (n - 1) + 1] = k.imag();
        v[2 * nmax + 2 * (n - 1)] = b.real();
        v[2 * nmax + 2 * (n - 1) + 1] = b.imag();
    }
    v[4 * nmax] = r.bernoulli.coeff(0).real();
    return v;
}

StateDirection full_unit_direction(int j, int m, int nmax) {
    StateDirection d;
    if (j < 4 * nmax) {
        const bool nu_side = j >= 2 * nmax;
        const int k = nu_side ? j - 2 * nmax : j;
        const int n = k / 2 + 1;
        const cx w = (k % 2 == 0) ? cx(1.0) : kI;
        if (nu_side) {
            d.dnu.set_coeff(-m * n, w);
            d.dnu.set_coeff(m * n, std::conj(w));
        } else {
            d.dmu.set_coeff(1 - m * n, w);
            d.dmu.set_coeff(m * n - 1, std::conj(w));
        }
    } else {
        d.dq = 1.0;
    }
    return d;
}

}  // namespace

RigidityReport rigidity_check(const MFoldState& start, const VortexParams& p,
                              const RigidityOptions& opt) {
    const int m = start.m;
    const int nmax = opt.nmax;
    const int cap_it = opt.cap > 0 ? opt.cap : m * (nmax + 2);

    RigidityReport rep;
    rep.min_dispersion = kInf;
    for (int n = 1; n <= nmax; ++n) {
        const double a = std::abs(dispersion(m, n, p));
        if (a < rep.min_dispersion) {
            rep.min_dispersion = a;
            rep.argmin_n = n;
        }
    }

    Eigen::VectorXd x0(4 * nmax + 1);
    for (int n = 1; n <= nmax; ++n) {
        const cx mc = mu_mode(start, n), nc = nu_mode(start, n);
        x0[2 * (n - 1)] = mc.real();
        x0[2 * (n - 1) + 1] = mc.imag();
        x0[2 * nmax + 2 * (n - 1)] = nc.real();
        x0[2 * nmax + 2 * (n - 1) + 1] = nc.imag();
    }
    x0[4 * nmax] = start.q;

    auto residual_fn = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        const MFoldState s = full_state_from(x, m, nmax);
        try {
            return pack_full_residual(residual(s, p, cap_it), m, nmax);
        } catch (const std::domain_error&) {
            return Eigen::VectorXd::Constant(4 * nmax + 1, kInf);
        }
    };
    auto jacobian_fn = [&](const Eigen::VectorXd& x) -> Eigen::MatrixXd {
        const MFoldState s = full_state_from(x, m, nmax);
        const ResidualWorkspace ws = make_workspace(s, p, cap_it, true);
        Eigen::MatrixXd J(4 * nmax + 1, 4 * nmax + 1);
        for (int j = 0; j <= 4 * nmax; ++j) {
            const StateDirection d = full_unit_direction(j, m, nmax);
            J.col(j) = pack_full_residual(directional_derivative(ws, s, p, d), m, nmax);
        }
        return J;
    };

    const NewtonResult nr =
        newton_solve(x0, residual_fn, jacobian_fn, NewtonOptions{opt.tol, opt.max_iter, 1e-6});
    rep.newton_converged = nr.converged;
    rep.iterations = nr.iterations;
    rep.state = full_state_from(nr.x, m, nmax);

    double acc = std::norm(rep.state.q - p.q0());
    for (int n = 1; n <= nmax; ++n)
        acc += std::norm(mu_mode(rep.state, n)) + std::norm(nu_mode(rep.state, n));
    rep.final_state_norm = std::sqrt(acc);
    return rep;
}

HStateReference hstate_reference(int m, double eps, double gamma, int kmax) {
    const double md = m;
    const double g = gamma / (2.0 * pi);
    HStateReference h;
    h.f_series = {eps, -eps * eps * (md - 1.0) * (md - 1.0) / (4.0 * md),
                  eps * eps * eps * std::pow(md - 1.0, 4) / (16.0 * md * md)};
    h.w_series = {eps * (md - 1.0) / (md + 1.0),
                  -eps * eps * std::pow(md - 1.0, 3) / (4.0 * md * (md + 1.0)),
                  eps * eps * eps * std::pow(md - 1.0, 5) / (16.0 * md * md * (md + 1.0))};
    h.omega = g * ((md - 1.0) / (md + 1.0) + eps * eps * (md - 1.0) * (md - 1.0) / (4.0 * md * (md + 1.0)));
    h.q = g * g * (2.0 / ((md + 1.0) * (md + 1.0)) +
                   eps * eps * (md - 1.0) * (md - 1.0) / (2.0 * md * (md + 1.0)));
    const double c = eps * (md - 1.0) * (md - 1.0) / (4.0 * md);
    h.f_exact.resize(static_cast<size_t>(kmax));
    double pw = eps;
    for (int k = 0; k < kmax; ++k) {
        h.f_exact[static_cast<size_t>(k)] = pw;
        pw *= -c;
    }
    return h;
}

double critical_layer_radius2(CriticalLayerFamily fam, int m) {
    const double md = m;
    switch (fam) {
        case CriticalLayerFamily::branch_minus: {
            const double r = std::sqrt(md);
            return r / (r - 1.0);
        }
        case CriticalLayerFamily::hstate:
            return (md + 1.0) / (md - 1.0);
        case CriticalLayerFamily::vstate:
            return md / (md - 1.0);
    }
    throw std::logic_error("critical_layer_radius2: unknown family");
}

double angular_velocity(const MFoldState& s, const VortexParams& p, cx zeta) {
    const cx f = boundary_map(s, zeta);
    const cx fp = boundary_map_deriv(s, zeta);
    const cx wz = potential_deriv(s, p, zeta);
    const double af = std::abs(f);
    return p.frame.Omega * af + std::imag(f * wz / fp) / af;
}

std::optional<double> angular_zero_radius(const MFoldState& s, const VortexParams& p,
                                          double theta, double rmax) {
    const cx dir = std::polar(1.0, theta);
    const int steps = 512;
    double r_prev = 1.0 + 1e-9;
    double v_prev = angular_velocity(s, p, r_prev * dir);
    const double ratio = std::pow(rmax / r_prev, 1.0 / steps);
    for (int i = 1; i <= steps; ++i) {
        const double r = r_prev * ratio;
        const double v = angular_velocity(s, p, r * dir);
        if (v == 0.0) return r;
        if (std::signbit(v) != std::signbit(v_prev)) {
            double a = r_prev, b = r, va = v_prev;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (a + b);
                const double vm = angular_velocity(s, p, mid * dir);
                if (vm == 0.0) return mid;
                if (std::signbit(vm) == std::signbit(va)) {
                    a = mid;
                    va = vm;
                } else {
                    b = mid;
                }
            }
            return 0.5 * (a + b);
        }
        r_prev = r;
        v_prev = v;
    }
    return std::nullopt;
}

cx circulation(const MFoldState& s, const VortexParams& p, int nodes) {
    cx acc = 0.0;
    for (int k = 0; k < nodes; ++k) {
        const cx tau = std::polar(1.0, 2.0 * pi * k / nodes);
        acc += potential_deriv(s, p, tau) * kI * tau;
    }
    return acc * (2.0 * pi / nodes);
}

}  // namespace hv
