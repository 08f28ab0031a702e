#include "hvortex/point_vortex.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hv {

namespace {

const cx I{0.0, 1.0};

double min_separation(const std::vector<cx>& z) {
    double d = std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < z.size(); ++k)
        for (size_t j = k + 1; j < z.size(); ++j) d = std::min(d, std::abs(z[k] - z[j]));
    return d;
}

void require_distinct(const PointConfig& c) {
    for (int k = 0; k < c.count(); ++k)
        for (int j = k + 1; j < c.count(); ++j)
            if (c.z[k] == c.z[j]) throw std::invalid_argument("point_vortex: coincident centers");
}

// One split token expanded to the real coordinates it selects.
struct TokenCols {
    std::vector<int> cols;   // columns of the full Jacobian
    double scale = 1.0;      // chain-rule factor (kappa)
    bool is_kappa = false;
};

TokenCols token_columns(const std::string& tok, const PointConfig& c) {
    const int M = c.count();
    TokenCols tc;
    auto index_of = [&](const std::string& prefix) -> int {
        int idx = std::stoi(tok.substr(prefix.size()));
        if (idx < 1 || idx > M) throw std::invalid_argument("point_vortex: split index out of range in '" + tok + "'");
        return idx - 1;
    };
    if (tok.rfind("gamma", 0) == 0 && tok.size() > 5) {
        tc.cols = {2 * M + index_of("gamma")};
    } else if (tok == "Omega") {
        tc.cols = {3 * M};
    } else if (tok == "ImOmega") {
        tc.cols = {3 * M + 1};
    } else if (tok == "OmegaC") {
        tc.cols = {3 * M, 3 * M + 1};
    } else if (tok == "kappa") {
        if (c.bomega.imag() == 0.0) throw std::logic_error("point_vortex: kappa coordinate at kappa = infinity");
        double kappa = -0.5 / c.bomega.imag();
        tc.cols = {3 * M + 1};
        tc.scale = 0.5 / (kappa * kappa);  // d(Im bomega)/d kappa
        tc.is_kappa = true;
    } else if (tok.rfind("z", 0) == 0 && tok.size() > 1) {
        int k = index_of("z");
        tc.cols = {2 * k, 2 * k + 1};
    } else {
        throw std::invalid_argument("point_vortex: unknown split token '" + tok + "'");
    }
    return tc;
}

int split_width(const PointConfig& c) {
    int w = 0;
    for (const auto& tok : c.split) w += static_cast<int>(token_columns(tok, c).cols.size());
    return w;
}

// Move the split coordinates by dx (same ordering as split_jacobian columns).
PointConfig apply_delta(const PointConfig& c, const Eigen::VectorXd& dx) {
    PointConfig out = c;
    int i = 0;
    for (const auto& tok : c.split) {
        if (tok.rfind("gamma", 0) == 0 && tok.size() > 5) {
            out.gamma[std::stoi(tok.substr(5)) - 1] += dx(i++);
        } else if (tok == "Omega") {
            out.bomega += cx(dx(i++), 0.0);
        } else if (tok == "ImOmega") {
            out.bomega += cx(0.0, dx(i++));
        } else if (tok == "OmegaC") {
            out.bomega += cx(dx(i), dx(i + 1));
            i += 2;
        } else if (tok == "kappa") {
            double kappa = -0.5 / out.bomega.imag() + dx(i++);
            out.bomega = cx(out.bomega.real(), -0.5 / kappa);
        } else {  // zK
            int k = std::stoi(tok.substr(1)) - 1;
            out.z[k] += cx(dx(i), dx(i + 1));
            i += 2;
        }
    }
    return out;
}

Eigen::VectorXd stack_residual(const std::vector<cx>& r) {
    Eigen::VectorXd v(2 * r.size());
    for (size_t k = 0; k < r.size(); ++k) {
        v(2 * k) = r[k].real();
        v(2 * k + 1) = r[k].imag();
    }
    return v;
}

}  // namespace

double gamma_total(const PointConfig& c) {
    double s = 0.0;
    for (double g : c.gamma) s += g;
    return s;
}

cx impulse(const PointConfig& c) {
    cx s{};
    for (int k = 0; k < c.count(); ++k) s += c.gamma[k] * c.z[k];
    return s;
}

cx collapse_point(const PointConfig& c) {
    double g = gamma_total(c);
    if (g == 0.0) throw std::invalid_argument("collapse_point: zero total strength");
    return impulse(c) / g;
}

PointConfig shifted(const PointConfig& c) {
    PointConfig out = c;
    cx zc = collapse_point(c);
    for (auto& z : out.z) z -= zc;
    return out;
}

std::vector<cx> v_residual(const PointConfig& c) {
    require_distinct(c);
    const int M = c.count();
    std::vector<cx> r(M);
    for (int k = 0; k < M; ++k) {
        cx s{};
        for (int j = 0; j < M; ++j)
            if (j != k) s += c.gamma[j] / (2.0 * pi * I * (c.z[k] - c.z[j]));
        r[k] = s + I * c.bomega * std::conj(c.z[k]);
    }
    return r;
}

std::vector<cx> vtilde_residual(const PointConfig& c) {
    require_distinct(c);
    cx zc = collapse_point(c);
    const int M = c.count();
    std::vector<cx> r(M);
    for (int k = 0; k < M; ++k) {
        cx s{};
        for (int j = 0; j < M; ++j)
            if (j != k) s += c.gamma[j] / (2.0 * pi * I * (c.z[k] - c.z[j]));
        r[k] = s + I * c.bomega * std::conj(c.z[k] - zc);
    }
    return r;
}

Eigen::MatrixXd full_jacobian(const PointConfig& c) {
    require_distinct(c);
    const int M = c.count();
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * M, 3 * M + 2);
    // The map is not holomorphic (conj z_k appears), so each complex entry is
    // split into d/dz and d/d(conj z) parts: a real-coordinate column pair
    // (x_j, y_j) contributes H + A and i(H - A).
    for (int k = 0; k < M; ++k) {
        auto put = [&](int col, cx d) {
            J(2 * k, col) = d.real();
            J(2 * k + 1, col) = d.imag();
        };
        cx Hkk{};
        for (int j = 0; j < M; ++j) {
            if (j == k) continue;
            cx dz = c.z[k] - c.z[j];
            cx Hkj = c.gamma[j] / (2.0 * pi * I * dz * dz);
            Hkk -= Hkj;
            put(2 * j, Hkj);
            put(2 * j + 1, I * Hkj);
            put(2 * M + j, 1.0 / (2.0 * pi * I * dz));
        }
        cx Akk = I * c.bomega;
        put(2 * k, Hkk + Akk);
        put(2 * k + 1, I * (Hkk - Akk));
        put(3 * M, I * std::conj(c.z[k]));
        put(3 * M + 1, -std::conj(c.z[k]));
    }
    return J;
}

Eigen::MatrixXd split_jacobian(const PointConfig& c) {
    Eigen::MatrixXd full = full_jacobian(c);
    Eigen::MatrixXd J(full.rows(), split_width(c));
    int i = 0;
    for (const auto& tok : c.split) {
        TokenCols tc = token_columns(tok, c);
        for (int col : tc.cols) J.col(i++) = tc.scale * full.col(col);
    }
    return J;
}

RankInfo nondegenerate(const PointConfig& c, double rank_tol) {
    RankInfo info;
    const int M = c.count();
    Eigen::MatrixXd full = full_jacobian(c);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd_full(full);
    auto sv = svd_full.singularValues();
    info.full_rank = sv(sv.size() - 1) > rank_tol * sv(0);

    if (!c.split.empty() && split_width(c) == 2 * M) {
        Eigen::MatrixXd Js = split_jacobian(c);
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(Js);
        auto s = svd.singularValues();
        info.sigma_min = s(s.size() - 1);
        info.sigma_max = s(0);
        info.split_invertible = info.sigma_min > rank_tol * info.sigma_max;
        info.det_split = Js.determinant();
    }
    return info;
}

PvSolveResult pv_solve(const PointConfig& start, double tol, int max_iter) {
    const int M = start.count();
    if (split_width(start) != 2 * M)
        throw std::invalid_argument("pv_solve: split must select exactly 2M real coordinates");

    PvSolveResult res;
    res.cfg = start;
    double sep_floor = 1e-10 * std::max(min_separation(start.z), 1e-30);

    Eigen::VectorXd F = stack_residual(v_residual(res.cfg));
    for (int it = 0; it < max_iter; ++it) {
        res.residual = F.lpNorm<Eigen::Infinity>();
        if (res.residual <= tol) {
            res.converged = true;
            res.iterations = it;
            return res;
        }
        Eigen::MatrixXd J = split_jacobian(res.cfg);
        Eigen::VectorXd dx = J.fullPivLu().solve(-F);
        if (!dx.allFinite()) break;

        double f0 = F.norm();
        bool moved = false;
        for (double alpha = 1.0; alpha > 1e-9; alpha *= 0.5) {
            PointConfig trial;
            try {
                trial = apply_delta(res.cfg, (alpha * dx).eval());
            } catch (const std::logic_error&) {
                break;
            }
            if (min_separation(trial.z) < sep_floor) continue;
            Eigen::VectorXd Ft;
            try {
                Ft = stack_residual(v_residual(trial));
            } catch (const std::invalid_argument&) {
                continue;
            }
            if (!Ft.allFinite()) continue;
            if (Ft.norm() <= (1.0 - 1e-4 * alpha) * f0) {
                res.cfg = trial;
                F = Ft;
                moved = true;
                break;
            }
        }
        if (!moved) break;
        res.iterations = it + 1;
    }
    res.residual = F.lpNorm<Eigen::Infinity>();
    res.converged = res.residual <= tol;
    return res;
}

TrioResult grobli_trio(double gamma1, double gamma2, double d, double theta) {
    if (d <= 0.0) throw std::invalid_argument("grobli_trio: separation must be positive");
    double gsum = gamma1 + gamma2;
    if (std::abs(gsum) <= 1e-12 * (std::abs(gamma1) + std::abs(gamma2)))
        throw std::runtime_error("grobli_trio: gamma1 + gamma2 = 0, third strength undefined");

    double gamma3 = -gamma1 * gamma2 / gsum;
    cx z1 = -gamma2 * d / gsum;
    cx z2 = gamma1 * d / gsum;
    double radicand = (gamma1 + gamma2 + gamma3) / gsum;
    if (radicand < 0.0)
        throw std::runtime_error("grobli_trio: no real position for the third center");
    cx z3 = d * std::polar(1.0, theta) * std::sqrt(radicand);

    double l12 = d, l23 = std::abs(z2 - z3), l31 = std::abs(z3 - z1);
    if (std::min({l12, l23, l31}) <= 1e-12 * d)
        throw std::runtime_error("grobli_trio: coincident centers");
    if (std::abs(l12 - l23) <= 1e-9 * d && std::abs(l23 - l31) <= 1e-9 * d)
        throw std::runtime_error("grobli_trio: equilateral triangle is purely rotating (kappa = +/-infinity)");

    double Omega = ((gamma2 + gamma3) / (l23 * l23) + (gamma3 + gamma1) / (l31 * l31) + gsum / (l12 * l12)) / (4.0 * pi);
    double rhs = -4.0 * pi * pi * Omega * Omega + gamma1 * gamma1 / (l31 * l31 * d * d) +
                 gamma2 * gamma2 / (l23 * l23 * d * d) + gamma3 * gamma3 / (l31 * l31 * l23 * l23);
    double rhs_scale = 4.0 * pi * pi * Omega * Omega + gamma1 * gamma1 / (l31 * l31 * d * d) +
                       gamma2 * gamma2 / (l23 * l23 * d * d) + gamma3 * gamma3 / (l31 * l31 * l23 * l23);
    if (std::abs(rhs) <= 1e-12 * rhs_scale)
        throw std::runtime_error("grobli_trio: purely rotating configuration (kappa = +/-infinity)");
    if (rhs < 0.0)
        throw std::runtime_error("grobli_trio: no consistent complex rotation rate");

    TrioResult out;
    out.cfg.z = {z1, z2, z3};
    out.cfg.gamma = {gamma1, gamma2, gamma3};
    out.gamma3 = gamma3;

    // The sign of 1/kappa is fixed by stationarity itself: solve the center
    // equation with the largest lever arm for bomega, then cross-check the
    // closed forms and the other centers.
    cx zc = collapse_point(out.cfg);
    int best = 0;
    for (int k = 1; k < 3; ++k)
        if (std::abs(out.cfg.z[k] - zc) > std::abs(out.cfg.z[best] - zc)) best = k;
    cx free{};
    for (int j = 0; j < 3; ++j)
        if (j != best) free += out.cfg.gamma[j] / (2.0 * pi * I * (out.cfg.z[best] - out.cfg.z[j]));
    out.cfg.bomega = I * free / std::conj(out.cfg.z[best] - zc);

    out.Omega = out.cfg.bomega.real();
    out.inv_kappa = -2.0 * out.cfg.bomega.imag();
    double inv_kappa2 = rhs / (pi * pi);
    if (std::abs(out.Omega - Omega) > 1e-9 * (1.0 + std::abs(Omega)) ||
        std::abs(out.inv_kappa * out.inv_kappa - inv_kappa2) > 1e-9 * (1.0 + inv_kappa2))
        throw std::logic_error("grobli_trio: closed forms and stationarity disagree");

    double scale = (std::abs(gamma1) + std::abs(gamma2) + std::abs(gamma3)) / (2.0 * pi * std::min({l12, l23, l31}));
    auto r = vtilde_residual(out.cfg);
    for (const cx& v : r)
        if (std::abs(v) > 1e-12 * scale)
            throw std::logic_error("grobli_trio: residual check failed");
    return out;
}

PointConfig preset_trio() {
    TrioResult t = grobli_trio(1.0, 2.0, 3.0, pi / 2.0);
    PointConfig c = shifted(t.cfg);
    c.split = {"z1", "z2", "gamma1", "kappa"};
    return c;
}

PointConfig preset_quartet() {
    double s3 = std::sqrt(3.0);
    PointConfig c;
    // Centrosymmetric parallelogram: z3 = -z2, z4 = -z1, so the collapse
    // point sits exactly at the origin.
    c.z = {cx(s3 / 2.0, -0.5), cx(1.0 + s3 / 2.0, -0.5), cx(-s3 / 2.0 - 1.0, 0.5), cx(-s3 / 2.0, 0.5)};
    c.gamma = {(2.0 * s3 + 5.0) * pi, (s3 - 4.0) * pi, (s3 - 4.0) * pi, (2.0 * s3 + 5.0) * pi};
    c.bomega = cx(2.0 * s3 - 0.75, -0.5);
    c.split = {"z1", "z2", "z3", "gamma1", "Omega"};
    return c;
}

std::vector<cx> evolve(const PointConfig& c, double t) {
    Frame fr = Frame::from_bomega(c.bomega);
    cx zc = collapse_point(c);
    cx L = scale_factor(fr, t);
    std::vector<cx> out(c.count());
    for (int k = 0; k < c.count(); ++k) out[k] = zc + L * (c.z[k] - zc);
    return out;
}

namespace {

std::vector<cx> interaction_rhs(const std::vector<cx>& z, const std::vector<double>& gamma) {
    const int M = static_cast<int>(z.size());
    std::vector<cx> f(M);
    for (int k = 0; k < M; ++k) {
        cx s{};
        for (int j = 0; j < M; ++j)
            if (j != k) s += gamma[j] / (2.0 * pi * I * (z[k] - z[j]));
        f[k] = std::conj(s);  // d z_k / dt
    }
    return f;
}

std::vector<cx> rk4_step(const std::vector<cx>& y, const std::vector<double>& gamma, double h) {
    const size_t M = y.size();
    auto k1 = interaction_rhs(y, gamma);
    std::vector<cx> tmp(M);
    for (size_t i = 0; i < M; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
    auto k2 = interaction_rhs(tmp, gamma);
    for (size_t i = 0; i < M; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
    auto k3 = interaction_rhs(tmp, gamma);
    for (size_t i = 0; i < M; ++i) tmp[i] = y[i] + h * k3[i];
    auto k4 = interaction_rhs(tmp, gamma);
    std::vector<cx> out(M);
    for (size_t i = 0; i < M; ++i)
        out[i] = y[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

}  // namespace

OdeResult integrate_interaction(const std::vector<cx>& z0, const std::vector<double>& gamma,
                                const std::vector<double>& times, double rel_tol) {
    OdeResult res;
    std::vector<cx> y = z0;
    double t = 0.0;
    cx I0{};
    for (size_t k = 0; k < z0.size(); ++k) I0 += gamma[k] * z0[k];

    auto record_drift = [&]() {
        cx Icur{};
        for (size_t k = 0; k < y.size(); ++k) Icur += gamma[k] * y[k];
        res.impulse_drift = std::max(res.impulse_drift, std::abs(Icur - I0));
    };

    double h = 0.0;
    for (double target : times) {
        if (target < t) throw std::invalid_argument("integrate_interaction: times must be nondecreasing");
        if (h == 0.0) h = std::max((target - t) / 64.0, 1e-12);
        while (t < target) {
            bool clipped = false;
            double hs = h;
            if (t + hs >= target) {
                hs = target - t;
                clipped = true;
            }
            auto y1 = rk4_step(y, gamma, hs);
            auto yh = rk4_step(y, gamma, 0.5 * hs);
            auto y2 = rk4_step(yh, gamma, 0.5 * hs);
            double err = 0.0, scale = 1e-12;
            for (size_t i = 0; i < y.size(); ++i) {
                err = std::max(err, std::abs(y1[i] - y2[i]) / 15.0);
                scale = std::max(scale, std::abs(y2[i]));
            }
            double tol_step = rel_tol * scale;
            if (err <= tol_step || hs <= 1e-14) {
                // accept, with local extrapolation
                for (size_t i = 0; i < y.size(); ++i) y2[i] += (y2[i] - y1[i]) / 15.0;
                y = y2;
                t += hs;
                ++res.steps;
                record_drift();
            }
            double grow = (err > 0.0) ? 0.9 * std::pow(tol_step / err, 0.2) : 5.0;
            grow = std::clamp(grow, 0.2, 5.0);
            if (!clipped || err > tol_step) h = hs * grow;
            if (res.steps > 2000000) throw std::runtime_error("integrate_interaction: step limit exceeded");
        }
        res.states.push_back(y);
    }
    return res;
}

void to_json(nlohmann::json& j, const PointConfig& c) {
    j = nlohmann::json::object();
    auto zs = nlohmann::json::array();
    for (const cx& z : c.z) zs.push_back({z.real(), z.imag()});
    j["z"] = std::move(zs);
    j["gamma"] = c.gamma;
    j["bomega"] = {c.bomega.real(), c.bomega.imag()};
    j["split"] = c.split;
}

void from_json(const nlohmann::json& j, PointConfig& c) {
    c.z.clear();
    for (const auto& p : j.at("z")) c.z.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    c.gamma = j.at("gamma").get<std::vector<double>>();
    auto b = j.at("bomega");
    c.bomega = cx(b.at(0).get<double>(), b.at(1).get<double>());
    c.split = j.value("split", std::vector<std::string>{});
}

}  // namespace hv
