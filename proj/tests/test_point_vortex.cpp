#include "doctest.h"
#include "hvortex/point_vortex.hpp"

#include <cmath>
#include <random>

using namespace hv;

namespace {

double max_res(const std::vector<cx>& r) {
    double m = 0.0;
    for (const cx& v : r) m = std::max(m, std::abs(v));
    return m;
}

// displayed closed form for the rate equation, re-derived independently of
// grobli_trio for forbidden-angle scans
double trio_rate_rhs(double g1, double g2, double d, double theta) {
    double g3 = -g1 * g2 / (g1 + g2);
    cx z1{-g2 * d / (g1 + g2), 0.0}, z2{g1 * d / (g1 + g2), 0.0};
    cx z3 = d * std::polar(1.0, theta) * std::sqrt((g1 + g2 + g3) / (g1 + g2));
    double l23 = std::abs(z2 - z3), l31 = std::abs(z3 - z1);
    double Om = ((g2 + g3) / (l23 * l23) + (g3 + g1) / (l31 * l31) + (g1 + g2) / (d * d)) / (4.0 * pi);
    return -4.0 * pi * pi * Om * Om + g1 * g1 / (l31 * l31 * d * d) + g2 * g2 / (l23 * l23 * d * d) +
           g3 * g3 / (l31 * l31 * l23 * l23);
}

}  // namespace

TEST_CASE("collapse point golden values") {
    TrioResult t = grobli_trio(1.0, 2.0, 3.0, pi / 2.0);
    cx zc = collapse_point(t.cfg);
    CHECK(std::abs(zc - cx(0.0, -2.0 / std::sqrt(7.0))) < 1e-13);

    PointConfig pair;
    pair.z = {cx(1, 0), cx(-1, 0)};
    pair.gamma = {0.7, 0.7};
    CHECK(std::abs(collapse_point(pair)) == 0.0);

    CHECK(std::abs(collapse_point(preset_quartet())) == 0.0);

    PointConfig zero = pair;
    zero.gamma = {1.0, -1.0};
    CHECK_THROWS_AS(collapse_point(zero), std::invalid_argument);
}

TEST_CASE("trio generator reproduces the explicit example") {
    TrioResult t = grobli_trio(1.0, 2.0, 3.0, pi / 2.0);
    CHECK(std::abs(t.cfg.z[0] - cx(-2.0, 0.0)) < 1e-13);
    CHECK(std::abs(t.cfg.z[1] - cx(1.0, 0.0)) < 1e-13);
    CHECK(std::abs(t.cfg.z[2] - cx(0.0, std::sqrt(7.0))) < 1e-13);
    CHECK(t.gamma3 == doctest::Approx(-2.0 / 3.0).epsilon(1e-14));
    CHECK(t.Omega == doctest::Approx(35.0 / (264.0 * pi)).epsilon(1e-12));
    CHECK(t.inv_kappa == doctest::Approx(std::sqrt(7.0) / (132.0 * pi)).epsilon(1e-12));

    CHECK(max_res(vtilde_residual(t.cfg)) < 1e-12);
    PointConfig s = shifted(t.cfg);
    CHECK(max_res(v_residual(s)) < 1e-12);
}

TEST_CASE("quartet preset is a stationary configuration") {
    PointConfig q = preset_quartet();
    CHECK(max_res(v_residual(q)) < 1e-12);
    // z_c = 0 exactly, so the two residual systems coincide bitwise
    auto v = v_residual(q), vt = vtilde_residual(q);
    for (int k = 0; k < q.count(); ++k) CHECK(v[k] == vt[k]);
}

TEST_CASE("scaling and rotation covariance of the stationary set") {
    PointConfig q = preset_quartet();
    PointConfig scaled = q;
    double s = 1.7;
    for (auto& z : scaled.z) z *= s;
    scaled.bomega /= s * s;
    CHECK(max_res(v_residual(scaled)) < 1e-12);

    PointConfig rot = q;
    cx phase = std::polar(1.0, 0.83);
    for (auto& z : rot.z) z *= phase;
    CHECK(max_res(v_residual(rot)) < 1e-12);
}

TEST_CASE("analytic Jacobian matches finite differences") {
    PointConfig c;
    c.z = {cx(0.9, -0.3), cx(-0.5, 0.8), cx(0.1, 1.4)};
    c.gamma = {1.3, -0.7, 2.1};
    c.bomega = cx(0.4, -0.25);
    const int M = 3;

    Eigen::MatrixXd J = full_jacobian(c);
    Eigen::MatrixXd Jfd(2 * M, 3 * M + 2);
    double h = 1e-6;
    auto stack = [&](const PointConfig& cc) {
        auto r = v_residual(cc);
        Eigen::VectorXd v(2 * M);
        for (int k = 0; k < M; ++k) {
            v(2 * k) = r[k].real();
            v(2 * k + 1) = r[k].imag();
        }
        return v;
    };
    for (int col = 0; col < 3 * M + 2; ++col) {
        PointConfig up = c, dn = c;
        auto bump = [&](PointConfig& cc, double s) {
            if (col < 2 * M) {
                cx dz = (col % 2 == 0) ? cx(s, 0) : cx(0, s);
                cc.z[col / 2] += dz;
            } else if (col < 3 * M) {
                cc.gamma[col - 2 * M] += s;
            } else if (col == 3 * M) {
                cc.bomega += cx(s, 0);
            } else {
                cc.bomega += cx(0, s);
            }
        };
        bump(up, h);
        bump(dn, -h);
        Jfd.col(col) = (stack(up) - stack(dn)) / (2.0 * h);
    }
    double scale = J.cwiseAbs().maxCoeff();
    CHECK((J - Jfd).cwiseAbs().maxCoeff() < 1e-6 * scale);
}

TEST_CASE("kappa split column follows the chain rule") {
    PointConfig c = preset_trio();
    c.split = {"kappa"};
    Eigen::MatrixXd col = split_jacobian(c);
    double kappa = -0.5 / c.bomega.imag();
    double h = 1e-6 * kappa;
    auto stack = [&](double kap) {
        PointConfig cc = c;
        cc.bomega = cx(cc.bomega.real(), -0.5 / kap);
        auto r = v_residual(cc);
        Eigen::VectorXd v(2 * cc.count());
        for (int k = 0; k < cc.count(); ++k) {
            v(2 * k) = r[k].real();
            v(2 * k + 1) = r[k].imag();
        }
        return v;
    };
    Eigen::VectorXd fd = (stack(kappa + h) - stack(kappa - h)) / (2.0 * h);
    CHECK((col.col(0) - fd).cwiseAbs().maxCoeff() < 1e-6 * fd.cwiseAbs().maxCoeff());
}

TEST_CASE("non-degeneracy of the explicit examples") {
    PointConfig q = preset_quartet();
    RankInfo info = nondegenerate(q);
    CHECK(info.full_rank);
    CHECK(info.split_invertible);
    CHECK(std::abs(std::abs(info.det_split) - 1.397) < 2e-3);

    PointConfig t = preset_trio();
    RankInfo it1 = nondegenerate(t);
    CHECK(it1.full_rank);
    CHECK(it1.split_invertible);

    t.split = {"z3", "gamma1", "gamma2", "OmegaC"};
    RankInfo it2 = nondegenerate(t);
    CHECK(it2.split_invertible);
}

TEST_CASE("Newton recovers the quartet root after a kick") {
    PointConfig q = preset_quartet();
    PointConfig start = q;
    start.z[0] += cx(0.01, -0.008);
    start.z[1] += cx(-0.006, 0.004);
    start.z[2] += cx(0.003, 0.009);
    start.gamma[0] += 0.05;
    start.bomega += cx(0.02, 0.0);
    PvSolveResult res = pv_solve(start);
    CHECK(res.converged);
    CHECK(res.residual <= 1e-13);
    CHECK(res.iterations <= 10);
    for (int k = 0; k < 4; ++k) CHECK(std::abs(res.cfg.z[k] - q.z[k]) < 1e-10);
}

TEST_CASE("random admissible trio draws satisfy the stationarity system") {
    std::mt19937 gen(2024);
    std::uniform_real_distribution<double> ug(-2.0, 2.0), ud(0.5, 3.0), uth(0.0, 2.0 * pi);
    int ok = 0, tried = 0;
    while (tried < 50) {
        double g1 = ug(gen), g2 = ug(gen);
        if (std::abs(g1 + g2) < 0.2) continue;
        ++tried;
        try {
            TrioResult t = grobli_trio(g1, g2, ud(gen), uth(gen));
            CHECK(max_res(vtilde_residual(t.cfg)) < 1e-10);
            ++ok;
        } catch (const std::runtime_error&) {
            // forbidden draw
        }
    }
    CHECK(ok >= 20);
}

TEST_CASE("forbidden trio parameters are rejected") {
    CHECK_THROWS_AS(grobli_trio(1.0, -1.0, 2.0, 0.3), std::runtime_error);
    // gamma1 = gamma2, theta = pi/2 is the equilateral triangle
    CHECK_THROWS_AS(grobli_trio(1.0, 1.0, 1.0, pi / 2.0), std::runtime_error);
    CHECK_THROWS_AS(grobli_trio(1.0, 2.0, -3.0, 1.0), std::invalid_argument);

    // the rate radicand is nonnegative with four zeros per circle: the two
    // collinear placements and a tangential mirror pair; all are rotating
    double g1 = 1.0, g2 = 2.0, d = 1.0;
    CHECK(std::abs(trio_rate_rhs(g1, g2, d, 0.0)) < 1e-12);
    CHECK_THROWS_AS(grobli_trio(g1, g2, d, 0.0), std::runtime_error);
    CHECK_THROWS_AS(grobli_trio(g1, g2, d, pi), std::runtime_error);

    // ternary-search the interior tangential zero
    double lo = 1.6, hi = 1.9;
    for (int it = 0; it < 200; ++it) {
        double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
        if (trio_rate_rhs(g1, g2, d, m1) < trio_rate_rhs(g1, g2, d, m2))
            hi = m2;
        else
            lo = m1;
    }
    double tstar = 0.5 * (lo + hi);
    CHECK(trio_rate_rhs(g1, g2, d, tstar) < 1e-12);
    CHECK_THROWS_AS(grobli_trio(g1, g2, d, tstar), std::runtime_error);
}

TEST_CASE("two vortices never collapse") {
    std::mt19937 gen(77);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    int converged_free_im = 0;
    for (int trial = 0; trial < 100; ++trial) {
        PointConfig c;
        c.z = {cx(u(gen), u(gen)), cx(u(gen), u(gen))};
        if (std::abs(c.z[0] - c.z[1]) < 0.3) continue;
        c.gamma = {u(gen) + 2.0, u(gen) + 2.0};
        c.bomega = cx(u(gen), -0.3);
        c.split = {"z1", "z2"};
        PvSolveResult res = pv_solve(c, 1e-13, 60);
        CHECK(!res.converged);  // Im(bomega) held fixed and nonzero

        // with the imaginary rate free, any limit must be purely rotating
        PointConfig c2 = c;
        c2.split = {"z2", "gamma1", "ImOmega"};
        PvSolveResult res2 = pv_solve(c2, 1e-13, 60);
        if (res2.converged) {
            ++converged_free_im;
            CHECK(std::abs(res2.cfg.bomega.imag()) < 1e-8);
        }
    }
    INFO("free-Im runs that converged (to rotating pairs): ", converged_free_im);
}

TEST_CASE("exact evolution and its scale factor") {
    PointConfig t = preset_trio();
    auto z0 = evolve(t, 0.0);
    for (int k = 0; k < 3; ++k) CHECK(std::abs(z0[k] - t.z[k]) < 1e-14);

    Frame fr = Frame::from_bomega(t.bomega);
    REQUIRE(fr.kappa > 0.0);
    double tlate = 0.999 * fr.kappa;
    auto zl = evolve(t, tlate);
    cx zc = collapse_point(t);
    for (int k = 0; k < 3; ++k) {
        CHECK(std::abs(zl[k] - zc) ==
              doctest::Approx(std::sqrt(1.0 - tlate / fr.kappa) * std::abs(t.z[k] - zc)).epsilon(1e-12));
        CHECK(std::abs(zl[k] - zc) < 0.04 * std::abs(t.z[k] - zc));
    }
    CHECK_THROWS_AS(evolve(t, fr.kappa * 1.001), std::domain_error);
}

TEST_CASE("self-similar evolution matches the interaction ODE") {
    PointConfig t = preset_trio();
    Frame fr = Frame::from_bomega(t.bomega);
    double tmid = 0.5 * fr.kappa;
    OdeResult ode = integrate_interaction(t.z, t.gamma, {tmid});
    auto zex = evolve(t, tmid);
    double scale = 0.0;
    for (const cx& z : zex) scale = std::max(scale, std::abs(z));
    for (int k = 0; k < 3; ++k)
        CHECK(std::abs(ode.states[0][k] - zex[k]) < 1e-8 * scale);
}

TEST_CASE("impulse is conserved along the integration") {
    PointConfig t = preset_trio();
    Frame fr = Frame::from_bomega(t.bomega);
    std::vector<double> times;
    for (int i = 1; i <= 9; ++i) times.push_back(0.11 * i * fr.kappa);
    OdeResult ode = integrate_interaction(t.z, t.gamma, times);
    CHECK(ode.impulse_drift <= 1e-9);

    // single vortex: stationary, impulse exactly constant
    OdeResult solo = integrate_interaction({cx(0.3, 0.4)}, {1.0}, {2.0});
    CHECK(std::abs(solo.states[0][0] - cx(0.3, 0.4)) == 0.0);

    // impulse is linear under shifts
    PointConfig sh = t;
    cx delta(0.6, -0.1);
    for (auto& z : sh.z) z += delta;
    CHECK(std::abs(impulse(sh) - impulse(t) - gamma_total(t) * delta) < 1e-12);
}

TEST_CASE("config json round trip") {
    PointConfig q = preset_quartet();
    nlohmann::json j = q;
    PointConfig back = j.get<PointConfig>();
    CHECK(back.count() == 4);
    for (int k = 0; k < 4; ++k) CHECK(back.z[k] == q.z[k]);
    CHECK(back.bomega == q.bomega);
    CHECK(back.split == q.split);
}
