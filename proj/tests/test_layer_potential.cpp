#include "doctest.h"
#include "hvortex/layer_potential.hpp"

#include <random>

using namespace hv;

namespace {

Trace random_density(int N, unsigned seed) {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Trace t;
    for (int n = 1; n <= N; ++n) {
        cx c(u(gen), u(gen));
        t.set_coeff(n, c);
        t.set_coeff(-n, std::conj(c));
    }
    return t;
}

// direct trapezoid quadrature of the defining contour integral
cx field_quadrature(const Disks& d, const std::vector<Trace>& dens, cx zeta, int K) {
    cx acc{};
    for (int k = 0; k < d.count(); ++k) {
        for (int i = 0; i < K; ++i) {
            cx sigma = std::polar(1.0, 2.0 * pi * i / K);
            acc += eval(dens[k], sigma) * d.rho * sigma / (d.rho * sigma + d.centers[k] - zeta);
        }
    }
    return acc / double(K);
}

// boundary-trace quadrature: regularized self-disk kernel on a half-offset
// grid plus the off-disk contributions
cx trace_quadrature(const Disks& d, const std::vector<Trace>& dens, int k, cx tau, int K) {
    cx acc{};
    cx mu_tau = eval(dens[k], tau);
    for (int i = 0; i < K; ++i) {
        cx sigma = std::polar(1.0, 2.0 * pi * (i + 0.5) / K);
        acc += (eval(dens[k], sigma) - mu_tau) * sigma / (sigma - tau);
    }
    for (int j = 0; j < d.count(); ++j) {
        if (j == k) continue;
        for (int i = 0; i < K; ++i) {
            cx sigma = std::polar(1.0, 2.0 * pi * i / K);
            acc += eval(dens[j], sigma) * d.rho * sigma /
                   (d.rho * sigma + d.centers[j] - d.rho * tau - d.centers[k]);
        }
    }
    return acc / double(K);
}

}  // namespace

TEST_CASE("zero density gives zero field") {
    Disks d{{cx(0, 0), cx(2, 1)}, 0.3};
    std::vector<Trace> mu(2);
    CHECK(z_field(d, mu, cx(5, 5)) == cx(0, 0));
}

TEST_CASE("unit disk with first harmonic gives -1/zeta") {
    Disks d{{cx(0, 0)}, 1.0};
    Trace mu;
    mu.set_coeff(1, 1.0);
    mu.set_coeff(-1, 1.0);
    std::vector<Trace> dens{mu};
    for (cx zeta : {cx(2.0, 0.3), cx(-1.5, 1.5), cx(0.0, 4.0)}) {
        cx v = z_field(d, dens, zeta);
        CHECK(std::abs(v - (-1.0 / zeta)) < 1e-14);
        CHECK(std::abs(v - field_quadrature(d, dens, zeta, 2048)) < 1e-10);
    }
}

TEST_CASE("two-disk field matches direct quadrature") {
    Disks d{{cx(-1, 0), cx(1, 0)}, 0.25};
    std::vector<Trace> dens{random_density(6, 7), random_density(6, 8)};
    for (cx zeta : {cx(0.0, 0.9), cx(2.2, -0.7), cx(-0.4, -3.0)}) {
        cx v = z_field(d, dens, zeta);
        CHECK(std::abs(v - field_quadrature(d, dens, zeta, 2048)) < 1e-10);
    }
}

TEST_CASE("field evaluation rejects points inside a disk") {
    Disks d{{cx(0, 0), cx(3, 0)}, 0.5};
    std::vector<Trace> dens{random_density(3, 1), random_density(3, 2)};
    CHECK_THROWS_AS(z_field(d, dens, cx(3.1, 0.0)), std::domain_error);
    CHECK_NOTHROW(z_field(d, dens, cx(3.6, 0.0)));
}

TEST_CASE("field decays like 1/|zeta| on rays") {
    Disks d{{cx(-1, 0), cx(1, 0)}, 0.2};
    std::vector<Trace> dens{random_density(5, 3), random_density(5, 4)};
    cx dir = std::polar(1.0, 0.7);
    double prev = std::numeric_limits<double>::infinity();
    for (double r : {4.0, 8.0, 16.0, 32.0}) {
        double v = std::abs(z_field(d, dens, r * dir));
        CHECK(v * r < 10.0 * norm1(dens[0]) + 10.0 * norm1(dens[1]));
        CHECK(v < prev);
        prev = v;
    }
}

TEST_CASE("trace at rho=0 is the Cauchy multiplier") {
    Disks d{{cx(-1, 0), cx(1, 0)}, 0.0};
    std::vector<Trace> dens{random_density(6, 11), random_density(6, 12)};
    for (int k = 0; k < 2; ++k) {
        Trace t = z_trace(d, dens, k);
        CHECK(max_abs_diff(t, cauchy(dens[k])) == 0.0);
    }
}

TEST_CASE("single disk trace is the Cauchy multiplier at every rho") {
    for (double rho : {0.1, 0.7, -0.4, 2.0}) {
        Disks d{{cx(0.3, -0.2)}, rho};
        std::vector<Trace> dens{random_density(7, 21)};
        CHECK(max_abs_diff(z_trace(d, dens, 0), cauchy(dens[0])) == 0.0);
    }
}

TEST_CASE("two-disk trace matches principal-value quadrature") {
    Disks d{{cx(1, 0), cx(-1, 0)}, 0.1};
    std::vector<Trace> dens{random_density(8, 31), random_density(8, 32)};
    for (int k = 0; k < 2; ++k) {
        Trace t = z_trace(d, dens, k);
        for (int i = 0; i < 24; ++i) {
            cx tau = std::polar(1.0, 2.0 * pi * i / 24.0);
            CHECK(std::abs(eval(t, tau) - trace_quadrature(d, dens, k, tau, 512)) < 1e-9);
        }
    }
}

TEST_CASE("trace is linear in the density") {
    Disks d{{cx(1, 1), cx(-1, 0)}, 0.15};
    std::vector<Trace> a{random_density(5, 41), random_density(5, 42)};
    std::vector<Trace> b{random_density(5, 43), random_density(5, 44)};
    std::vector<Trace> comb(2);
    for (int j = 0; j < 2; ++j) comb[j] = cx(2.0, 0.0) * a[j] + cx(-0.5, 0.0) * b[j];
    Trace lhs = z_trace(d, comb, 0);
    Trace rhs = cx(2.0, 0.0) * z_trace(d, a, 0) + cx(-0.5, 0.0) * z_trace(d, b, 0);
    CHECK(max_abs_diff(lhs, rhs) < 1e-14);
}

TEST_CASE("trace commutes with tau differentiation") {
    // d/dtau Z_k[mu] = Z_k[mu'] exactly (rho d/dzeta collapses to d/dtau)
    Disks d{{cx(1.2, 0.3), cx(-0.8, -0.4)}, 0.12};
    std::vector<Trace> dens{random_density(6, 51), random_density(6, 52)};
    std::vector<Trace> densp(2);
    for (int j = 0; j < 2; ++j) densp[j] = dtau(dens[j]);
    for (int k = 0; k < 2; ++k) {
        Trace lhs = dtau(z_trace(d, dens, k));
        Trace rhs = z_trace(d, densp, k);
        CHECK(max_abs_diff(lhs, rhs) < 1e-11);
    }
}

TEST_CASE("close disks trigger the divergence error") {
    Disks d{{cx(0, 0), cx(0.19, 0)}, 0.1};
    std::vector<Trace> dens{random_density(4, 61), random_density(4, 62)};
    CHECK_THROWS_AS(z_trace(d, dens, 0), std::runtime_error);
    CHECK(d.expansion_ratio() > 1.0);
}

TEST_CASE("marginal separation fails the tail tolerance at default order") {
    // ratio 0.8: the default truncation cannot reach 1e-13
    Disks d{{cx(0, 0), cx(1, 0)}, 0.4};
    std::vector<Trace> dens{random_density(4, 71), random_density(4, 72)};
    CHECK_THROWS_AS(z_trace(d, dens, 0), std::runtime_error);
    CHECK_NOTHROW(z_trace(d, dens, 0, 220));
}

TEST_CASE("trace continuity as rho -> 0") {
    Disks d{{cx(0, 0), cx(1, 0)}, 1e-6};
    std::vector<Trace> dens{random_density(6, 81), random_density(6, 82)};
    Trace t = z_trace(d, dens, 0);
    CHECK(max_abs_diff(t, cauchy(dens[0])) < 1e-5 * norm1(dens[0]));
}

TEST_CASE("negative rho equals positive rho with reflected density") {
    Disks dm{{cx(0.5, 0), cx(-1, 0.5)}, -0.2};
    Disks dp{{cx(0.5, 0), cx(-1, 0.5)}, 0.2};
    std::vector<Trace> dens{random_density(5, 91), random_density(5, 92)};
    std::vector<Trace> flip(2);
    for (int j = 0; j < 2; ++j) {
        Trace f;
        for (int n = dens[j].lo(); n <= dens[j].hi(); ++n)
            f.set_coeff(n, (n % 2 == 0 ? 1.0 : -1.0) * dens[j].coeff(n));
        flip[j] = f;
    }
    for (cx zeta : {cx(0.0, 2.0), cx(1.5, -0.8)}) {
        CHECK(std::abs(z_field(dm, dens, zeta) - z_field(dp, flip, zeta)) < 1e-13);
    }
}

TEST_CASE("mean-zero densities keep mean-zero Cauchy traces") {
    Trace mu = random_density(6, 95);
    Disks d{{cx(0, 0)}, 1.0};
    Trace t = z_trace(d, {mu}, 0);
    CHECK(t.coeff(0) == cx(0.0, 0.0));
}

TEST_CASE("conformal map trace pieces") {
    Disks d{{cx(1, 0), cx(-1, 0)}, 0.1};
    std::vector<Trace> mu{Trace{}, Trace{}};
    Trace ident = conformal_map_trace(d, mu, 0);
    CHECK(std::abs(ident.coeff(0) - cx(1.0, 0.0)) == 0.0);
    CHECK(std::abs(ident.coeff(1) - cx(0.1, 0.0)) == 0.0);
    CHECK(norm1(ident) == doctest::Approx(1.1));

    std::vector<Trace> mr{random_density(5, 96), random_density(5, 97)};
    Trace f = conformal_map_trace(d, mr, 0);
    Trace fp = conformal_map_deriv_trace(d, mr, 0);
    // rho * f'(zeta_k + rho tau) = d/dtau of the map trace
    Trace lhs = dtau(f);
    Trace rhs = cx(d.rho, 0.0) * fp;
    CHECK(max_abs_diff(lhs, rhs) < 1e-12);
    // and against central finite differences in theta
    for (int i = 0; i < 8; ++i) {
        double th = 2.0 * pi * i / 8.0;
        double h = 1e-6;
        cx tau = std::polar(1.0, th);
        cx fd = (eval(f, std::polar(1.0, th + h)) - eval(f, std::polar(1.0, th - h))) / (2.0 * h);
        cx want = -cx(0, 1) * std::conj(tau) * fd;  // d/dtau from d/dtheta
        CHECK(std::abs(want - d.rho * eval(fp, tau)) < 1e-6);
    }
}

TEST_CASE("single-vortex map reproduces the bifurcation kernel shape") {
    // M=1, center 0, rho=1: map trace is tau + C mu; with mu = 2 Re tau^{1-m}
    // the negative-index part picks up the expected -coefficient
    int m = 4;
    Disks d{{cx(0, 0)}, 1.0};
    Trace mu;
    mu.set_coeff(1 - m, 0.05);
    mu.set_coeff(m - 1, 0.05);
    Trace f = conformal_map_trace(d, {mu}, 0);
    CHECK(f.coeff(1) == cx(1.0, 0.0));
    CHECK(f.coeff(1 - m) == cx(-0.05, 0.0));
    CHECK(f.coeff(m - 1) == cx(0.0, 0.0));
}
