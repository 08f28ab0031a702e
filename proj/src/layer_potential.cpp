#include "hvortex/layer_potential.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace hv {

double Disks::min_separation() const {
    double s = std::numeric_limits<double>::infinity();
    for (size_t j = 0; j < centers.size(); ++j)
        for (size_t k = j + 1; k < centers.size(); ++k)
            s = std::min(s, std::abs(centers[j] - centers[k]));
    return s;
}

double Disks::expansion_ratio(int* j_out, int* k_out) const {
    double worst = 0.0;
    for (size_t j = 0; j < centers.size(); ++j)
        for (size_t k = j + 1; k < centers.size(); ++k) {
            double r = 2.0 * std::abs(rho) / std::abs(centers[j] - centers[k]);
            if (r > worst) {
                worst = r;
                if (j_out) *j_out = static_cast<int>(j);
                if (k_out) *k_out = static_cast<int>(k);
            }
        }
    return worst;
}

void Disks::require_admissible() const {
    int j = -1, k = -1;
    double r = expansion_ratio(&j, &k);
    if (r >= 1.0)
        throw std::runtime_error("disks too close: re-expansion ratio " + std::to_string(r) +
                                 " >= 1 for pair (" + std::to_string(j) + "," + std::to_string(k) + ")");
}

cx z_field(const Disks& d, const std::vector<Trace>& dens, cx zeta) {
    cx v{};
    for (int k = 0; k < d.count(); ++k) {
        cx dz = zeta - d.centers[static_cast<size_t>(k)];
        if (std::abs(dz) <= std::abs(d.rho))
            throw std::domain_error("z_field: point inside excised disk");
        const Trace& phi = dens[static_cast<size_t>(k)];
        cx r = d.rho / dz;
        cx p = 1.0;
        for (int n = 1; n <= -phi.lo(); ++n) {
            p *= r;
            cx c = phi.coeff(-n);
            if (c != cx{}) v -= p * c;
        }
    }
    return v;
}

Trace z_trace(const Disks& d, const std::vector<Trace>& dens, int k, int n_off, double tail_tol) {
    d.require_admissible();
    const int M = d.count();
    Trace out = cauchy(dens[static_cast<size_t>(k)]);
    if (d.rho == 0.0) return out;

    int max_supp = 0;
    for (const auto& t : dens) max_supp = std::max(max_supp, -t.lo());
    if (n_off < 0) n_off = max_supp + 16;

    double tail_bound = 0.0;
    for (int j = 0; j < M; ++j) {
        if (j == k) continue;
        const Trace& phi = dens[static_cast<size_t>(j)];
        cx c0 = d.centers[static_cast<size_t>(k)] - d.centers[static_cast<size_t>(j)];
        cx step = -d.rho / c0;  // multiplies term when s -> s+1 (times (n+s)/(s+1))
        for (int n = 1; n <= -phi.lo(); ++n) {
            cx ph = phi.coeff(-n);
            if (ph == cx{}) continue;
            // g(tau) = -rho^n ph / (c0 + rho tau)^n, expanded in tau
            cx term = -ph * std::pow(d.rho / c0, n);
            for (int s = 0; s <= n_off; ++s) {
                out.add_coeff(s, term);
                term *= step * (double(n + s) / double(s + 1));
            }
            // geometric bound on the dropped tail
            double ratio = std::abs(step) * (double(n + n_off + 1) / double(n_off + 2));
            if (ratio < 1.0)
                tail_bound += std::abs(term) / (1.0 - ratio);
            else
                tail_bound += std::numeric_limits<double>::infinity();
        }
    }
    if (tail_bound > tail_tol)
        throw std::runtime_error("z_trace: off-disk re-expansion tail " + std::to_string(tail_bound) +
                                 " exceeds tolerance; increase n_off or reduce rho");
    out.add_loss(tail_bound);
    out.trim();
    return out;
}

Trace conformal_map_trace(const Disks& d, const std::vector<Trace>& mu, int k) {
    Trace f = Trace::monomial(1, d.rho);
    f.add_coeff(0, d.centers[static_cast<size_t>(k)]);
    return f + cx(d.rho * d.rho, 0.0) * z_trace(d, mu, k);
}

Trace conformal_map_deriv_trace(const Disks& d, const std::vector<Trace>& mu, int k) {
    std::vector<Trace> mup(mu.size());
    for (size_t j = 0; j < mu.size(); ++j) mup[j] = dtau(mu[j]);
    return Trace::constant(1.0) + cx(d.rho, 0.0) * z_trace(d, mup, k);
}

}  // namespace hv
