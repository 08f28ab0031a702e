#pragma once
#include <vector>

#include "hvortex/trace.hpp"

namespace hv {

// Geometry of M excised disks of common radius |rho| centered at zeta_k.
// rho is carried signed (the continuation parameter); all separation checks
// use |rho|.
struct Disks {
    std::vector<cx> centers;
    double rho = 0.0;

    int count() const { return static_cast<int>(centers.size()); }
    double min_separation() const;  // +inf for a single disk
    // worst pairwise re-expansion ratio 2|rho| / |zeta_j - zeta_k|; must be < 1
    double expansion_ratio(int* j_out = nullptr, int* k_out = nullptr) const;
    void require_admissible() const;
};

// Field value of the combined circle potential at zeta outside every disk:
//   Z[phi](zeta) = -sum_k sum_{n>=1} rho^n phihat_{k,-n} / (zeta - zeta_k)^n.
// Only negative-index density coefficients enter.
cx z_field(const Disks& d, const std::vector<Trace>& dens, cx zeta);

// Boundary trace on circle k as a Trace in tau: the self-disk part is the
// Cauchy multiplier C phi_k; each other disk contributes an analytic part
// re-expanded about zeta_k with n_off retained powers (default: density
// support + 16).  Throws if the geometric tail bound exceeds tail_tol.
Trace z_trace(const Disks& d, const std::vector<Trace>& dens, int k, int n_off = -1,
              double tail_tol = 1e-13);

// f(zeta_k + rho tau) = zeta_k + rho tau + rho^2 Z_k[mu] as a Trace.
Trace conformal_map_trace(const Disks& d, const std::vector<Trace>& mu, int k);
// f'(zeta_k + rho tau) = 1 + rho Z_k[mu'].
Trace conformal_map_deriv_trace(const Disks& d, const std::vector<Trace>& mu, int k);

}  // namespace hv
