#pragma once
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hvortex/frame.hpp"
#include "hvortex/trace.hpp"

namespace hv {

// A point-vortex configuration in the rotating/collapsing frame, together
// with the split naming which 2M real parameter coordinates Newton may move.
// Split tokens: "zK" (both components of center K, 1-based), "gammaK",
// "Omega" (Re bomega), "ImOmega", "OmegaC" (both components), "kappa".
struct PointConfig {
    std::vector<cx> z;
    std::vector<double> gamma;
    cx bomega{};
    std::vector<std::string> split;

    int count() const { return static_cast<int>(z.size()); }
    Frame frame() const { return Frame::from_bomega(bomega); }
};

double gamma_total(const PointConfig& c);
cx impulse(const PointConfig& c);                       // sum gamma_k z_k
cx collapse_point(const PointConfig& c);                // impulse / total strength
PointConfig shifted(const PointConfig& c);              // centers translated so the collapse point is 0

// V_k = sum_{j!=k} gamma_j / (2 pi i (z_k - z_j)) + i bomega conj(z_k)
std::vector<cx> v_residual(const PointConfig& c);
// same with conj(z_k - z_c): stationarity about the collapse point
std::vector<cx> vtilde_residual(const PointConfig& c);

// Jacobian of V in all 3M+2 real coordinates, columns ordered
// (Re z_1, Im z_1, ..., gamma_1, ..., gamma_M, Re bomega, Im bomega),
// rows (Re V_1, Im V_1, ..., Im V_M).
Eigen::MatrixXd full_jacobian(const PointConfig& c);
// columns selected by the split tokens (chain rule for "kappa")
Eigen::MatrixXd split_jacobian(const PointConfig& c);

struct RankInfo {
    bool full_rank = false;     // full 2M x (3M+2) Jacobian has rank 2M
    double sigma_min = 0.0;     // smallest singular value of the split block
    double sigma_max = 0.0;
    double det_split = 0.0;     // determinant of the 2M x 2M split block
    bool split_invertible = false;
};
RankInfo nondegenerate(const PointConfig& c, double rank_tol = 1e-8);

struct PvSolveResult {
    PointConfig cfg;
    bool converged = false;
    int iterations = 0;
    double residual = 0.0;
};
// Damped Newton on V = 0 over the split coordinates.
PvSolveResult pv_solve(const PointConfig& start, double tol = 1e-13, int max_iter = 50);

// Three-vortex collapse family: strengths (gamma1, gamma2), separation d on
// the real axis, angle theta placing the third vortex.  Throws
// std::runtime_error for the forbidden combinations (purely rotating output,
// no consistent rotation rate, coincident or equilateral geometry).
struct TrioResult {
    PointConfig cfg;   // unshifted centers; bomega filled in
    double gamma3 = 0.0;
    double Omega = 0.0;
    double inv_kappa = 0.0;
};
TrioResult grobli_trio(double gamma1, double gamma2, double d, double theta);

// Presets used across the tool: the concrete trio (1, 2, 3, pi/2) shifted to
// its collapse point, and the four-vortex configuration.
PointConfig preset_trio();
PointConfig preset_quartet();

// Exact self-similar evolution z_k(t) = z_c + L(t) (z_k(0) - z_c).
std::vector<cx> evolve(const PointConfig& c, double t);

// Adaptive RK4 integration of the interaction equations
//   d conj(z_k)/dt = sum_{j!=k} gamma_j / (2 pi i (z_k - z_j)),
// used as the oracle against evolve().
struct OdeResult {
    std::vector<std::vector<cx>> states;  // one per requested time
    double impulse_drift = 0.0;           // max |I(t) - I(0)| along the integration
    int steps = 0;
};
OdeResult integrate_interaction(const std::vector<cx>& z0, const std::vector<double>& gamma,
                                const std::vector<double>& times, double rel_tol = 1e-11);

void to_json(nlohmann::json& j, const PointConfig& c);
void from_json(const nlohmann::json& j, PointConfig& c);

}  // namespace hv
