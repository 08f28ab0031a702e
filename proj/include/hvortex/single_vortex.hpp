#pragma once

#include "hvortex/frame.hpp"
#include "hvortex/newton.hpp"
#include "hvortex/trace.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <optional>
#include <vector>

namespace hv {

// Parameters of a single hollow vortex seen in a steadily rotating or
// self-similarly collapsing frame.
struct VortexParams {
    double gamma = 2.0 * pi;  // circulation of the boundary vortex sheet
    Frame frame;

    cx bomega() const { return frame.bomega(); }
    // effective circulation constant; its imaginary part is the phantom sink
    // strength that accounts for the shrinking frame
    cx bgamma() const { return {gamma, 2.0 * pi * bomega().imag()}; }
    // Bernoulli constant of the circular solution
    double q0() const;
};

// Boundary data with m-fold symmetry: real densities mu (shape) and nu
// (potential) whose coefficients live on the index lattices 1-mn and -mn for
// n >= 1, together with the Bernoulli constant q.
struct MFoldState {
    int m = 2;
    Trace mu;
    Trace nu;
    double q = 0.0;
};

MFoldState trivial_state(int m, const VortexParams& params);

// lattice coefficient accessors: mode n maps to c_{1-mn}(mu) and c_{-mn}(nu);
// the setters also write the conjugate coefficient so the densities stay
// real-valued
cx mu_mode(const MFoldState& s, int n);
cx nu_mode(const MFoldState& s, int n);
void set_mu_mode(MFoldState& s, int n, cx v);
void set_nu_mode(MFoldState& s, int n, cx v);

// largest coefficient magnitude found off the symmetry lattice
double lattice_defect(const MFoldState& s);
// distance from the reflection-symmetric subspace (real mu modes, imaginary
// nu modes)
double even_defect(const MFoldState& s);
// min over the unit circle of |f'|; the state parametrizes an admissible
// boundary iff this is positive
double conformal_margin(const MFoldState& s);

// exterior evaluation of the boundary map f, its tau-derivative, and the
// tau-derivative of the flow potential (valid for |zeta| >= 1)
cx boundary_map(const MFoldState& s, cx zeta);
cx boundary_map_deriv(const MFoldState& s, cx zeta);
cx potential_deriv(const MFoldState& s, const VortexParams& p, cx zeta);

struct BoundaryResidual {
    Trace kinematic;  // normal-velocity mismatch along the boundary
    Trace bernoulli;  // pressure mismatch along the boundary
    double max_norm() const;
};

struct StateDirection {
    Trace dmu;
    Trace dnu;
    double dq = 0.0;
    double domega = 0.0;  // variation of the real rotation rate
};

// Intermediates of one residual evaluation, shared with the exact directional
// derivative.  inv2 = 1/|f'|^2 is recovered on a sampling grid (the direct
// Neumann inversion stops converging for strongly deformed boundaries).
// Sampled boundary data shared between a residual evaluation and its
// derivative passes. The nonlinear terms (notably 1/|f'|^2, whose spectrum
// decays slowly once the boundary deepens) are formed pointwise on a
// power-of-two grid and transformed back, so windowed coefficients stay
// accurate at any admissible amplitude.
struct ResidualWorkspace {
    int cap = kNoCap;  // coefficient window half-width of assembled residuals
    int K = 0;         // sampling grid size (power of two, > 4*cap)
    double margin = 0.0;  // min |f'| over the grid
    Trace f;   // boundary map
    Trace fp;  // f'
    std::vector<cx> fv;    // f at the grid nodes
    std::vector<cx> fpv;   // f' at the grid nodes
    std::vector<cx> velv;  // relative velocity numerator at the grid nodes
    std::vector<double> r2v;  // 1/|f'|^2 at the grid nodes
};

// cap <= 0 picks a window comfortably wider than the state's support.
// Throws std::domain_error when the boundary map loses local univalence.
ResidualWorkspace make_workspace(const MFoldState& s, const VortexParams& p, int cap = 0);
BoundaryResidual residual(const ResidualWorkspace& ws, const MFoldState& s,
                          const VortexParams& p);
BoundaryResidual residual(const MFoldState& s, const VortexParams& p, int cap = 0);
// exact derivative of the residual along dir, evaluated at the state that
// produced ws
BoundaryResidual directional_derivative(const ResidualWorkspace& ws, const MFoldState& s,
                                        const VortexParams& p, const StateDirection& dir);

// Per-mode symbol of the linearization at the circular solution; its zeros in
// Omega are the bifurcation points.
cx dispersion(int m, int n, const VortexParams& p);
// derivative of the symbol with respect to the real rotation rate
cx dispersion_domega(int m, int n, const VortexParams& p);
// rotation rates where mode n crosses: (gamma/2pi)(1 + sign/sqrt(mn))
double rotating_root(int m, int sign, double gamma, int n = 1);

// Null direction of the linearization at mode n: mu-hat = 1 (which = 0) or i
// (which = 1), nu-hat chosen so the kinematic row vanishes identically in
// Omega; the pressure row then carries exactly the dispersion symbol.
StateDirection kernel_direction(int m, int n, const VortexParams& p, int which = 0);

// Linearization at the circular solution over modes n = 1..nmax, as a real
// matrix.  Full space: unknowns [Re mu_n, Im mu_n]_n ++ [Re nu_n, Im nu_n]_n
// ++ [q], equations [Re K_n, Im K_n]_n ++ [Re B_n, Im B_n]_n ++ [B_0].
Eigen::MatrixXd linearized_matrix(int m, int nmax, const VortexParams& p);
// Reflection-symmetric subspace: unknowns [mu_n]_n ++ [Im nu_n]_n ++ [q],
// equations [Im K_n]_n ++ [Re B_n]_n ++ [B_0].
Eigen::MatrixXd linearized_matrix_even(int m, int nmax, const VortexParams& p);

// Scalar certifying that the crossing eigenvalue moves with Omega at the mode-1
// root: sensitivity of the kinematic row paired back through the pressure row,
// plus the dispersion-symbol derivative.  Equals -sign * 3 sqrt(m) gamma/2pi.
double transversality_pairing(int m, int sign, double gamma);
// the two pieces, separately testable
double kinematic_row_sensitivity(int m, int sign, double gamma);
// raw pairing of the range functional with the Omega-derivative of the frozen
// null direction's image; equals -sign * 2 sqrt(m) gamma / 2pi
double direct_pairing(int m, int sign, double gamma);

struct BranchOptions {
    int nmax = 0;           // lattice modes carried; 0 picks 32*m
    double tol = 1e-12;
    int max_iter = 50;
    double tail_rel = 1e-10;  // acceptance bound for the relative tail norm
    int cap = 0;              // product window during iterations; 0 = auto
};

struct BranchPoint {
    int m = 2;
    int sign = 1;
    double eps = 0.0;
    double gamma = 2.0 * pi;
    double omega = 0.0;
    MFoldState state;       // converged boundary state (q included)
    double residual_norm = 0.0;  // evaluated on a widened window after the solve
    double tail_norm = 0.0;      // top-quarter coefficient fraction
    bool tail_ok = true;
    int iterations = 0;
    bool converged = false;
};

// Third-order expansion of the m-fold branch about the circular solution,
// in the convention where eps is the leading boundary-map coefficient
// (so mu_1 = -eps).
struct BranchSeries {
    double mu1, mu2, mu3;     // real mu modes
    double beta1, beta2, beta3;  // Im nu modes
    double omega;
    double q;
};
BranchSeries branch_series(int m, int sign, double eps, double gamma);

// Newton continuation of the m-fold branch to amplitude eps, seeded with the
// third-order expansion, constrained by c_{1-m}(mu) = -eps.
BranchPoint continue_branch(int m, int sign, double eps, double gamma,
                            const BranchOptions& opt = {});

void to_json(nlohmann::json& j, const BranchPoint& b);

enum class PitchforkType { supercritical, subcritical, degenerate };

struct PitchforkResult {
    PitchforkType type = PitchforkType::degenerate;
    double omega0 = 0.0;
    double delta_omega = 0.0;  // measured Omega shift at the probe amplitude
    double probe_eps = 0.0;
};

// Classifies the branch by the sign of the measured Omega shift at a small
// probe amplitude; |shift| below 10x the Newton tolerance counts as degenerate
// (the quartic-order case).
PitchforkResult pitchfork_direction(int m, int sign, double gamma, double probe_eps = 2e-4,
                                    const BranchOptions& opt = {});

struct RigidityOptions {
    int nmax = 24;
    double tol = 1e-12;
    int max_iter = 50;
    int cap = 0;
};

struct RigidityReport {
    double min_dispersion = 0.0;  // min |dispersion symbol| over carried modes
    int argmin_n = 1;
    bool newton_converged = false;
    int iterations = 0;
    double final_state_norm = 0.0;  // coefficient distance from the circular solution
    MFoldState state;
};

// Fixed-Omega Newton over the full (not reflection-symmetric) mode space from
// the given start; for a collapsing frame the symbol never vanishes and the
// iteration falls back onto the circular solution.
RigidityReport rigidity_check(const MFoldState& start, const VortexParams& p,
                              const RigidityOptions& opt = {});

// Reference data for the exactly-known branch whose boundary map is a
// rational function of zeta^m.
struct HStateReference {
    double omega = 0.0;  // third-order value
    double q = 0.0;
    std::vector<double> f_series;  // map coefficients, orders eps..eps^3
    std::vector<double> w_series;  // potential coefficients over gamma/(2 pi i)
    std::vector<double> f_exact;   // Laurent coefficients of the closed-form map
};
HStateReference hstate_reference(int m, double eps, double gamma, int kmax = 8);

enum class CriticalLayerFamily { branch_minus, hstate, vstate };
// small-amplitude limit of the squared corotation radius in the disk chart
double critical_layer_radius2(CriticalLayerFamily fam, int m);

// angular velocity of the flow about the origin at chart point zeta
double angular_velocity(const MFoldState& s, const VortexParams& p, cx zeta);
// chart radius along the ray arg = theta where the angular velocity changes
// sign, if any
std::optional<double> angular_zero_radius(const MFoldState& s, const VortexParams& p,
                                          double theta, double rmax = 8.0);

// contour integral of the potential derivative around the boundary
cx circulation(const MFoldState& s, const VortexParams& p, int nodes = 2048);

}  // namespace hv
