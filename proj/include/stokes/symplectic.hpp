#ifndef STOKES_SYMPLECTIC_HPP
#define STOKES_SYMPLECTIC_HPP

#include <cstdint>
#include <utility>

#include "stokes/covariance.hpp"

namespace stokes {

// Determinants of the 2x2 blocks and of the full matrix; invariant under
// local symplectic transformations.
struct SymplecticInvariants {
    double A = 1.0; // det alpha
    double B = 1.0; // det beta
    double C = 0.0; // det gamma
    double D = 1.0; // det of the full 4x4 matrix
};

struct SymplecticReport {
    double nu_minus = 1.0, nu_plus = 1.0;
    double nu_tilde_minus = 1.0, nu_tilde_plus = 1.0;
    bool consistent = true;  // nu_minus >= 1 - tol
    bool entangled = false;  // nu_tilde_minus < 1 - tol
    double log_negativity = 0.0; // base 2
    double discord_b = 0.0;      // discord of a given measurements on b
};

SymplecticInvariants invariants(const Cov4& cov);

// Closed form nu+-^2 = (Delta +- sqrt(Delta^2 - 4D)) / 2, Delta = A + B + 2C,
// cross-checked against |eig(i Omega sigma)| to 1e-9 relative.
std::pair<double, double> symplectic_eigenvalues(const Cov4& cov);

// Same with Delta~ = A + B - 2C (partial transposition flips the sign of
// P_b), cross-checked by explicitly flipping P_b in the matrix.
std::pair<double, double> ppt_eigenvalues(const Cov4& cov);

// nu_minus >= 1 - tol (Heisenberg physicality).
bool consistency_check(const Cov4& cov, double tol = 1e-6);

// -sum log2(nu~_k) over nu~_k < 1, else 0.
double log_negativity(std::pair<double, double> ppt);

// Entropic function f(x) = ((x+1)/2) log2((x+1)/2) - ((x-1)/2) log2((x-1)/2),
// f(1) = 0; x below 1 is clamped.
double entropy_f(double x);

struct DiscordOptions {
    double tol = 1e-6;          // refinement tolerance on the objective
    std::uint64_t grid_seed = 0; // deterministic jitter of the coarse grid
};

// Minimum over single-mode Gaussian measurements on b of det of the
// conditional a-mode covariance eps = alpha - gamma (beta + sigma_m)^-1 gamma^T
// with sigma_m = R(phi) diag(lambda, 1/lambda) R(phi)^T.
double discord_measurement_minimum(const Cov4& cov, const DiscordOptions& opts = {});

// D(a|b) = f(sqrt B) - f(nu-) - f(nu+) + f(sqrt E_min), E_min from the
// measurement minimization. swap = true computes D(b|a).
double gaussian_discord(const Cov4& cov, const DiscordOptions& opts = {},
                        bool swap = false);

// Closed-form fast path from the invariants; must agree with the search
// to 1e-4 on consistent inputs.
double gaussian_discord_closed_form(const Cov4& cov, bool swap = false);

// Full report with the default tolerances.
SymplecticReport analyze(const Cov4& cov, double tol = 1e-6);

// The 4x4 symplectic form Omega = J (+) J, J = [[0,1],[-1,0]].
Eigen::Matrix4d symplectic_form();

// Independent route: absolute values of the eigenvalues of i*Omega*sigma,
// returned as (nu_minus, nu_plus).
std::pair<double, double> symplectic_eigenvalues_generic(const Eigen::Matrix4d& sigma);

} // namespace stokes

#endif
