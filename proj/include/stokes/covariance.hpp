#ifndef STOKES_COVARIANCE_HPP
#define STOKES_COVARIANCE_HPP

#include <Eigen/Dense>

#include "stokes/trace.hpp"

namespace stokes {

// Symmetric 2x2 covariance matrix [[xx, xp], [xp, pp]] in shot-noise units
// (vacuum variance = 1).
struct Cov2 {
    double xx = 1.0;
    double xp = 0.0;
    double pp = 1.0;

    Eigen::Matrix2d matrix() const {
        Eigen::Matrix2d m;
        m << xx, xp, xp, pp;
        return m;
    }
    static Cov2 from_matrix(const Eigen::Matrix2d& m) {
        return {m(0, 0), 0.5 * (m(0, 1) + m(1, 0)), m(1, 1)};
    }
    static Cov2 identity() { return {1.0, 0.0, 1.0}; }
    double det() const { return xx * pp - xp * xp; }
    double trace() const { return xx + pp; }
    // variance of the quadrature at angle theta' measured from the base axis
    double variance_at(double theta) const;
};

// Symmetric 4x4 covariance matrix in mode order (X_a, P_a, X_b, P_b).
struct Cov4 {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();

    Cov2 alpha() const { return Cov2::from_matrix(m.block<2, 2>(0, 0)); }
    Cov2 beta() const { return Cov2::from_matrix(m.block<2, 2>(2, 2)); }
    Eigen::Matrix2d gamma() const { return m.block<2, 2>(0, 2); }
    static Cov4 identity() { return {}; }
};

// The four normalized variances needed for one Cov2 (offsets -pi/4, 0,
// +pi/4, +pi/2 from the base angle), with per-entry stderr for the
// sum-rule data-quality gate.
struct AngleQuartet {
    double m45 = 1.0, z0 = 1.0, p45 = 1.0, p90 = 1.0;
    double m45_err = 0.0, z0_err = 0.0, p45_err = 0.0, p90_err = 0.0;
};

struct NoiseEllipse {
    double var_min = 1.0;
    double var_max = 1.0;
    double theta_min = 0.0; // [rad], in [-pi/2, pi/2); min-variance axis
    bool isotropic = false; // |xx-pp| and |xp| both below 1e-12
};

// Cov2 from the quartet: xx = var(theta), pp = var(theta+pi/2),
// xp = [var(theta+pi/4) - var(theta-pi/4)] / 2.
Cov2 single_mode_cov(const AngleQuartet& q);

// Covariance in the frame whose base quadrature angle is shifted by +phi.
Cov2 rotate_cov(const Cov2& cov, double phi);

NoiseEllipse noise_ellipse(const Cov2& cov);

// var(+pi/4) + var(-pi/4) - var(0) - var(pi/2); zero for exact model data.
double quartet_sum_rule_residual(const AngleQuartet& q);
// combined stderr of the residual; residual beyond 3x flags the quartet
double quartet_sum_rule_stderr(const AngleQuartet& q);
bool quartet_consistent(const AngleQuartet& q, double n_sigma = 3.0);

// Assemble blocks alpha, beta and the cross block gamma (placed as mutual
// transposes in the off-diagonal positions); output is exactly symmetric.
Cov4 two_mode_cov(const Cov2& cov_a, const Cov2& cov_b, const Eigen::Matrix2d& cross);

} // namespace stokes

#endif
