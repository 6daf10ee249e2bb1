#include "stokes/covariance.hpp"

#include <cmath>
#include <stdexcept>

namespace stokes {

double Cov2::variance_at(double theta) const {
    double c = std::cos(theta), s = std::sin(theta);
    return xx * c * c + 2.0 * xp * c * s + pp * s * s;
}

Cov2 single_mode_cov(const AngleQuartet& q) {
    if (!(q.m45 > 0.0) || !(q.z0 > 0.0) || !(q.p45 > 0.0) || !(q.p90 > 0.0))
        throw std::domain_error("single_mode_cov: variances must be > 0");
    Cov2 cov;
    cov.xx = q.z0;
    cov.pp = q.p90;
    cov.xp = 0.5 * (q.p45 - q.m45);
    return cov;
}

// R(phi) = [[cos, sin], [-sin, cos]]: the rotated xx entry is the variance of
// the quadrature at base angle + phi.
Cov2 rotate_cov(const Cov2& cov, double phi) {
    double c = std::cos(phi), s = std::sin(phi);
    Eigen::Matrix2d r;
    r << c, s, -s, c;
    Eigen::Matrix2d out = r * cov.matrix() * r.transpose();
    return Cov2::from_matrix(out);
}

NoiseEllipse noise_ellipse(const Cov2& cov) {
    NoiseEllipse e;
    const double mean = 0.5 * (cov.xx + cov.pp);
    const double half_diff = 0.5 * (cov.xx - cov.pp);
    const double rad = std::hypot(half_diff, cov.xp);
    e.var_min = mean - rad;
    e.var_max = mean + rad;
    if (std::fabs(cov.xx - cov.pp) < 1e-12 && std::fabs(cov.xp) < 1e-12) {
        e.isotropic = true;
        e.theta_min = 0.0;
        return e;
    }
    // var(theta) = mean + half_diff*cos(2 theta) + xp*sin(2 theta)
    double t = 0.5 * std::atan2(-cov.xp, -half_diff);
    if (t >= M_PI / 2) t -= M_PI;
    if (t < -M_PI / 2) t += M_PI;
    e.theta_min = t;
    return e;
}

double quartet_sum_rule_residual(const AngleQuartet& q) {
    return q.p45 + q.m45 - q.z0 - q.p90;
}

double quartet_sum_rule_stderr(const AngleQuartet& q) {
    return std::sqrt(q.m45_err * q.m45_err + q.z0_err * q.z0_err +
                     q.p45_err * q.p45_err + q.p90_err * q.p90_err);
}

bool quartet_consistent(const AngleQuartet& q, double n_sigma) {
    double err = quartet_sum_rule_stderr(q);
    if (err == 0.0) return std::fabs(quartet_sum_rule_residual(q)) < 1e-9;
    return std::fabs(quartet_sum_rule_residual(q)) <= n_sigma * err;
}

Cov4 two_mode_cov(const Cov2& cov_a, const Cov2& cov_b, const Eigen::Matrix2d& cross) {
    Cov4 out;
    out.m.block<2, 2>(0, 0) = cov_a.matrix();
    out.m.block<2, 2>(2, 2) = cov_b.matrix();
    out.m.block<2, 2>(0, 2) = cross;
    out.m.block<2, 2>(2, 0) = cross.transpose();
    return out;
}

} // namespace stokes
