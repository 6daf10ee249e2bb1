#include "stokes/gaussianity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace stokes {

std::vector<double> Histogram::bin_centers() const {
    std::vector<double> c(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i)
        c[i] = 0.5 * (bin_edges[i] + bin_edges[i + 1]);
    return c;
}

Histogram histogram(const std::vector<double>& samples, std::size_t n_bins) {
    if (samples.empty())
        throw std::domain_error("histogram: empty sample list");
    if (n_bins < 1)
        throw std::domain_error("histogram: n_bins must be >= 1");

    auto [mn_it, mx_it] = std::minmax_element(samples.begin(), samples.end());
    double mn = *mn_it, mx = *mx_it;

    Histogram h;
    if (mx - mn <= 0.0) {
        // all samples identical; epsilon-guarded single bin
        h.degenerate = true;
        double eps = std::max(std::fabs(mn), 1.0) * 1e-12;
        h.bin_edges = {mn - eps, mn + eps};
        h.counts = {samples.size()};
        h.density = {1.0 / (2.0 * eps)};
        return h;
    }

    const double width = (mx - mn) / static_cast<double>(n_bins);
    h.bin_edges.resize(n_bins + 1);
    for (std::size_t i = 0; i <= n_bins; ++i)
        h.bin_edges[i] = mn + width * static_cast<double>(i);
    h.bin_edges.back() = mx;

    h.counts.assign(n_bins, 0);
    for (double v : samples) {
        auto idx = static_cast<std::size_t>((v - mn) / width);
        if (idx >= n_bins) idx = n_bins - 1; // right edge inclusive
        ++h.counts[idx];
    }

    h.density.resize(n_bins);
    const double total = static_cast<double>(samples.size());
    for (std::size_t i = 0; i < n_bins; ++i)
        h.density[i] = static_cast<double>(h.counts[i]) / (total * width);
    return h;
}

std::vector<double> gaussian_reference(double variance, double mean,
                                       const std::vector<double>& xs) {
    if (!(variance > 0.0))
        throw std::domain_error("gaussian_reference: variance must be > 0");
    const double norm = 1.0 / std::sqrt(2.0 * M_PI * variance);
    std::vector<double> out(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double d = xs[i] - mean;
        out[i] = norm * std::exp(-0.5 * d * d / variance);
    }
    return out;
}

double double_factorial(int n) {
    double r = 1.0;
    for (int k = n; k > 1; k -= 2) r *= static_cast<double>(k);
    return r;
}

namespace {

// normalized moments of one block of samples
std::vector<double> block_moments(const double* data, std::size_t n, int p_max) {
    std::vector<double> raw(static_cast<std::size_t>(p_max) + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double x = data[i];
        double xp = 1.0;
        for (int p = 1; p <= p_max; ++p) {
            xp *= x;
            raw[static_cast<std::size_t>(p)] += xp;
        }
    }
    for (int p = 1; p <= p_max; ++p) raw[static_cast<std::size_t>(p)] /= static_cast<double>(n);

    double m2 = raw[2];
    if (!(m2 > 0.0))
        throw std::domain_error("normalized_moments: second moment is zero");

    std::vector<double> out(static_cast<std::size_t>(p_max));
    for (int p = 1; p <= p_max; ++p) {
        double eps = (p % 2 == 0) ? 1.0 : 0.0;
        double denom = std::pow(m2, static_cast<double>(p) / 2.0) * double_factorial(p - 1);
        out[static_cast<std::size_t>(p - 1)] = raw[static_cast<std::size_t>(p)] / denom - eps;
    }
    return out;
}

} // namespace

MomentReport normalized_moments(const std::vector<double>& samples, int p_max,
                                std::size_t n_blocks) {
    if (p_max < 2)
        throw std::domain_error("normalized_moments: p_max must be >= 2");
    if (samples.size() < 100)
        throw std::domain_error("normalized_moments: need at least 100 samples");
    if (n_blocks < 2) n_blocks = 2;
    if (n_blocks > samples.size() / 2) n_blocks = samples.size() / 2;

    MomentReport rep;
    rep.orders.resize(static_cast<std::size_t>(p_max));
    for (int p = 1; p <= p_max; ++p) rep.orders[static_cast<std::size_t>(p - 1)] = p;

    rep.normalized = block_moments(samples.data(), samples.size(), p_max);

    // block scatter for the stderr
    std::vector<std::vector<double>> blocks;
    const std::size_t block_len = samples.size() / n_blocks;
    for (std::size_t b = 0; b < n_blocks; ++b)
        blocks.push_back(block_moments(samples.data() + b * block_len, block_len, p_max));

    rep.stderr_.assign(static_cast<std::size_t>(p_max), 0.0);
    for (std::size_t i = 0; i < rep.stderr_.size(); ++i) {
        double m = 0.0;
        for (const auto& blk : blocks) m += blk[i];
        m /= static_cast<double>(n_blocks);
        double s = 0.0;
        for (const auto& blk : blocks) s += (blk[i] - m) * (blk[i] - m);
        s /= static_cast<double>(n_blocks - 1);
        rep.stderr_[i] = std::sqrt(s / static_cast<double>(n_blocks));
    }
    return rep;
}

GaussianityVerdict gaussianity_verdict(const MomentReport& report, double even_tol,
                                       double odd_sigma) {
    GaussianityVerdict v;
    v.pass = true;
    for (std::size_t i = 0; i < report.orders.size(); ++i) {
        int p = report.orders[i];
        double val = report.normalized[i];
        bool ok;
        if (p % 2 == 0)
            ok = std::fabs(val) <= even_tol;
        else
            ok = std::fabs(val) <= odd_sigma * report.stderr_[i];
        if (p == 2) ok = true; // identically zero by construction
        if (!ok) {
            v.pass = false;
            v.flagged_orders.push_back(p);
        }
    }
    return v;
}

} // namespace stokes
