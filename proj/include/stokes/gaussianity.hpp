#ifndef STOKES_GAUSSIANITY_HPP
#define STOKES_GAUSSIANITY_HPP

#include <cstddef>
#include <vector>

namespace stokes {

struct Histogram {
    std::vector<double> bin_edges; // strictly increasing, size counts+1
    std::vector<std::size_t> counts;
    std::vector<double> density; // counts normalized to unit area
    bool degenerate = false;     // all samples identical (epsilon-width bin)

    std::vector<double> bin_centers() const;
};

// Normalized moments <x^p> / [<x^2>^(p/2) (p-1)!!] - eps_p with eps_p = 1 for
// even p and 0 for odd p; zero for a perfect Gaussian at every order.
struct MomentReport {
    std::vector<int> orders; // 1..p_max
    std::vector<double> normalized;
    std::vector<double> stderr_;
};

struct GaussianityVerdict {
    bool pass = false;
    std::vector<int> flagged_orders;
};

Histogram histogram(const std::vector<double>& samples, std::size_t n_bins);

// Gaussian density with the given variance/mean evaluated at xs.
std::vector<double> gaussian_reference(double variance, double mean,
                                       const std::vector<double>& xs);

double double_factorial(int n);

// stderr via block partition (replicate traces are the natural blocks).
MomentReport normalized_moments(const std::vector<double>& samples, int p_max,
                                std::size_t n_blocks = 10);

// Pass iff |even moment| <= even_tol and |odd moment| <= odd_sigma * stderr.
GaussianityVerdict gaussianity_verdict(const MomentReport& report,
                                       double even_tol = 0.08,
                                       double odd_sigma = 3.0);

} // namespace stokes

#endif
