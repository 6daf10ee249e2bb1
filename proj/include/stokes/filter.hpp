#ifndef STOKES_FILTER_HPP
#define STOKES_FILTER_HPP

#include <vector>

#include "stokes/trace.hpp"

namespace stokes {

// Pass band [omega - delta/2, omega + delta/2] applied to |frequency|.
struct BandSpec {
    double omega = 0.0; // center frequency [Hz]
    double delta = 0.0; // bandwidth [Hz]

    double lo() const { return omega - delta / 2.0; }
    double hi() const { return omega + delta / 2.0; }
    // valid for a given Nyquist frequency: 0 < lo, hi < Nyquist
    void validate(double nyquist) const;
    // fraction of spectral bins retained for an N-point trace with step dt
    double kept_fraction(std::size_t n, double dt) const;
};

struct VarianceEstimate {
    double value = 0.0;  // same squared units as the input samples
    double stderr_ = 0.0;
    std::size_t n_effective = 0;
};

// Zero every Fourier bin whose |frequency| falls outside the band (closed
// interval), transform back. Output has the input's length and dt; the
// imaginary residue of the inverse transform is checked against 1e-9 of the
// signal norm before being discarded.
Trace bandpass(const Trace& trace, const BandSpec& band);
TraceSet bandpass(const TraceSet& set, const BandSpec& band);
std::vector<Trace> bandpass(const std::vector<Trace>& traces, const BandSpec& band);

// Pooled population variance around the pooled mean across replicates;
// stderr from the replicate-to-replicate scatter of per-trace variances.
VarianceEstimate variance(const std::vector<Trace>& traces);

// Cross covariance via the sum/difference identity:
// [var(sum) - var(diff)] / 4. May be negative.
VarianceEstimate cross_variance(const std::vector<Trace>& sum_traces,
                                const std::vector<Trace>& diff_traces);

// Band-filtered variance of the shot traces scaled by intensity_scale; the
// |alpha|^2 reference used for normalization.
VarianceEstimate shot_noise_level(const ShotNoiseRecord& shot, const BandSpec& band);

// raw / shot in shot-noise units (vacuum = 1).
double normalized_variance(const VarianceEstimate& raw, const VarianceEstimate& shot);
// same, with stderr combined in quadrature from the two relative errors
VarianceEstimate normalized_variance_estimate(const VarianceEstimate& raw,
                                              const VarianceEstimate& shot);

} // namespace stokes

#endif
