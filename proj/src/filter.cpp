#include "stokes/filter.hpp"

#include <cmath>
#include <complex>
#include <mutex>

#include <fftw3.h>

namespace stokes {

void BandSpec::validate(double nyquist) const {
    if (!(delta > 0.0) || !(lo() > 0.0) || !(hi() < nyquist))
        throw std::domain_error("band [" + std::to_string(lo()) + ", " +
                                std::to_string(hi()) +
                                "] Hz invalid for Nyquist " +
                                std::to_string(nyquist) + " Hz");
}

namespace {

// FFTW plan creation is not thread-safe; execution of a private plan is.
std::mutex g_fftw_plan_mutex;

bool bin_in_band(std::size_t k, std::size_t n, double dt, const BandSpec& band) {
    // frequency of bin k, folded to the absolute value
    std::size_t kk = (k <= n / 2) ? k : n - k;
    double f = static_cast<double>(kk) / (static_cast<double>(n) * dt);
    // closed interval; edge bins retained with a relative guard
    return f >= band.lo() * (1.0 - 1e-12) && f <= band.hi() * (1.0 + 1e-12);
}

} // namespace

double BandSpec::kept_fraction(std::size_t n, double dt) const {
    std::size_t kept = 0;
    for (std::size_t k = 0; k < n; ++k)
        if (bin_in_band(k, n, dt, *this)) ++kept;
    return static_cast<double>(kept) / static_cast<double>(n);
}

Trace bandpass(const Trace& trace, const BandSpec& band) {
    trace.validate();
    band.validate(trace.nyquist());
    const std::size_t n = trace.samples.size();

    std::vector<std::complex<double>> buf(n), spec(n);
    for (std::size_t i = 0; i < n; ++i) buf[i] = trace.samples[i];

    fftw_plan fwd, bwd;
    {
        std::lock_guard<std::mutex> lock(g_fftw_plan_mutex);
        fwd = fftw_plan_dft_1d(static_cast<int>(n),
                               reinterpret_cast<fftw_complex*>(buf.data()),
                               reinterpret_cast<fftw_complex*>(spec.data()),
                               FFTW_FORWARD, FFTW_ESTIMATE);
        bwd = fftw_plan_dft_1d(static_cast<int>(n),
                               reinterpret_cast<fftw_complex*>(spec.data()),
                               reinterpret_cast<fftw_complex*>(buf.data()),
                               FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    fftw_execute(fwd);

    for (std::size_t k = 0; k < n; ++k)
        if (!bin_in_band(k, n, trace.dt, band)) spec[k] = 0.0;

    fftw_execute(bwd);
    {
        std::lock_guard<std::mutex> lock(g_fftw_plan_mutex);
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(bwd);
    }

    double norm2 = 0.0, imag2 = 0.0;
    Trace out;
    out.samples.resize(n);
    const double scale = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        double re = buf[i].real() * scale;
        double im = buf[i].imag() * scale;
        norm2 += re * re;
        imag2 += im * im;
        out.samples[i] = re;
    }
    if (norm2 > 0.0 && std::sqrt(imag2) > 1e-9 * std::sqrt(norm2))
        throw std::runtime_error("bandpass: imaginary residue exceeds 1e-9 of signal norm");
    out.dt = trace.dt;
    out.label = trace.label;
    return out;
}

TraceSet bandpass(const TraceSet& set, const BandSpec& band) {
    TraceSet out;
    out.theta = set.theta;
    out.traces.reserve(set.traces.size());
    for (const Trace& t : set.traces) out.traces.push_back(bandpass(t, band));
    return out;
}

std::vector<Trace> bandpass(const std::vector<Trace>& traces, const BandSpec& band) {
    std::vector<Trace> out;
    out.reserve(traces.size());
    for (const Trace& t : traces) out.push_back(bandpass(t, band));
    return out;
}

VarianceEstimate variance(const std::vector<Trace>& traces) {
    if (traces.empty())
        throw std::domain_error("variance: empty trace list");

    double sum = 0.0;
    std::size_t n_total = 0;
    for (const Trace& t : traces) {
        for (double v : t.samples) sum += v;
        n_total += t.samples.size();
    }
    if (n_total == 0)
        throw std::domain_error("variance: no samples");
    const double mean = sum / static_cast<double>(n_total);

    // pooled population variance plus the per-trace values for the scatter
    double ss = 0.0;
    std::vector<double> per_trace;
    per_trace.reserve(traces.size());
    for (const Trace& t : traces) {
        double s = 0.0;
        for (double v : t.samples) {
            double d = v - mean;
            s += d * d;
        }
        ss += s;
        per_trace.push_back(s / static_cast<double>(t.samples.size()));
    }

    VarianceEstimate est;
    est.value = ss / static_cast<double>(n_total);
    est.n_effective = n_total;
    if (per_trace.size() > 1) {
        double m = 0.0;
        for (double v : per_trace) m += v;
        m /= static_cast<double>(per_trace.size());
        double sv = 0.0;
        for (double v : per_trace) sv += (v - m) * (v - m);
        sv /= static_cast<double>(per_trace.size() - 1);
        est.stderr_ = std::sqrt(sv / static_cast<double>(per_trace.size()));
    }
    return est;
}

VarianceEstimate cross_variance(const std::vector<Trace>& sum_traces,
                                const std::vector<Trace>& diff_traces) {
    VarianceEstimate vs = variance(sum_traces);
    VarianceEstimate vd = variance(diff_traces);
    VarianceEstimate est;
    est.value = (vs.value - vd.value) / 4.0;
    est.stderr_ = std::sqrt(vs.stderr_ * vs.stderr_ + vd.stderr_ * vd.stderr_) / 4.0;
    est.n_effective = std::min(vs.n_effective, vd.n_effective);
    return est;
}

VarianceEstimate shot_noise_level(const ShotNoiseRecord& shot, const BandSpec& band) {
    shot.validate();
    VarianceEstimate est = variance(bandpass(shot.traces, band));
    est.value *= shot.intensity_scale;
    est.stderr_ *= shot.intensity_scale;
    return est;
}

double normalized_variance(const VarianceEstimate& raw, const VarianceEstimate& shot) {
    if (!(shot.value > 0.0))
        throw std::domain_error("normalized_variance: shot level must be > 0");
    return raw.value / shot.value;
}

VarianceEstimate normalized_variance_estimate(const VarianceEstimate& raw,
                                              const VarianceEstimate& shot) {
    VarianceEstimate est;
    est.value = normalized_variance(raw, shot);
    double rel = 0.0;
    if (raw.value != 0.0) {
        double r1 = raw.stderr_ / std::fabs(raw.value);
        double r2 = shot.stderr_ / shot.value;
        rel = std::sqrt(r1 * r1 + r2 * r2);
    } else {
        rel = 0.0;
        est.stderr_ = raw.stderr_ / shot.value;
    }
    if (raw.value != 0.0) est.stderr_ = std::fabs(est.value) * rel;
    est.n_effective = std::min(raw.n_effective, shot.n_effective);
    return est;
}

} // namespace stokes
