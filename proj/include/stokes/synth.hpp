#ifndef STOKES_SYNTH_HPP
#define STOKES_SYNTH_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "stokes/covariance.hpp"
#include "stokes/filter.hpp"
#include "stokes/trace.hpp"

namespace stokes {

enum class StateKind { vacuum, squeezed, tmsv, beamsplit_squeezed, custom };
const char* to_string(StateKind k);

struct StateSpec {
    StateKind kind = StateKind::vacuum;
    double r = 0.0;            // squeezing parameter
    double angle = 0.0;        // squeezing axis [rad]
    double transmission = 0.5; // beamsplitter transmission
    bool two_mode = false;     // vacuum/custom ambiguity resolution
    std::optional<Cov2> custom_cov2;
    std::optional<Cov4> custom_cov4;
    bool uniform_noise = false; // test-only non-Gaussian sampling

    bool is_two_mode() const;
    // ground-truth covariance; always passes consistency at tol 1e-9
    std::variant<Cov2, Cov4> covariance() const;
};

struct SynthRun {
    StateSpec state;
    std::size_t n_samples = 2500;
    std::size_t n_traces = 40;
    double dt = 1e-7;
    BandSpec band{3e6, 4e5};
    std::uint64_t seed = 1;
    double intensity_scale = 1.0; // polarizer attenuation exercised on shot records
};

// cov = rotate_cov(diag(e^-2r, e^+2r), -angle): the minimum-variance
// quadrature sits at the lab angle `angle` (noise_ellipse recovers it).
Cov2 squeezed_cov(double r, double angle);

// Two-mode squeezed vacuum: alpha = beta = cosh(2r) I, gamma = sinh(2r) diag(1,-1).
Cov4 tmsv_cov(double r);

// S (cov_a (+) cov_b) S^T with out_a = sqrt(t) a + sqrt(1-t) b,
// out_b = sqrt(1-t) a - sqrt(t) b on both quadratures.
Cov4 beamsplit(const Cov2& cov_a, const Cov2& cov_b, double transmission);

// Everything sample_traces produces for one sweep point.
struct SynthPoint {
    double detuning = 0.0;
    std::map<AngleKey, TraceSet> beam_a;
    std::optional<std::map<AngleKey, TraceSet>> beam_b;
    std::optional<JointChannels> joint;
    ShotNoiseRecord shot_a;
    std::optional<ShotNoiseRecord> shot_b;
    std::variant<Cov2, Cov4> truth_cov;
};

// White Gaussian streams Cholesky-colored by cov, band-pass filtered, then
// rescaled so a unit-variance channel keeps unit in-band variance. Derived
// angle channels and joint sum/diff channels come from the same base draws;
// a unit-variance shot record per beam is emitted alongside.
SynthPoint sample_traces(const SynthRun& run, std::uint64_t point_index = 0,
                         double detuning = 0.0);

// Writes manifest + CSVs + truth sidecar for a profile of (detuning, state);
// returns the manifest path.
std::filesystem::path synth_sweep(
    const std::vector<std::pair<double, StateSpec>>& profile,
    const SynthRun& run_template, const std::filesystem::path& out_dir);

} // namespace stokes

#endif
