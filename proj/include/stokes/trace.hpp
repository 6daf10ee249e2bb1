#ifndef STOKES_TRACE_HPP
#define STOKES_TRACE_HPP

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace stokes {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One balanced-detector record: uniformly sampled fluctuations of a single
// Stokes operator S_theta.
struct Trace {
    std::vector<double> samples; // detector-difference units, arbitrary
    double dt = 0.0;             // sample interval [s]
    std::string label;

    void validate() const;
    double nyquist() const { return 0.5 / dt; }
};

// Replicate traces recorded at one quadrature angle.
struct TraceSet {
    double theta = 0.0; // quadrature angle [rad], stored modulo 2*pi
    std::vector<Trace> traces;

    void validate() const; // uniform length and dt across replicates
    std::size_t n_traces() const { return traces.size(); }
    std::size_t n_samples() const { return traces.empty() ? 0 : traces[0].samples.size(); }
};

// Traces recorded with the polarizer inserted; intensity_scale corrects for
// the polarizer attenuation when referencing the shot-noise level.
struct ShotNoiseRecord {
    std::vector<Trace> traces;
    double intensity_scale = 1.0;

    void validate() const;
};

// Angle keys for the four-variance quartet: offsets -pi/4, 0, +pi/4, +pi/2
// relative to the base angle theta.
enum class AngleKey { m45, z0, p45, p90 };
const char* to_string(AngleKey k);

// Joint sum/difference channels for the cross-covariance block. The two
// letters name the quadrature measured on beam a and beam b (x = base angle,
// p = base + pi/2).
enum class PairKey { xx, xp, px, pp };
const char* to_string(PairKey k);

struct JointChannels {
    std::map<PairKey, TraceSet> sum;
    std::map<PairKey, TraceSet> diff;
};

struct SweepPoint {
    double detuning = 0.0; // [GHz] relative to the declared reference line
    std::map<AngleKey, TraceSet> beam_a;
    std::optional<std::map<AngleKey, TraceSet>> beam_b;
    std::optional<JointChannels> joint;
    ShotNoiseRecord shot_a;
    std::optional<ShotNoiseRecord> shot_b;

    void validate() const; // beam_b present iff shot_b present; keys complete
};

struct Manifest {
    double base_theta = 0.0; // [rad]
    double omega = 0.0;      // analysis center frequency [Hz]
    double bandwidth = 0.0;  // [Hz]
    double dt = 0.0;         // [s]
    std::string reference_line;
};

struct SweepDataset {
    Manifest manifest;
    std::vector<SweepPoint> points; // detunings strictly increasing
};

} // namespace stokes

#endif
