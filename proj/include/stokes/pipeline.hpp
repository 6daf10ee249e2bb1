#ifndef STOKES_PIPELINE_HPP
#define STOKES_PIPELINE_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "stokes/covariance.hpp"
#include "stokes/filter.hpp"
#include "stokes/gaussianity.hpp"
#include "stokes/symplectic.hpp"
#include "stokes/trace.hpp"

namespace stokes {

constexpr int kSchemaVersion = 1;

struct AnalysisOptions {
    BandSpec band;
    std::optional<std::vector<Trace>> dark; // filtered dark variance subtracted
    int jobs = 1;
    DiscordOptions discord;
};

struct SinglePointResult {
    double detuning = 0.0;
    bool failed = false;
    std::string failure;
    AngleQuartet quartet;
    double removed_offset = 0.0; // mean detector offset before filtering
    Cov2 cov;
    NoiseEllipse ellipse;
    bool theta_undefined = false; // ellipse axes within noise of each other
    bool sum_rule_ok = true;
    GaussianityVerdict gaussianity;
};

struct PairPointResult {
    double detuning = 0.0;
    bool failed = false;
    std::string failure;
    AngleQuartet quartet_a, quartet_b;
    Cov4 cov;
    bool discarded = false; // physicality gate (nu- < 1)
    std::string discard_reason;
    SymplecticReport report;
};

SinglePointResult analyze_single_point(const SweepPoint& point, double dt,
                                       const AnalysisOptions& opts);
PairPointResult analyze_pair_point(const SweepPoint& point, double dt,
                                   const AnalysisOptions& opts);

// Parallel map over sweep points with index-ordered collection; output is
// independent of the jobs setting.
std::vector<SinglePointResult> analyze_single_sweep(const SweepDataset& ds,
                                                    const AnalysisOptions& opts);
std::vector<PairPointResult> analyze_pair_sweep(const SweepDataset& ds,
                                                const AnalysisOptions& opts);

// CSV: detuning_ghz,var_min,var_max,theta_min_rad. JSON carries full detail.
void write_single_results(const std::vector<SinglePointResult>& results,
                          const std::filesystem::path& out_prefix);
// CSV: detuning_ghz,mpte,log_negativity,discord_b,consistent.
void write_pair_results(const std::vector<PairPointResult>& results,
                        const std::filesystem::path& out_prefix);

std::string format_double(double v); // full-precision, '.' decimal

} // namespace stokes

#endif
