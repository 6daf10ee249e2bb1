// Command-line front end: dataset analysis, gaussianity screening and
// synthetic dataset generation.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "stokes/pipeline.hpp"
#include "stokes/synth.hpp"
#include "stokes/trace_io.hpp"

namespace fs = std::filesystem;
using namespace stokes;

namespace {

struct CommonFlags {
    std::string manifest;
    double omega = 0.0;     // 0 = take from manifest
    double bandwidth = 0.0; // 0 = take from manifest
    std::string out;
    int jobs = static_cast<int>(std::thread::hardware_concurrency());
    std::string dark;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--manifest", f.manifest, "Sweep manifest (JSON)")->required();
    cmd->add_option("--omega-hz", f.omega, "Filter center frequency [Hz] (default: manifest)");
    cmd->add_option("--bandwidth-hz", f.bandwidth, "Filter bandwidth [Hz] (default: manifest)");
    cmd->add_option("--out", f.out, "Output path prefix")->required();
    cmd->add_option("--jobs", f.jobs, "Parallel workers over sweep points");
    cmd->add_option("--dark", f.dark, "Dark (electronic noise) trace CSV to subtract");
}

AnalysisOptions make_options(const CommonFlags& f, const SweepDataset& ds) {
    AnalysisOptions opts;
    opts.band.omega = f.omega > 0.0 ? f.omega : ds.manifest.omega;
    opts.band.delta = f.bandwidth > 0.0 ? f.bandwidth : ds.manifest.bandwidth;
    opts.jobs = std::max(f.jobs, 1);
    if (!f.dark.empty())
        opts.dark = load_trace_file(f.dark, ds.manifest.dt).traces;
    return opts;
}

int run_analyze_single(const CommonFlags& f) {
    SweepDataset ds = load_manifest(f.manifest);
    if (ds.points.empty()) {
        std::cerr << "error: manifest has no sweep points\n";
        return 2;
    }
    AnalysisOptions opts = make_options(f, ds);
    auto results = analyze_single_sweep(ds, opts);
    write_single_results(results, f.out);
    std::size_t failed = 0;
    for (const auto& r : results)
        if (r.failed) ++failed;
    std::cout << "analyze-single: " << results.size() << " points, " << failed
              << " failed -> " << f.out << ".csv\n";
    return 0;
}

int run_analyze_pair(const CommonFlags& f) {
    SweepDataset ds = load_manifest(f.manifest);
    if (ds.points.empty()) {
        std::cerr << "error: manifest has no sweep points\n";
        return 2;
    }
    AnalysisOptions opts = make_options(f, ds);
    auto results = analyze_pair_sweep(ds, opts);
    write_pair_results(results, f.out);
    std::size_t failed = 0, discarded = 0;
    for (const auto& r : results) {
        if (r.failed) ++failed;
        if (r.discarded) ++discarded;
    }
    std::cout << "analyze-pair: " << results.size() << " points, " << discarded
              << " discarded, " << failed << " failed -> " << f.out << ".csv\n";
    return 0;
}

int run_gaussianity(const std::string& trace_file, double dt, double omega,
                    double bandwidth, std::size_t bins, int pmax,
                    const std::string& out) {
    TraceSet set = load_trace_file(trace_file, dt);
    BandSpec band{omega, bandwidth};
    TraceSet filtered = bandpass(set, band);

    std::vector<double> samples;
    for (const Trace& t : filtered.traces)
        samples.insert(samples.end(), t.samples.begin(), t.samples.end());

    Histogram h = histogram(samples, bins);
    double var = 0.0, mean = 0.0;
    for (double v : samples) mean += v;
    mean /= static_cast<double>(samples.size());
    for (double v : samples) var += (v - mean) * (v - mean);
    var /= static_cast<double>(samples.size());
    std::vector<double> centers = h.bin_centers();
    std::vector<double> ref = gaussian_reference(var, mean, centers);

    std::ofstream hist_out(out + "_hist.csv");
    hist_out << "bin_center,density,gauss_ref\n";
    for (std::size_t i = 0; i < centers.size(); ++i)
        hist_out << format_double(centers[i]) << "," << format_double(h.density[i])
                 << "," << format_double(ref[i]) << "\n";

    std::size_t blocks = std::max<std::size_t>(set.n_traces(), 10);
    MomentReport rep = normalized_moments(samples, pmax, blocks);
    std::ofstream mom_out(out + "_moments.csv");
    mom_out << "order,value,stderr\n";
    for (std::size_t i = 0; i < rep.orders.size(); ++i)
        mom_out << rep.orders[i] << "," << format_double(rep.normalized[i]) << ","
                << format_double(rep.stderr_[i]) << "\n";

    GaussianityVerdict v = gaussianity_verdict(rep);
    std::cout << "gaussianity: " << (v.pass ? "PASS" : "FAIL");
    if (!v.pass) {
        std::cout << " (orders";
        for (int p : v.flagged_orders) std::cout << " " << p;
        std::cout << ")";
    }
    std::cout << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gaussian-state analysis of Stokes-operator time traces"};
    app.require_subcommand(1);

    CommonFlags single_flags, pair_flags;
    CLI::App* c_single = app.add_subcommand(
        "analyze-single", "Single-mode sweep: covariance + noise ellipse per point");
    add_common(c_single, single_flags);
    CLI::App* c_pair = app.add_subcommand(
        "analyze-pair", "Two-mode sweep: Cov4, entanglement and discord per point");
    add_common(c_pair, pair_flags);

    std::string g_trace, g_out;
    double g_dt = 1e-7, g_omega = 3e6, g_bandwidth = 4e5;
    std::size_t g_bins = 50;
    int g_pmax = 6;
    CLI::App* c_gauss = app.add_subcommand(
        "gaussianity", "Histogram + normalized-moment Gaussianity screen");
    c_gauss->add_option("--trace", g_trace, "Trace CSV file")->required();
    c_gauss->add_option("--dt-s", g_dt, "Sample interval [s]")->required();
    c_gauss->add_option("--omega-hz", g_omega, "Filter center frequency [Hz]");
    c_gauss->add_option("--bandwidth-hz", g_bandwidth, "Filter bandwidth [Hz]");
    c_gauss->add_option("--bins", g_bins, "Histogram bin count");
    c_gauss->add_option("--pmax", g_pmax, "Highest moment order");
    c_gauss->add_option("--out", g_out, "Output path prefix")->required();

    std::string s_state = "vacuum", s_out, s_noise = "gaussian", s_detunings = "0";
    double s_r = 0.0, s_angle = 0.0, s_t = 0.5, s_dt = 1e-7, s_omega = 3e6,
           s_bandwidth = 4e5, s_scale = 1.0;
    std::size_t s_samples = 2500, s_traces = 40;
    std::uint64_t s_seed = 1;
    CLI::App* c_synth = app.add_subcommand(
        "synth", "Generate a synthetic dataset with a ground-truth sidecar");
    c_synth->add_option("--state", s_state, "vacuum|squeezed|tmsv|beamsplit")
        ->check(CLI::IsMember({"vacuum", "squeezed", "tmsv", "beamsplit"}));
    c_synth->add_option("--r", s_r, "Squeezing parameter");
    c_synth->add_option("--angle-rad", s_angle, "Squeezing axis [rad]");
    c_synth->add_option("--t", s_t, "Beamsplitter transmission");
    c_synth->add_option("--n-samples", s_samples, "Samples per trace");
    c_synth->add_option("--n-traces", s_traces, "Replicate traces per channel");
    c_synth->add_option("--dt-s", s_dt, "Sample interval [s]");
    c_synth->add_option("--omega-hz", s_omega, "Band center [Hz]");
    c_synth->add_option("--bandwidth-hz", s_bandwidth, "Band width [Hz]");
    c_synth->add_option("--seed", s_seed, "RNG seed");
    c_synth->add_option("--intensity-scale", s_scale, "Shot-record attenuation correction");
    c_synth->add_option("--noise", s_noise, "gaussian|uniform (uniform is test-only)")
        ->check(CLI::IsMember({"gaussian", "uniform"}));
    c_synth->add_option("--detunings-ghz", s_detunings,
                        "Comma-separated detunings, one sweep point each");
    c_synth->add_option("--out", s_out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (c_single->parsed()) return run_analyze_single(single_flags);
        if (c_pair->parsed()) return run_analyze_pair(pair_flags);
        if (c_gauss->parsed()) {
            if (g_bins < 1 || g_pmax < 2) {
                std::cerr << "error: --bins must be >= 1 and --pmax >= 2\n";
                return 2;
            }
            return run_gaussianity(g_trace, g_dt, g_omega, g_bandwidth, g_bins, g_pmax,
                                   g_out);
        }
        if (c_synth->parsed()) {
            StateSpec state;
            if (s_state == "vacuum") state.kind = StateKind::vacuum;
            else if (s_state == "squeezed") state.kind = StateKind::squeezed;
            else if (s_state == "tmsv") state.kind = StateKind::tmsv;
            else state.kind = StateKind::beamsplit_squeezed;
            state.r = s_r;
            state.angle = s_angle;
            state.transmission = s_t;
            state.uniform_noise = (s_noise == "uniform");

            std::vector<std::pair<double, StateSpec>> profile;
            std::stringstream ss(s_detunings);
            std::string tok;
            while (std::getline(ss, tok, ','))
                profile.emplace_back(std::stod(tok), state);
            if (profile.empty()) {
                std::cerr << "error: --detunings-ghz is empty\n";
                return 2;
            }

            SynthRun run;
            run.state = state;
            run.n_samples = s_samples;
            run.n_traces = s_traces;
            run.dt = s_dt;
            run.band = BandSpec{s_omega, s_bandwidth};
            run.seed = s_seed;
            run.intensity_scale = s_scale;
            fs::path manifest = synth_sweep(profile, run, s_out);
            std::cout << "synth: wrote " << manifest.string() << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
