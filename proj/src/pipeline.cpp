#include "stokes/pipeline.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <thread>

#include <nlohmann/json.hpp>

namespace stokes {

using nlohmann::json;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

struct BeamStats {
    AngleQuartet quartet;
    double removed_offset = 0.0;
    VarianceEstimate shot;
    std::vector<double> base_angle_samples; // filtered z0 samples for gaussianity
};

double mean_of(const std::vector<Trace>& traces) {
    double s = 0.0;
    std::size_t n = 0;
    for (const Trace& t : traces) {
        for (double v : t.samples) s += v;
        n += t.samples.size();
    }
    return n ? s / static_cast<double>(n) : 0.0;
}

// filtered variance of the optional dark record; subtracted from raw and
// shot variances when provided
double dark_level(const AnalysisOptions& opts) {
    if (!opts.dark) return 0.0;
    return variance(bandpass(*opts.dark, opts.band)).value;
}

VarianceEstimate filtered_variance(const std::vector<Trace>& traces,
                                   const AnalysisOptions& opts, double dark) {
    VarianceEstimate est = variance(bandpass(traces, opts.band));
    est.value = std::max(est.value - dark, 0.0);
    return est;
}

BeamStats beam_stats(const std::map<AngleKey, TraceSet>& beam,
                     const ShotNoiseRecord& shot_rec, const AnalysisOptions& opts,
                     double dark, bool keep_samples) {
    BeamStats bs;
    bs.shot = shot_noise_level(shot_rec, opts.band);
    bs.shot.value = std::max(bs.shot.value - dark * shot_rec.intensity_scale, 0.0);
    if (!(bs.shot.value > 0.0))
        throw std::domain_error("analysis: shot-noise level is not positive");

    double offset_sum = 0.0;
    auto one = [&](AngleKey key, double& value, double& err) {
        const TraceSet& set = beam.at(key);
        offset_sum += mean_of(set.traces);
        std::vector<Trace> filtered = bandpass(set.traces, opts.band);
        VarianceEstimate raw = variance(filtered);
        raw.value = std::max(raw.value - dark, 0.0);
        VarianceEstimate norm = normalized_variance_estimate(raw, bs.shot);
        value = norm.value;
        err = norm.stderr_;
        if (keep_samples && key == AngleKey::z0) {
            for (const Trace& t : filtered)
                bs.base_angle_samples.insert(bs.base_angle_samples.end(),
                                             t.samples.begin(), t.samples.end());
        }
    };
    one(AngleKey::m45, bs.quartet.m45, bs.quartet.m45_err);
    one(AngleKey::z0, bs.quartet.z0, bs.quartet.z0_err);
    one(AngleKey::p45, bs.quartet.p45, bs.quartet.p45_err);
    one(AngleKey::p90, bs.quartet.p90, bs.quartet.p90_err);
    bs.removed_offset = offset_sum / 4.0;
    return bs;
}

double max_quartet_err(const AngleQuartet& q) {
    return std::max(std::max(q.m45_err, q.z0_err), std::max(q.p45_err, q.p90_err));
}

} // namespace

SinglePointResult analyze_single_point(const SweepPoint& point, double dt,
                                       const AnalysisOptions& opts) {
    SinglePointResult res;
    res.detuning = point.detuning;
    try {
        point.validate();
        const double dark = dark_level(opts);
        BeamStats bs = beam_stats(point.beam_a, point.shot_a, opts, dark, true);
        res.quartet = bs.quartet;
        res.removed_offset = bs.removed_offset;
        res.cov = single_mode_cov(bs.quartet);
        res.ellipse = noise_ellipse(res.cov);
        res.sum_rule_ok = quartet_consistent(bs.quartet);
        res.theta_undefined =
            res.ellipse.isotropic ||
            (res.ellipse.var_max - res.ellipse.var_min) <= 3.0 * max_quartet_err(bs.quartet);
        if (bs.base_angle_samples.size() >= 100) {
            std::size_t blocks = std::max<std::size_t>(point.beam_a.at(AngleKey::z0).n_traces(), 10);
            res.gaussianity = gaussianity_verdict(
                normalized_moments(bs.base_angle_samples, 6, blocks));
        }
    } catch (const std::exception& e) {
        res.failed = true;
        res.failure = e.what();
    }
    (void)dt;
    return res;
}

PairPointResult analyze_pair_point(const SweepPoint& point, double dt,
                                   const AnalysisOptions& opts) {
    PairPointResult res;
    res.detuning = point.detuning;
    try {
        point.validate();
        if (!point.beam_b || !point.joint || !point.shot_b)
            throw ValidationError("pair analysis: beam_b, shot_b and joint channels required");
        const double dark = dark_level(opts);
        BeamStats ba = beam_stats(point.beam_a, point.shot_a, opts, dark, false);
        BeamStats bb = beam_stats(*point.beam_b, *point.shot_b, opts, dark, false);
        res.quartet_a = ba.quartet;
        res.quartet_b = bb.quartet;

        const double shot_ab = std::sqrt(ba.shot.value * bb.shot.value);
        Eigen::Matrix2d cross;
        auto cross_entry = [&](PairKey k) {
            const TraceSet& sum = point.joint->sum.at(k);
            const TraceSet& diff = point.joint->diff.at(k);
            VarianceEstimate cv = cross_variance(bandpass(sum.traces, opts.band),
                                                 bandpass(diff.traces, opts.band));
            return cv.value / shot_ab;
        };
        cross(0, 0) = cross_entry(PairKey::xx);
        cross(0, 1) = cross_entry(PairKey::xp);
        cross(1, 0) = cross_entry(PairKey::px);
        cross(1, 1) = cross_entry(PairKey::pp);

        res.cov = two_mode_cov(single_mode_cov(ba.quartet), single_mode_cov(bb.quartet),
                               cross);

        // physicality gate: statistical error widens the tolerance; nu_minus
        // aggregates noise from ten covariance entries, so a single-entry
        // stderr is scaled up to keep borderline-but-healthy points
        const double stat_tol = 5.0 * std::max(max_quartet_err(ba.quartet),
                                               max_quartet_err(bb.quartet));
        if (!consistency_check(res.cov, 1e-6 + stat_tol)) {
            res.discarded = true;
            res.discard_reason = "inconsistent";
            auto nu = symplectic_eigenvalues(res.cov);
            res.report.nu_minus = nu.first;
            res.report.nu_plus = nu.second;
            res.report.consistent = false;
            return res;
        }
        res.report = analyze(res.cov, 1e-6 + stat_tol);
    } catch (const std::exception& e) {
        res.failed = true;
        res.failure = e.what();
    }
    (void)dt;
    return res;
}

namespace {

template <typename Result, typename Fn>
std::vector<Result> parallel_map(const SweepDataset& ds, int jobs, Fn fn) {
    const std::size_t n = ds.points.size();
    std::vector<Result> out(n);
    if (jobs <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) out[i] = fn(ds.points[i]);
        return out;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= n) break;
            out[i] = fn(ds.points[i]);
        }
    };
    std::vector<std::thread> pool;
    const int n_threads = std::min<int>(jobs, static_cast<int>(n));
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
    return out;
}

} // namespace

std::vector<SinglePointResult> analyze_single_sweep(const SweepDataset& ds,
                                                    const AnalysisOptions& opts) {
    return parallel_map<SinglePointResult>(ds, opts.jobs, [&](const SweepPoint& p) {
        return analyze_single_point(p, ds.manifest.dt, opts);
    });
}

std::vector<PairPointResult> analyze_pair_sweep(const SweepDataset& ds,
                                                const AnalysisOptions& opts) {
    return parallel_map<PairPointResult>(ds, opts.jobs, [&](const SweepPoint& p) {
        return analyze_pair_point(p, ds.manifest.dt, opts);
    });
}

namespace {

json quartet_json(const AngleQuartet& q) {
    return {{"m45", q.m45}, {"z0", q.z0}, {"p45", q.p45}, {"p90", q.p90},
            {"m45_stderr", q.m45_err}, {"z0_stderr", q.z0_err},
            {"p45_stderr", q.p45_err}, {"p90_stderr", q.p90_err}};
}

json cov2_json(const Cov2& c) {
    return {{"xx", c.xx}, {"xp", c.xp}, {"pp", c.pp}};
}

json cov4_json(const Cov4& c) {
    json rows = json::array();
    for (int r = 0; r < 4; ++r) {
        json row = json::array();
        for (int col = 0; col < 4; ++col) row.push_back(c.m(r, col));
        rows.push_back(row);
    }
    return rows;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write: " + path.string());
    out << text;
    if (!out) throw IoError("write failed: " + path.string());
}

} // namespace

void write_single_results(const std::vector<SinglePointResult>& results,
                          const std::filesystem::path& out_prefix) {
    std::string csv = "detuning_ghz,var_min,var_max,theta_min_rad\n";
    json detail;
    detail["schema_version"] = kSchemaVersion;
    detail["points"] = json::array();
    for (const SinglePointResult& r : results) {
        if (!r.failed) {
            csv += format_double(r.detuning) + "," + format_double(r.ellipse.var_min) +
                   "," + format_double(r.ellipse.var_max) + "," +
                   format_double(r.ellipse.theta_min) + "\n";
        }
        json jp;
        jp["detuning_ghz"] = r.detuning;
        if (r.failed) {
            jp["failed"] = true;
            jp["failure"] = r.failure;
        } else {
            jp["quartet"] = quartet_json(r.quartet);
            jp["removed_offset"] = r.removed_offset;
            jp["cov"] = cov2_json(r.cov);
            jp["var_min"] = r.ellipse.var_min;
            jp["var_max"] = r.ellipse.var_max;
            jp["theta_min_rad"] = r.ellipse.theta_min;
            jp["theta_undefined"] = r.theta_undefined;
            jp["sum_rule_ok"] = r.sum_rule_ok;
            jp["gaussianity_pass"] = r.gaussianity.pass;
            jp["gaussianity_flagged_orders"] = r.gaussianity.flagged_orders;
        }
        detail["points"].push_back(jp);
    }
    write_text(out_prefix.string() + ".csv", csv);
    write_text(out_prefix.string() + ".json", detail.dump(2) + "\n");
}

void write_pair_results(const std::vector<PairPointResult>& results,
                        const std::filesystem::path& out_prefix) {
    std::string csv = "detuning_ghz,mpte,log_negativity,discord_b,consistent\n";
    json detail;
    detail["schema_version"] = kSchemaVersion;
    detail["points"] = json::array();
    for (const PairPointResult& r : results) {
        if (!r.failed && !r.discarded) {
            csv += format_double(r.detuning) + "," +
                   format_double(r.report.nu_tilde_minus) + "," +
                   format_double(r.report.log_negativity) + "," +
                   format_double(r.report.discord_b) + ",1\n";
        }
        json jp;
        jp["detuning_ghz"] = r.detuning;
        if (r.failed) {
            jp["failed"] = true;
            jp["failure"] = r.failure;
        } else if (r.discarded) {
            jp["discarded"] = true;
            jp["reason"] = r.discard_reason;
            jp["nu_minus"] = r.report.nu_minus;
            jp["consistent"] = false;
        } else {
            jp["quartet_a"] = quartet_json(r.quartet_a);
            jp["quartet_b"] = quartet_json(r.quartet_b);
            jp["cov"] = cov4_json(r.cov);
            jp["nu_minus"] = r.report.nu_minus;
            jp["nu_plus"] = r.report.nu_plus;
            jp["nu_tilde_minus"] = r.report.nu_tilde_minus;
            jp["nu_tilde_plus"] = r.report.nu_tilde_plus;
            jp["log_negativity"] = r.report.log_negativity;
            jp["discord_b"] = r.report.discord_b;
            jp["entangled"] = r.report.entangled;
            jp["consistent"] = true;
        }
        detail["points"].push_back(jp);
    }
    write_text(out_prefix.string() + ".csv", csv);
    write_text(out_prefix.string() + ".json", detail.dump(2) + "\n");
}

} // namespace stokes
