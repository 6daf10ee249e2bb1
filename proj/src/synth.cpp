#include "stokes/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <Eigen/Cholesky>
#include <nlohmann/json.hpp>

#include "stokes/rng.hpp"
#include "stokes/symplectic.hpp"
#include "stokes/trace_io.hpp"

namespace stokes {

using nlohmann::json;

const char* to_string(StateKind k) {
    switch (k) {
        case StateKind::vacuum: return "vacuum";
        case StateKind::squeezed: return "squeezed";
        case StateKind::tmsv: return "tmsv";
        case StateKind::beamsplit_squeezed: return "beamsplit_squeezed";
        case StateKind::custom: return "custom";
    }
    return "?";
}

Cov2 squeezed_cov(double r, double angle) {
    if (r < 0.0)
        throw std::domain_error("squeezed_cov: r must be >= 0");
    Cov2 diag{std::exp(-2.0 * r), 0.0, std::exp(2.0 * r)};
    // rotate the frame by -angle so the minimum-variance axis lands at +angle
    return rotate_cov(diag, -angle);
}

Cov4 tmsv_cov(double r) {
    if (r < 0.0)
        throw std::domain_error("tmsv_cov: r must be >= 0");
    Cov4 out;
    const double ch = std::cosh(2.0 * r), sh = std::sinh(2.0 * r);
    out.m = Eigen::Matrix4d::Identity() * ch;
    out.m(0, 2) = out.m(2, 0) = sh;
    out.m(1, 3) = out.m(3, 1) = -sh;
    return out;
}

Cov4 beamsplit(const Cov2& cov_a, const Cov2& cov_b, double transmission) {
    if (!(transmission > 0.0) || !(transmission < 1.0))
        throw std::domain_error("beamsplit: transmission must be in (0, 1)");
    const double ct = std::sqrt(transmission);
    const double st = std::sqrt(1.0 - transmission);
    Eigen::Matrix4d s = Eigen::Matrix4d::Zero();
    // out_a = ct*a + st*b, out_b = st*a - ct*b, on X and P alike
    s(0, 0) = ct; s(0, 2) = st;
    s(1, 1) = ct; s(1, 3) = st;
    s(2, 0) = st; s(2, 2) = -ct;
    s(3, 1) = st; s(3, 3) = -ct;
    Eigen::Matrix4d in = Eigen::Matrix4d::Zero();
    in.block<2, 2>(0, 0) = cov_a.matrix();
    in.block<2, 2>(2, 2) = cov_b.matrix();
    Cov4 out;
    out.m = s * in * s.transpose();
    return out;
}

bool StateSpec::is_two_mode() const {
    switch (kind) {
        case StateKind::vacuum: return two_mode;
        case StateKind::squeezed: return false;
        case StateKind::tmsv:
        case StateKind::beamsplit_squeezed: return true;
        case StateKind::custom: return custom_cov4.has_value();
    }
    return false;
}

std::variant<Cov2, Cov4> StateSpec::covariance() const {
    std::variant<Cov2, Cov4> cov;
    switch (kind) {
        case StateKind::vacuum:
            if (two_mode)
                cov = Cov4::identity();
            else
                cov = Cov2::identity();
            break;
        case StateKind::squeezed:
            cov = squeezed_cov(r, angle);
            break;
        case StateKind::tmsv:
            cov = tmsv_cov(r);
            break;
        case StateKind::beamsplit_squeezed:
            cov = beamsplit(squeezed_cov(r, angle), Cov2::identity(), transmission);
            break;
        case StateKind::custom:
            if (custom_cov4)
                cov = *custom_cov4;
            else if (custom_cov2)
                cov = *custom_cov2;
            else
                throw std::domain_error("StateSpec: custom kind needs a covariance");
            break;
    }
    if (std::holds_alternative<Cov4>(cov)) {
        if (!consistency_check(std::get<Cov4>(cov), 1e-9))
            throw std::domain_error("StateSpec: produced covariance is not physical");
    } else {
        const Cov2& c2 = std::get<Cov2>(cov);
        if (c2.det() < 1.0 - 1e-9)
            throw std::domain_error("StateSpec: produced covariance is not physical");
    }
    return cov;
}

namespace {

// stable channel ids for substream derivation
constexpr std::uint64_t kBaseStream0 = 0; // X_a, P_a, X_b, P_b are 0..3
constexpr std::uint64_t kShotA = 8;
constexpr std::uint64_t kShotB = 9;

std::vector<double> raw_stream(const SynthRun& run, std::uint64_t point,
                               std::uint64_t channel, std::uint64_t trace) {
    CounterRng rng(run.seed, point, channel, trace);
    std::vector<double> s(run.n_samples);
    if (run.state.uniform_noise)
        for (double& v : s) v = rng.uniform_unit_variance();
    else
        for (double& v : s) v = rng.normal();
    return s;
}

Trace make_trace(std::vector<double> samples, double dt, std::string label) {
    Trace t;
    t.samples = std::move(samples);
    t.dt = dt;
    t.label = std::move(label);
    return t;
}

// filter to the band and restore unit in-band variance for a unit channel
Trace shape_trace(std::vector<double> samples, const SynthRun& run,
                  double rescale, const std::string& label) {
    Trace t = make_trace(std::move(samples), run.dt, label);
    if (run.state.uniform_noise) return t; // raw white traces in the test-only mode
    t = bandpass(t, run.band);
    for (double& v : t.samples) v *= rescale;
    return t;
}

std::vector<double> combine(const std::vector<std::vector<double>>& base,
                            const std::vector<double>& weights) {
    std::vector<double> out(base[0].size(), 0.0);
    for (std::size_t k = 0; k < weights.size(); ++k) {
        if (weights[k] == 0.0) continue;
        const std::vector<double>& b = base[k];
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += weights[k] * b[i];
    }
    return out;
}

} // namespace

SynthPoint sample_traces(const SynthRun& run, std::uint64_t point_index,
                         double detuning) {
    if (run.n_samples < 2 || run.n_traces < 1)
        throw std::domain_error("sample_traces: need n_samples >= 2, n_traces >= 1");
    std::variant<Cov2, Cov4> truth = run.state.covariance();
    const bool two_mode = std::holds_alternative<Cov4>(truth);
    const std::size_t dim = two_mode ? 4 : 2;

    Eigen::MatrixXd cov(dim, dim);
    if (two_mode)
        cov = std::get<Cov4>(truth).m;
    else
        cov = std::get<Cov2>(truth).matrix();
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
        // physical matrices can sit on the PSD boundary; nudge the diagonal
        Eigen::MatrixXd bumped = cov + 1e-12 * Eigen::MatrixXd::Identity(dim, dim);
        llt.compute(bumped);
        if (llt.info() != Eigen::Success)
            throw std::domain_error("sample_traces: covariance is not positive semi-definite");
    }
    const Eigen::MatrixXd chol = llt.matrixL();

    const double rescale =
        run.state.uniform_noise
            ? 1.0
            : 1.0 / std::sqrt(run.band.kept_fraction(run.n_samples, run.dt));

    SynthPoint out;
    out.detuning = detuning;
    out.truth_cov = truth;

    static const std::pair<AngleKey, double> offsets[] = {
        {AngleKey::m45, -M_PI / 4}, {AngleKey::z0, 0.0},
        {AngleKey::p45, M_PI / 4}, {AngleKey::p90, M_PI / 2}};
    static const PairKey pair_keys[] = {PairKey::xx, PairKey::xp, PairKey::px,
                                        PairKey::pp};

    if (two_mode) out.beam_b.emplace();
    if (two_mode) out.joint.emplace();

    for (std::size_t j = 0; j < run.n_traces; ++j) {
        // white streams, Cholesky-colored into the base quadrature channels
        std::vector<std::vector<double>> white(dim);
        for (std::size_t k = 0; k < dim; ++k)
            white[k] = raw_stream(run, point_index, kBaseStream0 + k, j);
        std::vector<std::vector<double>> base(dim);
        for (std::size_t k = 0; k < dim; ++k) {
            std::vector<double> w(dim, 0.0);
            for (std::size_t i = 0; i <= k; ++i) w[i] = chol(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i));
            base[k] = combine(white, w);
        }

        auto beam_channel = [&](std::size_t x_idx, double delta) {
            std::vector<double> w(dim, 0.0);
            w[x_idx] = std::cos(delta);
            w[x_idx + 1] = std::sin(delta);
            return combine(base, w);
        };

        for (auto [key, delta] : offsets) {
            std::string lbl = "beam_a/" + std::string(to_string(key));
            out.beam_a[key].theta = delta;
            out.beam_a[key].traces.push_back(
                shape_trace(beam_channel(0, delta), run, rescale, lbl));
            if (two_mode) {
                std::string lbl_b = "beam_b/" + std::string(to_string(key));
                (*out.beam_b)[key].theta = delta;
                (*out.beam_b)[key].traces.push_back(
                    shape_trace(beam_channel(2, delta), run, rescale, lbl_b));
            }
        }

        if (two_mode) {
            for (PairKey pk : pair_keys) {
                const double da = (pk == PairKey::xx || pk == PairKey::xp) ? 0.0 : M_PI / 2;
                const double db = (pk == PairKey::xx || pk == PairKey::px) ? 0.0 : M_PI / 2;
                std::vector<double> ai = beam_channel(0, da);
                std::vector<double> bj = beam_channel(2, db);
                std::vector<double> sum(ai.size()), diff(ai.size());
                for (std::size_t i = 0; i < ai.size(); ++i) {
                    sum[i] = ai[i] + bj[i];
                    diff[i] = ai[i] - bj[i];
                }
                std::string name = to_string(pk);
                out.joint->sum[pk].traces.push_back(
                    shape_trace(std::move(sum), run, rescale, "joint/sum_" + name));
                out.joint->diff[pk].traces.push_back(
                    shape_trace(std::move(diff), run, rescale, "joint/diff_" + name));
            }
        }

        const double shot_amp = 1.0 / std::sqrt(run.intensity_scale);
        std::vector<double> sa = raw_stream(run, point_index, kShotA, j);
        for (double& v : sa) v *= shot_amp;
        out.shot_a.traces.push_back(shape_trace(std::move(sa), run, rescale, "shot_a"));
    }
    out.shot_a.intensity_scale = run.intensity_scale;
    if (two_mode) {
        out.shot_b.emplace();
        out.shot_b->intensity_scale = run.intensity_scale;
        const double shot_amp = 1.0 / std::sqrt(run.intensity_scale);
        for (std::size_t j = 0; j < run.n_traces; ++j) {
            std::vector<double> sb = raw_stream(run, point_index, kShotB, j);
            for (double& v : sb) v *= shot_amp;
            out.shot_b->traces.push_back(shape_trace(std::move(sb), run, rescale, "shot_b"));
        }
    }
    return out;
}

namespace {

json cov_to_json(const std::variant<Cov2, Cov4>& cov) {
    json j;
    if (std::holds_alternative<Cov2>(cov)) {
        const Cov2& c = std::get<Cov2>(cov);
        j = {{"xx", c.xx}, {"xp", c.xp}, {"pp", c.pp}};
    } else {
        const Eigen::Matrix4d& m = std::get<Cov4>(cov).m;
        json rows = json::array();
        for (int r = 0; r < 4; ++r) {
            json row = json::array();
            for (int c = 0; c < 4; ++c) row.push_back(m(r, c));
            rows.push_back(row);
        }
        j = rows;
    }
    return j;
}

} // namespace

std::filesystem::path synth_sweep(
    const std::vector<std::pair<double, StateSpec>>& profile,
    const SynthRun& run_template, const std::filesystem::path& out_dir) {
    if (profile.empty())
        throw std::domain_error("synth_sweep: empty profile");

    std::vector<std::pair<double, StateSpec>> sorted = profile;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 1; i < sorted.size(); ++i)
        if (sorted[i].first == sorted[i - 1].first)
            throw std::domain_error("synth_sweep: duplicate detuning in profile");

    std::filesystem::create_directories(out_dir);

    json manifest;
    manifest["base_theta_rad"] = 0.0;
    manifest["omega_hz"] = run_template.band.omega;
    manifest["bandwidth_hz"] = run_template.band.delta;
    manifest["dt_s"] = run_template.dt;
    manifest["reference_line"] = "synthetic";
    manifest["points"] = json::array();

    json truth;
    truth["rng"] = CounterRng::kAlgorithm;
    truth["seed"] = run_template.seed;
    truth["points"] = json::array();

    static const AngleKey angle_keys[] = {AngleKey::m45, AngleKey::z0, AngleKey::p45,
                                          AngleKey::p90};
    static const PairKey pair_keys[] = {PairKey::xx, PairKey::xp, PairKey::px,
                                        PairKey::pp};

    char dirbuf[32];
    for (std::size_t pi = 0; pi < sorted.size(); ++pi) {
        SynthRun run = run_template;
        run.state = sorted[pi].second;
        SynthPoint sp = sample_traces(run, pi, sorted[pi].first);

        std::snprintf(dirbuf, sizeof dirbuf, "point_%03zu", pi);
        const std::string pdir = dirbuf;
        std::filesystem::create_directories(out_dir / pdir);

        json jp;
        jp["detuning_ghz"] = sp.detuning;

        auto write_set = [&](const TraceSet& set, const std::string& rel) {
            write_trace_file(out_dir / rel, set);
            return rel;
        };

        for (AngleKey k : angle_keys)
            jp["beam_a"][to_string(k)] =
                write_set(sp.beam_a.at(k), pdir + "/beam_a_" + to_string(k) + ".csv");
        TraceSet shot_set;
        shot_set.traces = sp.shot_a.traces;
        jp["shot_a"]["file"] = write_set(shot_set, pdir + "/shot_a.csv");
        jp["shot_a"]["intensity_scale"] = sp.shot_a.intensity_scale;

        if (sp.beam_b) {
            for (AngleKey k : angle_keys)
                jp["beam_b"][to_string(k)] =
                    write_set(sp.beam_b->at(k), pdir + "/beam_b_" + to_string(k) + ".csv");
            TraceSet shot_b_set;
            shot_b_set.traces = sp.shot_b->traces;
            jp["shot_b"]["file"] = write_set(shot_b_set, pdir + "/shot_b.csv");
            jp["shot_b"]["intensity_scale"] = sp.shot_b->intensity_scale;
            for (PairKey k : pair_keys) {
                std::string n = to_string(k);
                jp["joint"]["sum_" + n] =
                    write_set(sp.joint->sum.at(k), pdir + "/joint_sum_" + n + ".csv");
                jp["joint"]["diff_" + n] =
                    write_set(sp.joint->diff.at(k), pdir + "/joint_diff_" + n + ".csv");
            }
        }
        manifest["points"].push_back(jp);

        json jt;
        jt["detuning_ghz"] = sp.detuning;
        jt["state"] = {{"kind", to_string(run.state.kind)},
                       {"r", run.state.r},
                       {"angle_rad", run.state.angle},
                       {"transmission", run.state.transmission},
                       {"uniform_noise", run.state.uniform_noise}};
        jt["cov"] = cov_to_json(sp.truth_cov);
        truth["points"].push_back(jt);
    }

    std::filesystem::path mpath = out_dir / "manifest.json";
    std::ofstream(mpath) << manifest.dump(2) << "\n";
    std::ofstream(out_dir / "truth.json") << truth.dump(2) << "\n";
    return mpath;
}

} // namespace stokes
