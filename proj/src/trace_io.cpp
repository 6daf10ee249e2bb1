#include "stokes/trace_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace stokes {

using nlohmann::json;

void Trace::validate() const {
    if (samples.size() < 2)
        throw ValidationError("trace '" + label + "': needs at least 2 samples");
    if (!(dt > 0.0))
        throw ValidationError("trace '" + label + "': dt must be > 0");
    for (double v : samples)
        if (!std::isfinite(v))
            throw ValidationError("trace '" + label + "': non-finite sample");
}

void TraceSet::validate() const {
    if (traces.empty())
        throw ValidationError("trace set: no traces");
    const std::size_t n = traces[0].samples.size();
    const double dt0 = traces[0].dt;
    for (const Trace& t : traces) {
        t.validate();
        if (t.samples.size() != n)
            throw ValidationError("trace set: replicate lengths differ");
        if (t.dt != dt0)
            throw ValidationError("trace set: replicate dt differ");
    }
}

void ShotNoiseRecord::validate() const {
    if (traces.empty())
        throw ValidationError("shot-noise record: no traces");
    if (!(intensity_scale > 0.0))
        throw ValidationError("shot-noise record: intensity_scale must be > 0");
    for (const Trace& t : traces) t.validate();
}

const char* to_string(AngleKey k) {
    switch (k) {
        case AngleKey::m45: return "m45";
        case AngleKey::z0: return "z0";
        case AngleKey::p45: return "p45";
        case AngleKey::p90: return "p90";
    }
    return "?";
}

const char* to_string(PairKey k) {
    switch (k) {
        case PairKey::xx: return "xx";
        case PairKey::xp: return "xp";
        case PairKey::px: return "px";
        case PairKey::pp: return "pp";
    }
    return "?";
}

static const AngleKey kAngleKeys[] = {AngleKey::m45, AngleKey::z0, AngleKey::p45,
                                      AngleKey::p90};
static const PairKey kPairKeys[] = {PairKey::xx, PairKey::xp, PairKey::px,
                                    PairKey::pp};

void SweepPoint::validate() const {
    for (AngleKey k : kAngleKeys)
        if (!beam_a.count(k))
            throw ValidationError("sweep point: beam_a missing angle key " +
                                  std::string(to_string(k)));
    if (beam_b.has_value() != shot_b.has_value())
        throw ValidationError("sweep point: beam_b present iff shot_b present");
    if (beam_b) {
        for (AngleKey k : kAngleKeys)
            if (!beam_b->count(k))
                throw ValidationError("sweep point: beam_b missing angle key " +
                                      std::string(to_string(k)));
    }
    for (const auto& [k, set] : beam_a) set.validate();
    if (beam_b)
        for (const auto& [k, set] : *beam_b) set.validate();
    if (joint) {
        for (const auto& [k, set] : joint->sum) set.validate();
        for (const auto& [k, set] : joint->diff) set.validate();
    }
    shot_a.validate();
    if (shot_b) shot_b->validate();
}

double waveplate_angle(double theta) {
    double a = std::fmod(M_PI / 8.0 + theta / 4.0, M_PI);
    if (a < 0.0) a += M_PI;
    return a;
}

TraceSet load_trace_file(const std::filesystem::path& path, double dt) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open trace file: " + path.string());

    std::string line;
    if (!std::getline(in, line))
        throw ParseError(path.string() + ":1: empty file (header expected)");

    // header defines the replicate count
    std::size_t n_cols = 1;
    for (char c : line)
        if (c == ',') ++n_cols;
    if (line.empty() || line.back() == ',')
        throw ParseError(path.string() + ":1: malformed header");

    std::vector<std::vector<double>> columns(n_cols);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() && in.eof()) break;
        std::size_t col = 0, pos = 0;
        while (true) {
            std::size_t comma = line.find(',', pos);
            std::string_view field(line.data() + pos,
                                   (comma == std::string::npos ? line.size() : comma) - pos);
            if (col >= n_cols)
                throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                                      ": row has more fields than header");
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
            if (ec != std::errc() || ptr != field.data() + field.size())
                throw ParseError(path.string() + ":" + std::to_string(line_no) +
                                 ": cannot parse value '" + std::string(field) + "'");
            if (!std::isfinite(v))
                throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                                      ": non-finite value");
            columns[col].push_back(v);
            ++col;
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (col != n_cols)
            throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                                  ": row has " + std::to_string(col) +
                                  " fields, header has " + std::to_string(n_cols));
    }

    TraceSet set;
    for (std::size_t c = 0; c < n_cols; ++c) {
        Trace t;
        t.samples = std::move(columns[c]);
        t.dt = dt;
        t.label = path.filename().string() + ":trace_" + std::to_string(c + 1);
        set.traces.push_back(std::move(t));
    }
    set.validate();
    return set;
}

void write_trace_file(const std::filesystem::path& path, const TraceSet& set) {
    set.validate();
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot write trace file: " + path.string());
    for (std::size_t c = 0; c < set.traces.size(); ++c)
        out << (c ? "," : "") << "trace_" << (c + 1);
    out << "\n";
    const std::size_t n = set.n_samples();
    char buf[40];
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < set.traces.size(); ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", set.traces[c].samples[i]);
            if (c) out << ',';
            out << buf;
        }
        out << "\n";
    }
    if (!out)
        throw IoError("write failed: " + path.string());
}

namespace {

ShotNoiseRecord load_shot(const json& j, const std::filesystem::path& dir, double dt) {
    ShotNoiseRecord rec;
    std::filesystem::path file = dir / j.at("file").get<std::string>();
    if (!std::filesystem::exists(file))
        throw IoError("missing trace file: " + file.string());
    rec.traces = load_trace_file(file, dt).traces;
    rec.intensity_scale = j.value("intensity_scale", 1.0);
    rec.validate();
    return rec;
}

std::map<AngleKey, TraceSet> load_beam(const json& j, const std::filesystem::path& dir,
                                       double dt, double base_theta) {
    static const std::pair<AngleKey, double> offsets[] = {
        {AngleKey::m45, -M_PI / 4}, {AngleKey::z0, 0.0},
        {AngleKey::p45, M_PI / 4}, {AngleKey::p90, M_PI / 2}};
    std::map<AngleKey, TraceSet> beam;
    for (auto [key, off] : offsets) {
        std::filesystem::path file = dir / j.at(to_string(key)).get<std::string>();
        if (!std::filesystem::exists(file))
            throw IoError("missing trace file: " + file.string());
        TraceSet set = load_trace_file(file, dt);
        set.theta = std::fmod(base_theta + off, 2.0 * M_PI);
        if (set.theta < 0.0) set.theta += 2.0 * M_PI;
        beam[key] = std::move(set);
    }
    return beam;
}

} // namespace

SweepDataset load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open manifest: " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }

    const std::filesystem::path dir = path.parent_path();
    SweepDataset ds;
    try {
        ds.manifest.base_theta = j.at("base_theta_rad").get<double>();
        ds.manifest.omega = j.at("omega_hz").get<double>();
        ds.manifest.bandwidth = j.at("bandwidth_hz").get<double>();
        ds.manifest.dt = j.at("dt_s").get<double>();
        ds.manifest.reference_line = j.value("reference_line", "");
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    if (!(ds.manifest.omega > 0.0) || !(ds.manifest.bandwidth > 0.0) ||
        !(ds.manifest.dt > 0.0))
        throw ValidationError(path.string() + ": omega_hz, bandwidth_hz, dt_s must be > 0");
    const double nyquist = 0.5 / ds.manifest.dt;
    if (ds.manifest.omega + ds.manifest.bandwidth / 2.0 >= nyquist)
        throw ValidationError(path.string() + ": band exceeds the Nyquist frequency");

    const double dt = ds.manifest.dt;
    for (const json& jp : j.at("points")) {
        SweepPoint p;
        p.detuning = jp.at("detuning_ghz").get<double>();
        p.beam_a = load_beam(jp.at("beam_a"), dir, dt, ds.manifest.base_theta);
        p.shot_a = load_shot(jp.at("shot_a"), dir, dt);
        if (jp.contains("beam_b"))
            p.beam_b = load_beam(jp.at("beam_b"), dir, dt, ds.manifest.base_theta);
        if (jp.contains("shot_b"))
            p.shot_b = load_shot(jp.at("shot_b"), dir, dt);
        if (jp.contains("joint")) {
            JointChannels jc;
            for (PairKey k : kPairKeys) {
                std::string sum_key = "sum_" + std::string(to_string(k));
                std::string diff_key = "diff_" + std::string(to_string(k));
                const json& joint = jp.at("joint");
                if (joint.contains(sum_key)) {
                    std::filesystem::path f = dir / joint.at(sum_key).get<std::string>();
                    if (!std::filesystem::exists(f))
                        throw IoError("missing trace file: " + f.string());
                    jc.sum[k] = load_trace_file(f, dt);
                }
                if (joint.contains(diff_key)) {
                    std::filesystem::path f = dir / joint.at(diff_key).get<std::string>();
                    if (!std::filesystem::exists(f))
                        throw IoError("missing trace file: " + f.string());
                    jc.diff[k] = load_trace_file(f, dt);
                }
            }
            p.joint = std::move(jc);
        }
        p.validate();
        ds.points.push_back(std::move(p));
    }

    for (std::size_t i = 1; i < ds.points.size(); ++i) {
        if (ds.points[i].detuning == ds.points[i - 1].detuning)
            throw ValidationError(path.string() + ": duplicate detuning " +
                                  std::to_string(ds.points[i].detuning));
        if (ds.points[i].detuning < ds.points[i - 1].detuning)
            throw ValidationError(path.string() + ": detunings must be strictly increasing");
    }
    return ds;
}

} // namespace stokes
