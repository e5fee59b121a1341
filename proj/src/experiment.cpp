#include "sfi/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include "sfi/errors.hpp"
#include "sfi/pool.hpp"

namespace sfi {

using nlohmann::json;

namespace {

const char* amplitude_name(AmplitudeLaw a) {
    switch (a) {
    case AmplitudeLaw::unit:
        return "unit";
    case AmplitudeLaw::gaussian:
        return "gaussian";
    case AmplitudeLaw::uniform:
        return "uniform";
    }
    return "unit";
}

AmplitudeLaw amplitude_from(const std::string& s) {
    if (s == "unit") return AmplitudeLaw::unit;
    if (s == "gaussian") return AmplitudeLaw::gaussian;
    if (s == "uniform") return AmplitudeLaw::uniform;
    throw ConfigError("config: unknown amplitude law '" + s + "'");
}

const char* noise_name(NoiseKind k) {
    switch (k) {
    case NoiseKind::none:
        return "none";
    case NoiseKind::fixed_tones:
        return "fixed_tones";
    case NoiseKind::hashed_gaussian:
        return "hashed_gaussian";
    }
    return "none";
}

NoiseKind noise_from(const std::string& s) {
    if (s == "none") return NoiseKind::none;
    if (s == "fixed_tones") return NoiseKind::fixed_tones;
    if (s == "hashed_gaussian") return NoiseKind::hashed_gaussian;
    throw ConfigError("config: unknown noise kind '" + s + "'");
}

const char* sigma_name(SigmaRange r) { return r == SigmaRange::collision ? "collision" : "standard"; }

SigmaRange sigma_from(const std::string& s) {
    if (s == "standard") return SigmaRange::standard;
    if (s == "collision") return SigmaRange::collision;
    throw ConfigError("config: unknown sigma range '" + s + "'");
}

// Rejects keys outside `allowed` so typos in configs do not pass silently.
void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) {
        throw ConfigError("config: '" + where + "' must be an object");
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed) {
            ok = ok || it.key() == a;
        }
        if (!ok) {
            throw ConfigError("config: unknown key '" + where + "." + it.key() + "'");
        }
    }
}

template <class V>
void get_opt(const json& j, const char* key, V& out) {
    if (j.contains(key)) {
        try {
            out = j.at(key).get<V>();
        } catch (const json::exception& e) {
            throw ConfigError(std::string("config: bad value for '") + key + "': " + e.what());
        }
    }
}

std::string fmt_num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double median_of(std::vector<double> v) {
    if (v.empty()) {
        return 0.0;
    }
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double noise_norm_sq(const NoiseModel& g, double T, std::size_t grid) {
    switch (g.kind()) {
    case NoiseKind::none:
        return 0.0;
    case NoiseKind::fixed_tones:
        return exact_norm_sq(g.tones(), T);
    case NoiseKind::hashed_gaussian: {
        const auto v = sample_on_grid([&g](double t) { return g(t); }, T, grid);
        return t_norm_sq(v, T);
    }
    }
    return 0.0;
}

// Converted outputs carry large cancelling coefficients inside each cluster,
// so the pairwise closed form loses all digits; measure on a dense grid.
double error_norm_sq(const SparseSignal& y, const SparseSignal& x, double T) {
    double fmax = 0.0;
    for (const auto* s : {&y, &x}) {
        for (const auto& t : s->tones) {
            fmax = std::max(fmax, std::abs(t.freq));
        }
    }
    const std::size_t n = std::max(default_norm_grid(x.size()),
                                   static_cast<std::size_t>(std::min(16.0 * fmax * T, 4.0e6)) + 1);
    const auto v = sample_on_grid([&](double t) { return eval_sparse(y, t) - eval_sparse(x, t); }, T, n);
    return t_norm_sq(v, T);
}

struct SharedState {
    ResolvedPipeline rp;
    std::unique_ptr<DiagContext> ctx;
};

std::vector<ToneLabel> label_tones(const ExperimentConfig& cfg, const SharedState& st, const SparseSignal& x,
                                   const NoiseModel& noise, const HashParams& p, double noise_level_sq,
                                   const FrequencyList& found) {
    const auto& rp = st.rp;
    const int k = cfg.instance.k;
    const double T = cfg.instance.T;
    const auto& lk = cfg.label_knobs;
    const double iso_delta = lk.iso_delta > 0.0 ? lk.iso_delta : k * rp.h.dh;
    std::vector<ToneLabel> out;
    for (const auto& tone : x.tones) {
        ToneLabel tl;
        tl.freq = tone.freq;
        tl.label.bin = hash_bin(p, tone.freq);
        for (const auto& e : found.entries) {
            tl.recovered = tl.recovered || std::abs(e.freq - tone.freq) <= 10.0 * rp.delta_res;
        }
        if (cfg.labels) {
            tl.label.heavy = heavy_frequency(*st.ctx, x, tone.freq, noise_level_sq, k, T);
            tl.label.high_snr = high_snr_bin(x, noise, rp.h, rp.g, p, tl.label.bin, lk.c_snr, lk.snr_grid);
            tl.label.well_isolated =
                well_isolated(*st.ctx, x, p, tone.freq, iso_delta, lk.iso_eps, noise_level_sq, k, lk.c_iso);
            tl.label.large_offset = large_offset({tone.freq}, rp.h, rp.g, p);
        }
        out.push_back(tl);
    }
    return out;
}

TrialRecord run_trial(const ExperimentConfig& cfg, const SharedState& st, int index) {
    const auto& spec = cfg.instance;
    TrialRecord rec;
    rec.index = index;
    rec.seed = derive_seed(cfg.seed, 0x747269616c000000ULL + static_cast<std::uint64_t>(index));

    std::mt19937_64 irng(derive_seed(rec.seed, 1));
    const double gap = spec.hard ? 0.0 : spec.gap_multiple * st.rp.hash_delta;
    const SparseSignal x = draw_instance(spec, gap, irng);
    const NoiseModel noise = make_noise_model(x, cfg.noise, spec.T, derive_seed(rec.seed, 2));
    const SampleOracle oracle = make_oracle(x, noise, spec.T, derive_seed(rec.seed, 3));

    ResolvedPipeline rp = st.rp;
    rp.cfg.seed = derive_seed(rec.seed, 4);

    rec.signal_norm = std::sqrt(exact_norm_sq(x, spec.T));
    rec.noise_norm = std::sqrt(noise_norm_sq(noise, spec.T, default_norm_grid(x.size())));
    const double n2 = rec.noise_norm * rec.noise_norm + rp.cfg.delta * rec.signal_norm * rec.signal_norm;

    HashParams p0;
    FrequencyList found;
    if (cfg.stage == "freq") {
        std::mt19937_64 rng(derive_seed(rp.cfg.seed, 1));
        p0 = draw_hash_params(rp.hash_delta, rp.B, spec.F, rng, rp.cfg.sigma_range);
        const auto t0 = std::chrono::steady_clock::now();
        found = frequency_estimation_x(oracle, rp.h, rp.g, p0, spec.F, spec.T, rp.delta_res, rp.search, rng);
        rec.time_freq = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        rec.queries_freq = oracle.query_count();
        rec.queries_total = rec.queries_freq;
        rec.freq_list_size = found.entries.size();
    } else {
        const auto rep = high_prob_interpolate(oracle, rp);
        p0 = rep.run_params.at(rep.chosen);
        found = rep.run_freqs.at(rep.chosen);
        rec.queries_freq = rep.queries_freq;
        rec.queries_signal = rep.queries_signal;
        rec.queries_total = rep.queries_total;
        rec.output_sparsity = rep.output.size();
        rec.freq_list_size = found.entries.size();
        rec.failed_runs = static_cast<int>(rep.failed_runs.size());
        rec.time_freq = rep.time_freq;
        rec.time_signal = rep.time_signal;
        rec.time_merge = rep.time_merge;
        rec.error = std::sqrt(error_norm_sq(rep.output, x, spec.T));
        rec.rel_error = rec.signal_norm > 0.0 ? rec.error / rec.signal_norm : rec.error;
    }
    rec.tones = label_tones(cfg, st, x, noise, p0, n2, found);
    return rec;
}

// --- minimal JSON-schema subset: type, required, properties, items, enum, minimum

bool type_matches(const json& v, const std::string& t) {
    if (t == "object") return v.is_object();
    if (t == "array") return v.is_array();
    if (t == "string") return v.is_string();
    if (t == "boolean") return v.is_boolean();
    if (t == "integer") return v.is_number_integer();
    if (t == "number") return v.is_number();
    if (t == "null") return v.is_null();
    return false;
}

void validate_node(const json& v, const json& schema, const std::string& path, std::vector<std::string>& errs) {
    if (schema.contains("type") && !type_matches(v, schema["type"].get<std::string>())) {
        errs.push_back(path + ": expected " + schema["type"].get<std::string>());
        return;
    }
    if (schema.contains("enum")) {
        bool ok = false;
        for (const auto& e : schema["enum"]) {
            ok = ok || e == v;
        }
        if (!ok) {
            errs.push_back(path + ": value not in enum");
        }
    }
    if (schema.contains("minimum") && v.is_number() && v.get<double>() < schema["minimum"].get<double>()) {
        errs.push_back(path + ": below minimum");
    }
    if (v.is_object()) {
        if (schema.contains("required")) {
            for (const auto& r : schema["required"]) {
                if (!v.contains(r.get<std::string>())) {
                    errs.push_back(path + ": missing '" + r.get<std::string>() + "'");
                }
            }
        }
        if (schema.contains("properties")) {
            for (auto it = schema["properties"].begin(); it != schema["properties"].end(); ++it) {
                if (v.contains(it.key())) {
                    validate_node(v[it.key()], it.value(), path + "." + it.key(), errs);
                }
            }
        }
    }
    if (v.is_array() && schema.contains("items")) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            validate_node(v[i], schema["items"], path + "[" + std::to_string(i) + "]", errs);
        }
    }
}

const char* kReportSchema = R"({
  "type": "object",
  "required": ["schema_version", "kind", "stage", "config", "trials"],
  "properties": {
    "schema_version": {"type": "integer", "enum": [1]},
    "kind": {"type": "string", "enum": ["trials"]},
    "stage": {"type": "string", "enum": ["full", "freq"]},
    "config": {"type": "object", "required": ["instance", "noise", "pipeline", "trials", "seed"]},
    "trials": {
      "type": "array",
      "items": {
        "type": "object",
        "required": ["index", "seed", "queries_freq", "queries_signal", "queries_total", "output_sparsity",
                     "freq_list_size", "failed_runs", "error", "rel_error", "noise_norm", "signal_norm", "tones"],
        "properties": {
          "index": {"type": "integer", "minimum": 0},
          "seed": {"type": "integer"},
          "queries_freq": {"type": "integer", "minimum": 0},
          "queries_signal": {"type": "integer", "minimum": 0},
          "queries_total": {"type": "integer", "minimum": 0},
          "output_sparsity": {"type": "integer", "minimum": 0},
          "freq_list_size": {"type": "integer", "minimum": 0},
          "failed_runs": {"type": "integer", "minimum": 0},
          "error": {"type": "number", "minimum": 0},
          "rel_error": {"type": "number", "minimum": 0},
          "noise_norm": {"type": "number", "minimum": 0},
          "signal_norm": {"type": "number", "minimum": 0},
          "tones": {
            "type": "array",
            "items": {
              "type": "object",
              "required": ["freq", "bin", "heavy", "high_snr", "well_isolated", "large_offset", "recovered"],
              "properties": {
                "freq": {"type": "number"},
                "bin": {"type": "integer", "minimum": 0},
                "heavy": {"type": "boolean"},
                "high_snr": {"type": "boolean"},
                "well_isolated": {"type": "boolean"},
                "large_offset": {"type": "boolean"},
                "recovered": {"type": "boolean"}
              }
            }
          }
        }
      }
    }
  }
})";

const char* kSweepSchema = R"({
  "type": "object",
  "required": ["schema_version", "kind", "rows", "slope_freq", "slope_signal", "slope_total"],
  "properties": {
    "schema_version": {"type": "integer", "enum": [1]},
    "kind": {"type": "string", "enum": ["sweep"]},
    "rows": {
      "type": "array",
      "items": {
        "type": "object",
        "required": ["k", "queries_freq", "queries_signal", "queries_total"],
        "properties": {
          "k": {"type": "integer", "minimum": 1},
          "queries_freq": {"type": "number", "minimum": 0},
          "queries_signal": {"type": "number", "minimum": 0},
          "queries_total": {"type": "number", "minimum": 0}
        }
      }
    },
    "slope_freq": {"type": "number"},
    "slope_signal": {"type": "number"},
    "slope_total": {"type": "number"}
  }
})";

} // namespace

SparseSignal draw_instance(const InstanceSpec& spec, double gap, std::mt19937_64& rng) {
    if (spec.k < 0 || !(spec.F > 0.0) || !(spec.T > 0.0)) {
        throw ConfigError("instance: need k >= 0 and positive F, T");
    }
    SparseSignal x;
    x.F = spec.F;
    if (spec.k == 0) {
        return x;
    }
    const double span = 2.0 * spec.F - (spec.k - 1) * gap;
    if (span < 0.0) {
        throw ConfigError("instance: " + std::to_string(spec.k) + " tones with gap " + fmt_num(gap) +
                          " do not fit in [-F, F]");
    }
    // Uniform over gap-separated configurations: sort k uniforms on a shrunk
    // interval, then spread them by i*gap.
    std::uniform_real_distribution<double> uf(0.0, span);
    std::vector<double> u(static_cast<std::size_t>(spec.k));
    for (auto& v : u) {
        v = uf(rng);
    }
    std::sort(u.begin(), u.end());
    std::uniform_real_distribution<double> ph(0.0, kTwoPi);
    std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
    std::uniform_real_distribution<double> mag(0.5, 1.5);
    for (int i = 0; i < spec.k; ++i) {
        const double f = -spec.F + u[static_cast<std::size_t>(i)] + i * gap;
        cplx c;
        switch (spec.amplitude) {
        case AmplitudeLaw::unit:
            c = std::polar(1.0, ph(rng));
            break;
        case AmplitudeLaw::gaussian: {
            const double re = nd(rng);
            c = cplx(re, nd(rng));
            break;
        }
        case AmplitudeLaw::uniform: {
            const double r = mag(rng);
            c = std::polar(r, ph(rng));
            break;
        }
        }
        x.tones.push_back({f, c});
    }
    std::shuffle(x.tones.begin(), x.tones.end(), rng);
    return x;
}

void ensure_writable_dir(const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw IoError("output directory '" + dir + "' cannot be created");
    }
    const auto probe = fs::path(dir) / ".write_probe";
    {
        std::ofstream f(probe);
        if (!f || !(f << "x") || !f.flush()) {
            throw IoError("output directory '" + dir + "' is not writable");
        }
    }
    fs::remove(probe, ec);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    f << text;
    if (!f.flush()) {
        throw IoError("write to '" + path + "' failed");
    }
}

std::vector<TrialRecord> run_experiment(const ExperimentConfig& cfg) {
    if (cfg.trials < 0) {
        throw ConfigError("experiment: trials must be nonnegative");
    }
    if (cfg.stage != "full" && cfg.stage != "freq") {
        throw ConfigError("experiment: stage must be 'full' or 'freq'");
    }
    if (!cfg.out_dir.empty()) {
        ensure_writable_dir(cfg.out_dir);
    }
    std::vector<TrialRecord> records(static_cast<std::size_t>(cfg.trials));
    if (cfg.trials > 0) {
        SharedState st;
        PipelineConfig pc = cfg.pipeline;
        pc.k = cfg.instance.k;
        pc.F = cfg.instance.F;
        pc.T = cfg.instance.T;
        st.rp = resolve_pipeline(pc);
        if (cfg.labels) {
            st.ctx = std::make_unique<DiagContext>(make_diag_context(st.rp.h, st.rp.g));
            // the context points into rp; keep it pinned to st
            st.ctx->h = &st.rp.h;
            st.ctx->g = &st.rp.g;
        }
        parallel_for(records.size(), [&](std::size_t i) { records[i] = run_trial(cfg, st, static_cast<int>(i)); });
    }
    if (!cfg.out_dir.empty()) {
        namespace fs = std::filesystem;
        const fs::path dir(cfg.out_dir);
        write_text((dir / "report.json").string(), trials_to_json(cfg, records).dump(2) + "\n");
        write_text((dir / "trials.csv").string(), trials_to_csv(records));
        write_text((dir / "timings.csv").string(), timings_to_csv(records));
        write_text((dir / "report.schema.json").string(), json::parse(kReportSchema).dump(2) + "\n");
    }
    return records;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw InvalidInput("loglog_slope: need at least two matching points");
    }
    double mx = 0.0;
    double my = 0.0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0 && y[i] > 0.0)) {
            throw InvalidInput("loglog_slope: values must be positive");
        }
        mx += std::log(x[i]) / n;
        my += std::log(y[i]) / n;
    }
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    if (!(sxx > 0.0)) {
        throw InvalidInput("loglog_slope: x values must not all coincide");
    }
    return sxy / sxx;
}

SweepTable scaling_sweep(const ExperimentConfig& base, const std::vector<int>& k_list) {
    if (k_list.empty()) {
        throw InvalidInput("scaling_sweep: empty k list");
    }
    for (std::size_t i = 0; i < k_list.size(); ++i) {
        if (k_list[i] < 1 || (i > 0 && k_list[i] <= k_list[i - 1])) {
            throw InvalidInput("scaling_sweep: k list must be positive and strictly ascending");
        }
    }
    SweepTable tab;
    for (int k : k_list) {
        ExperimentConfig cfg = base;
        cfg.instance.k = k;
        cfg.pipeline.k = k;
        cfg.out_dir.clear();
        cfg.labels = false;
        const auto recs = run_experiment(cfg);
        std::vector<double> qf;
        std::vector<double> qs;
        std::vector<double> qt;
        for (const auto& r : recs) {
            qf.push_back(static_cast<double>(r.queries_freq));
            qs.push_back(static_cast<double>(r.queries_signal));
            qt.push_back(static_cast<double>(r.queries_total));
        }
        tab.rows.push_back({k, median_of(qf), median_of(qs), median_of(qt)});
    }
    if (tab.rows.size() >= 2) {
        std::vector<double> ks;
        std::vector<double> f;
        std::vector<double> s;
        std::vector<double> t;
        for (const auto& r : tab.rows) {
            ks.push_back(r.k);
            f.push_back(r.queries_freq);
            s.push_back(r.queries_signal);
            t.push_back(r.queries_total);
        }
        tab.slope_freq = loglog_slope(ks, f);
        const bool have_signal = std::all_of(s.begin(), s.end(), [](double v) { return v > 0.0; });
        tab.slope_signal = have_signal ? loglog_slope(ks, s) : 0.0;
        tab.slope_total = loglog_slope(ks, t);
    }
    return tab;
}

json config_to_json(const ExperimentConfig& cfg) {
    const auto& in = cfg.instance;
    const auto& pc = cfg.pipeline;
    json j;
    j["instance"] = {{"k", in.k},
                     {"F", in.F},
                     {"T", in.T},
                     {"gap_multiple", in.gap_multiple},
                     {"hard", in.hard},
                     {"amplitude", amplitude_name(in.amplitude)}};
    j["noise"] = {{"kind", noise_name(cfg.noise.kind)}, {"level", cfg.noise.level}, {"tones", cfg.noise.tones}};
    j["pipeline"] = {
        {"delta", pc.delta},
        {"delta1", pc.delta1},
        {"rho", pc.rho},
        {"h", {{"c_R", pc.h.c_R}, {"min_RS", pc.h.min_RS}, {"table_intervals", pc.h.table_intervals},
               {"panels_per_lobe", pc.h.panels_per_lobe}}},
        {"g", {{"c_l", pc.g.c_l}, {"alpha_g", pc.g.alpha_g}, {"edge_margin", pc.g.edge_margin},
               {"l_override", pc.g.l_override}}},
        {"c_B", pc.c_B},
        {"B", pc.B},
        {"hash_delta", pc.hash_delta},
        {"c_foot", pc.c_foot},
        {"sigma_range", sigma_name(pc.sigma_range)},
        {"delta_res", pc.delta_res},
        {"merge_radius", pc.merge_radius},
        {"search", {{"num", pc.search.num}, {"D_iters", pc.search.D_iters}, {"R_votes", pc.search.R_votes},
                    {"c_beta", pc.search.c_beta}, {"s", pc.search.s}}},
        {"degree", pc.degree},
        {"se", {{"c_m", pc.se.c_m}, {"svd_threshold", pc.se.svd_threshold}}},
        {"conv_eps", pc.conv_eps},
        {"merge_factor", pc.merge_factor},
        {"merge_c", pc.merge_c},
    };
    const auto& lk = cfg.label_knobs;
    j["labels"] = {{"enabled", cfg.labels},
                   {"c_snr", lk.c_snr},
                   {"iso_eps", lk.iso_eps},
                   {"c_iso", lk.c_iso},
                   {"iso_delta", lk.iso_delta},
                   {"snr_grid", lk.snr_grid}};
    j["trials"] = cfg.trials;
    j["seed"] = cfg.seed;
    j["stage"] = cfg.stage;
    j["output"] = {{"dir", cfg.out_dir}};
    return j;
}

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig cfg;
    check_keys(j, "", {"instance", "noise", "pipeline", "labels", "trials", "seed", "stage", "output"});
    if (j.contains("instance")) {
        const auto& in = j["instance"];
        check_keys(in, "instance", {"k", "F", "T", "gap_multiple", "hard", "amplitude"});
        get_opt(in, "k", cfg.instance.k);
        get_opt(in, "F", cfg.instance.F);
        get_opt(in, "T", cfg.instance.T);
        get_opt(in, "gap_multiple", cfg.instance.gap_multiple);
        get_opt(in, "hard", cfg.instance.hard);
        std::string a = amplitude_name(cfg.instance.amplitude);
        get_opt(in, "amplitude", a);
        cfg.instance.amplitude = amplitude_from(a);
    }
    if (j.contains("noise")) {
        const auto& n = j["noise"];
        check_keys(n, "noise", {"kind", "level", "tones"});
        std::string kind = noise_name(cfg.noise.kind);
        get_opt(n, "kind", kind);
        cfg.noise.kind = noise_from(kind);
        get_opt(n, "level", cfg.noise.level);
        get_opt(n, "tones", cfg.noise.tones);
    }
    if (j.contains("pipeline")) {
        const auto& p = j["pipeline"];
        auto& pc = cfg.pipeline;
        check_keys(p, "pipeline",
                   {"delta", "delta1", "rho", "h", "g", "c_B", "B", "hash_delta", "c_foot", "sigma_range",
                    "delta_res", "merge_radius", "search", "degree", "se", "conv_eps", "merge_factor", "merge_c"});
        get_opt(p, "delta", pc.delta);
        get_opt(p, "delta1", pc.delta1);
        get_opt(p, "rho", pc.rho);
        if (p.contains("h")) {
            check_keys(p["h"], "pipeline.h", {"c_R", "min_RS", "table_intervals", "panels_per_lobe"});
            get_opt(p["h"], "c_R", pc.h.c_R);
            get_opt(p["h"], "min_RS", pc.h.min_RS);
            get_opt(p["h"], "table_intervals", pc.h.table_intervals);
            get_opt(p["h"], "panels_per_lobe", pc.h.panels_per_lobe);
        }
        if (p.contains("g")) {
            check_keys(p["g"], "pipeline.g", {"c_l", "alpha_g", "edge_margin", "l_override"});
            get_opt(p["g"], "c_l", pc.g.c_l);
            get_opt(p["g"], "alpha_g", pc.g.alpha_g);
            get_opt(p["g"], "edge_margin", pc.g.edge_margin);
            get_opt(p["g"], "l_override", pc.g.l_override);
        }
        get_opt(p, "c_B", pc.c_B);
        get_opt(p, "B", pc.B);
        get_opt(p, "hash_delta", pc.hash_delta);
        get_opt(p, "c_foot", pc.c_foot);
        std::string sr = sigma_name(pc.sigma_range);
        get_opt(p, "sigma_range", sr);
        pc.sigma_range = sigma_from(sr);
        get_opt(p, "delta_res", pc.delta_res);
        get_opt(p, "merge_radius", pc.merge_radius);
        if (p.contains("search")) {
            check_keys(p["search"], "pipeline.search", {"num", "D_iters", "R_votes", "c_beta", "s"});
            get_opt(p["search"], "num", pc.search.num);
            get_opt(p["search"], "D_iters", pc.search.D_iters);
            get_opt(p["search"], "R_votes", pc.search.R_votes);
            get_opt(p["search"], "c_beta", pc.search.c_beta);
            get_opt(p["search"], "s", pc.search.s);
        }
        get_opt(p, "degree", pc.degree);
        if (p.contains("se")) {
            check_keys(p["se"], "pipeline.se", {"c_m", "svd_threshold"});
            get_opt(p["se"], "c_m", pc.se.c_m);
            get_opt(p["se"], "svd_threshold", pc.se.svd_threshold);
        }
        get_opt(p, "conv_eps", pc.conv_eps);
        get_opt(p, "merge_factor", pc.merge_factor);
        get_opt(p, "merge_c", pc.merge_c);
    }
    if (j.contains("labels")) {
        const auto& l = j["labels"];
        check_keys(l, "labels", {"enabled", "c_snr", "iso_eps", "c_iso", "iso_delta", "snr_grid"});
        get_opt(l, "enabled", cfg.labels);
        get_opt(l, "c_snr", cfg.label_knobs.c_snr);
        get_opt(l, "iso_eps", cfg.label_knobs.iso_eps);
        get_opt(l, "c_iso", cfg.label_knobs.c_iso);
        get_opt(l, "iso_delta", cfg.label_knobs.iso_delta);
        get_opt(l, "snr_grid", cfg.label_knobs.snr_grid);
    }
    get_opt(j, "trials", cfg.trials);
    get_opt(j, "seed", cfg.seed);
    get_opt(j, "stage", cfg.stage);
    if (j.contains("output")) {
        check_keys(j["output"], "output", {"dir"});
        get_opt(j["output"], "dir", cfg.out_dir);
    }
    cfg.pipeline.k = cfg.instance.k;
    cfg.pipeline.F = cfg.instance.F;
    cfg.pipeline.T = cfg.instance.T;
    cfg.pipeline.seed = cfg.seed;
    if (cfg.stage != "full" && cfg.stage != "freq") {
        throw ConfigError("config: stage must be 'full' or 'freq'");
    }
    if (cfg.trials < 0) {
        throw ConfigError("config: trials must be nonnegative");
    }
    return cfg;
}

json trials_to_json(const ExperimentConfig& cfg, const std::vector<TrialRecord>& trials) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["kind"] = "trials";
    j["stage"] = cfg.stage;
    auto c = config_to_json(cfg);
    c.erase("output");
    j["config"] = c;
    json arr = json::array();
    for (const auto& r : trials) {
        json t;
        t["index"] = r.index;
        t["seed"] = r.seed;
        t["queries_freq"] = r.queries_freq;
        t["queries_signal"] = r.queries_signal;
        t["queries_total"] = r.queries_total;
        t["output_sparsity"] = r.output_sparsity;
        t["freq_list_size"] = r.freq_list_size;
        t["failed_runs"] = r.failed_runs;
        t["error"] = r.error;
        t["rel_error"] = r.rel_error;
        t["noise_norm"] = r.noise_norm;
        t["signal_norm"] = r.signal_norm;
        json tones = json::array();
        for (const auto& tl : r.tones) {
            tones.push_back({{"freq", tl.freq},
                             {"bin", tl.label.bin},
                             {"heavy", tl.label.heavy},
                             {"high_snr", tl.label.high_snr},
                             {"well_isolated", tl.label.well_isolated},
                             {"large_offset", tl.label.large_offset},
                             {"recovered", tl.recovered}});
        }
        t["tones"] = tones;
        arr.push_back(t);
    }
    j["trials"] = arr;
    return j;
}

std::string trials_to_csv(const std::vector<TrialRecord>& trials) {
    std::ostringstream os;
    os << "schema_version,trial,seed,queries_freq,queries_signal,queries_total,output_sparsity,freq_list_size,"
          "error,rel_error,noise_norm,signal_norm,n_tones,n_heavy,n_high_snr,n_well_isolated,n_large_offset,"
          "n_recovered,failed_runs\n";
    for (const auto& r : trials) {
        int heavy = 0;
        int snr = 0;
        int iso = 0;
        int lo = 0;
        int rec = 0;
        for (const auto& t : r.tones) {
            heavy += t.label.heavy;
            snr += t.label.high_snr;
            iso += t.label.well_isolated;
            lo += t.label.large_offset;
            rec += t.recovered;
        }
        os << kSchemaVersion << ',' << r.index << ',' << r.seed << ',' << r.queries_freq << ',' << r.queries_signal
           << ',' << r.queries_total << ',' << r.output_sparsity << ',' << r.freq_list_size << ','
           << fmt_num(r.error) << ',' << fmt_num(r.rel_error) << ',' << fmt_num(r.noise_norm) << ','
           << fmt_num(r.signal_norm) << ',' << r.tones.size() << ',' << heavy << ',' << snr << ',' << iso << ','
           << lo << ',' << rec << ',' << r.failed_runs << '\n';
    }
    return os.str();
}

std::string timings_to_csv(const std::vector<TrialRecord>& trials) {
    std::ostringstream os;
    os << "schema_version,trial,time_freq,time_signal,time_merge\n";
    for (const auto& r : trials) {
        os << kSchemaVersion << ',' << r.index << ',' << fmt_num(r.time_freq) << ',' << fmt_num(r.time_signal)
           << ',' << fmt_num(r.time_merge) << '\n';
    }
    return os.str();
}

json sweep_to_json(const SweepTable& t) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["kind"] = "sweep";
    json rows = json::array();
    for (const auto& r : t.rows) {
        rows.push_back({{"k", r.k},
                        {"queries_freq", r.queries_freq},
                        {"queries_signal", r.queries_signal},
                        {"queries_total", r.queries_total}});
    }
    j["rows"] = rows;
    j["slope_freq"] = t.slope_freq;
    j["slope_signal"] = t.slope_signal;
    j["slope_total"] = t.slope_total;
    return j;
}

std::string sweep_to_csv(const SweepTable& t) {
    std::ostringstream os;
    os << "schema_version,k,queries_freq,queries_signal,queries_total\n";
    for (const auto& r : t.rows) {
        os << kSchemaVersion << ',' << r.k << ',' << fmt_num(r.queries_freq) << ',' << fmt_num(r.queries_signal)
           << ',' << fmt_num(r.queries_total) << '\n';
    }
    return os.str();
}

json report_schema(const std::string& kind) {
    return json::parse(kind == "sweep" ? kSweepSchema : kReportSchema);
}

std::vector<std::string> validate_report(const json& report) {
    std::vector<std::string> errs;
    const std::string kind = report.is_object() && report.contains("kind") && report["kind"].is_string()
                                 ? report["kind"].get<std::string>()
                                 : "trials";
    validate_node(report, report_schema(kind), "$", errs);
    return errs;
}

void write_sweep_reports(const std::string& dir, const SweepTable& t) {
    ensure_writable_dir(dir);
    namespace fs = std::filesystem;
    write_text((fs::path(dir) / "sweep.json").string(), sweep_to_json(t).dump(2) + "\n");
    write_text((fs::path(dir) / "sweep.csv").string(), sweep_to_csv(t));
    write_text((fs::path(dir) / "sweep.schema.json").string(), report_schema("sweep").dump(2) + "\n");
}

std::string svg_scatter(const std::vector<double>& x, const std::vector<double>& y, const std::string& xlabel,
                        const std::string& ylabel, bool logx, bool logy) {
    const double W = 480.0;
    const double H = 360.0;
    const double ml = 70.0;
    const double mr = 20.0;
    const double mt = 20.0;
    const double mb = 50.0;
    auto tx = [&](double v) { return logx ? std::log10(std::max(v, 1e-300)) : v; };
    auto ty = [&](double v) { return logy ? std::log10(std::max(v, 1e-300)) : v; };
    double x0 = 0.0;
    double x1 = 1.0;
    double y0 = 0.0;
    double y1 = 1.0;
    if (!x.empty()) {
        x0 = x1 = tx(x[0]);
        y0 = y1 = ty(y[0]);
        for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
            x0 = std::min(x0, tx(x[i]));
            x1 = std::max(x1, tx(x[i]));
            y0 = std::min(y0, ty(y[i]));
            y1 = std::max(y1, ty(y[i]));
        }
    }
    if (x1 - x0 <= 0.0) {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if (y1 - y0 <= 0.0) {
        y0 -= 0.5;
        y1 += 0.5;
    }
    auto px = [&](double v) { return ml + (tx(v) - x0) / (x1 - x0) * (W - ml - mr); };
    auto py = [&](double v) { return H - mb - (ty(v) - y0) / (y1 - y0) * (H - mt - mb); };
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\"" << H - mb
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << H - mb
       << "\" stroke=\"black\"/>\n";
    auto label = [&](double v, bool lg) { return lg ? "1e" + fmt_num(std::round(v * 100) / 100) : fmt_num(v); };
    os << "<text x=\"" << ml << "\" y=\"" << H - mb + 15 << "\" font-size=\"10\">" << label(x0, logx) << "</text>\n";
    os << "<text x=\"" << W - mr << "\" y=\"" << H - mb + 15 << "\" font-size=\"10\" text-anchor=\"end\">"
       << label(x1, logx) << "</text>\n";
    os << "<text x=\"" << ml - 5 << "\" y=\"" << H - mb << "\" font-size=\"10\" text-anchor=\"end\">"
       << label(y0, logy) << "</text>\n";
    os << "<text x=\"" << ml - 5 << "\" y=\"" << mt + 10 << "\" font-size=\"10\" text-anchor=\"end\">"
       << label(y1, logy) << "</text>\n";
    os << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 10 << "\" font-size=\"12\" text-anchor=\"middle\">"
       << xlabel << "</text>\n";
    os << "<text x=\"15\" y=\"" << (mt + H - mb) / 2 << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 15 "
       << (mt + H - mb) / 2 << ")\">" << ylabel << "</text>\n";
    for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
        os << "<circle cx=\"" << px(x[i]) << "\" cy=\"" << py(y[i]) << "\" r=\"3\" fill=\"steelblue\"/>\n";
    }
    os << "</svg>\n";
    return os.str();
}

void write_trial_plots(const std::string& dir, const std::vector<TrialRecord>& trials) {
    namespace fs = std::filesystem;
    std::vector<double> idx;
    std::vector<double> err;
    std::vector<double> q;
    for (const auto& r : trials) {
        idx.push_back(r.index);
        err.push_back(std::max(r.rel_error, 1e-16));
        q.push_back(static_cast<double>(std::max<std::uint64_t>(r.queries_total, 1)));
    }
    write_text((fs::path(dir) / "rel_error.svg").string(), svg_scatter(idx, err, "trial", "relative error", false, true));
    write_text((fs::path(dir) / "queries.svg").string(), svg_scatter(idx, q, "trial", "queries", false, true));
}

void write_sweep_plot(const std::string& dir, const SweepTable& t) {
    namespace fs = std::filesystem;
    std::vector<double> ks;
    std::vector<double> qf;
    std::vector<double> qt;
    for (const auto& r : t.rows) {
        ks.push_back(r.k);
        qf.push_back(std::max(r.queries_freq, 1.0));
        qt.push_back(std::max(r.queries_total, 1.0));
    }
    write_text((fs::path(dir) / "sweep_freq.svg").string(), svg_scatter(ks, qf, "k", "frequency-stage queries", true, true));
    write_text((fs::path(dir) / "sweep_total.svg").string(), svg_scatter(ks, qt, "k", "total queries", true, true));
}

} // namespace sfi
