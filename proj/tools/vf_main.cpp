#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "vf/bridge.hpp"
#include "vf/metrics.hpp"
#include "vf/png_io.hpp"
#include "vf/policy.hpp"
#include "vf/rng.hpp"
#include "vf/runner.hpp"
#include "vf/scenario.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace vf;

constexpr const char* kToolVersion = "1.0.0";

// Exit codes: 0 ok, 2 invalid spec, 3 I/O, 4 protocol error.
constexpr int kExitOk = 0;
constexpr int kExitInvalidSpec = 2;
constexpr int kExitIo = 3;
constexpr int kExitProtocol = 4;

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep))
        if (!item.empty()) out.push_back(item);
    return out;
}

struct SpeedBand {
    double lo = 0.0;
    double hi = 0.0;
    std::string label() const {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.2f-%.2f", lo, hi);
        return buf;
    }
};

std::vector<std::optional<SpeedBand>> parse_bands(const std::string& text) {
    if (text.empty()) return {std::nullopt};  // scenario-native speed ranges
    std::vector<std::optional<SpeedBand>> bands;
    for (const auto& item : split(text, ',')) {
        const auto parts = split(item, ':');
        if (parts.size() != 2) throw ConfigError("speed band: expected lo:hi, got " + item);
        bands.push_back(SpeedBand{std::stod(parts[0]), std::stod(parts[1])});
    }
    return bands;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << text;
    if (!out) throw IoError("short write to " + path);
}

// ---------------------------------------------------------------------------
// eval

struct EvalOptions {
    std::string scenario = "s-turn";
    std::string approaches = "seg";
    std::string forecaster = "none";
    std::string space = "3d";
    std::string policy = "pure-pursuit";
    std::string seeds = "1,2,3";
    int episodes = 50;
    std::string speed_bands;
    std::string out_dir = "eval-out";
    double bridge_timeout = 10.0;
};

struct PolicyChoice {
    PolicyFactory factory;
    bool parallel_safe = true;
    std::string label;
};

PolicyChoice resolve_policy(const std::string& spec, double bridge_timeout,
                            std::shared_ptr<Transport>* transport_out) {
    if (spec.rfind("exec:", 0) == 0) {
        const std::string command = spec.substr(5);
        auto transport = std::make_shared<SubprocessTransport>(command);
        if (transport_out) *transport_out = transport;
        return {[transport, bridge_timeout] {
                    return std::make_unique<BridgePolicy>(*transport, bridge_timeout);
                },
                false, "bridge(" + command + ")"};
    }
    return {make_policy_factory(spec), true, spec};
}

int run_eval(const EvalOptions& opt, std::shared_ptr<Transport> preopened_transport = nullptr) {
    const ScenarioConfig base = resolve_scenario(opt.scenario);
    const auto bands = parse_bands(opt.speed_bands);
    const auto approach_names = split(opt.approaches, ',');
    if (approach_names.empty()) throw ConfigError("eval: no approaches given");
    const auto seed_list = split(opt.seeds, ',');
    if (seed_list.empty()) throw ConfigError("eval: no seeds given");
    if (opt.episodes < 1) throw ConfigError("eval: episodes must be >= 1");

    std::vector<ApproachSpec> approaches;
    for (const auto& name : approach_names) {
        // Plain approaches run without a forecaster; overlay approaches use
        // the requested one (forecaster "none" there is an invalid spec).
        const bool has_overlay = name.find('+') != std::string::npos;
        approaches.push_back(make_approach(name, has_overlay ? opt.forecaster : "none", opt.space));
    }

    PolicyChoice policy;
    if (preopened_transport) {
        auto transport = preopened_transport;
        const double timeout = opt.bridge_timeout;
        policy = {[transport, timeout] { return std::make_unique<BridgePolicy>(*transport, timeout); },
                  false, opt.policy};
    } else {
        std::shared_ptr<Transport> transport;
        policy = resolve_policy(opt.policy, opt.bridge_timeout, &transport);
    }

    // Flattened job list; results reduce in (band, approach, seed, episode) order.
    std::vector<EpisodeJob> jobs;
    for (const auto& band : bands) {
        ScenarioConfig config = base;
        if (band) apply_speed_band(config, band->lo, band->hi);
        for (const auto& approach : approaches) {
            for (const auto& seed_text : seed_list) {
                const std::uint64_t seed = std::stoull(seed_text);
                for (int e = 0; e < opt.episodes; ++e) {
                    EpisodeJob job;
                    job.config = config;
                    job.approach = approach;
                    job.make_policy = policy.factory;
                    job.seed = mix_seed(seed, std::uint64_t(e));
                    job.scenario_id = base.name;
                    job.parallel_safe = policy.parallel_safe;
                    jobs.push_back(std::move(job));
                }
            }
        }
    }

    const auto results = run_batch(jobs);

    // Reduce into rows: one per (band, approach), aggregated across seeds.
    struct Row {
        std::string band;
        std::string approach;
        CellStats stats;
        long protocol_errors = 0;
    };
    std::vector<Row> rows;
    size_t idx = 0;
    long total_protocol_errors = 0;
    for (const auto& band : bands) {
        for (const auto& approach : approaches) {
            Row row;
            row.band = band ? band->label() : "native";
            row.approach = approach.label();
            std::vector<EvalCell> per_seed;
            for (size_t s = 0; s < seed_list.size(); ++s) {
                std::vector<EpisodeRecord> records;
                for (int e = 0; e < opt.episodes; ++e, ++idx) {
                    const auto& res = results[idx];
                    if (res.record) records.push_back(*res.record);
                    else ++row.protocol_errors;
                }
                if (!records.empty()) per_seed.push_back(rates(records));
            }
            if (!per_seed.empty()) row.stats = aggregate_seeds(per_seed);
            total_protocol_errors += row.protocol_errors;
            rows.push_back(std::move(row));
        }
    }

    // Manifest: full resolved configuration, reproducible from this alone.
    json manifest;
    manifest["tool"] = "vf";
    manifest["version"] = kToolVersion;
    manifest["command"] = "eval";
    manifest["scenario_spec"] = opt.scenario;
    manifest["scenario"] = json::parse(scenario_to_json(base));
    json japp = json::array();
    for (const auto& a : approaches) japp.push_back(a.label());
    manifest["approaches"] = japp;
    manifest["forecaster"] = opt.forecaster;
    manifest["space"] = opt.space;
    manifest["policy"] = policy.label;
    manifest["seeds"] = opt.seeds;
    manifest["episodes_per_seed"] = opt.episodes;
    manifest["speed_bands"] = opt.speed_bands;
    manifest["config_hash"] = [] (const json& j) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%016" PRIx64, fnv1a(j.dump()));
        return std::string(buf);
    }(manifest);

    std::ostringstream csv;
    csv << "scenario,band,approach,policy,seeds,episodes_per_seed,protocol_errors,"
           "spl_mean,spl_std,success_mean,success_std,collision_mean,collision_std,"
           "oob_mean,oob_std,timeout_mean,timeout_std\n";
    json jrows = json::array();
    for (const auto& row : rows) {
        const auto& m = row.stats.mean;
        const auto& d = row.stats.stddev;
        csv << base.name << ',' << row.band << ',' << row.approach << ',' << policy.label << ','
            << seed_list.size() << ',' << opt.episodes << ',' << row.protocol_errors << ','
            << fmt(m.spl) << ',' << fmt(d.spl) << ',' << fmt(m.success) << ',' << fmt(d.success)
            << ',' << fmt(m.collision) << ',' << fmt(d.collision) << ',' << fmt(m.oob) << ','
            << fmt(d.oob) << ',' << fmt(m.timeout) << ',' << fmt(d.timeout) << '\n';
        json jr;
        jr["scenario"] = base.name;
        jr["band"] = row.band;
        jr["approach"] = row.approach;
        jr["policy"] = policy.label;
        jr["protocol_errors"] = row.protocol_errors;
        jr["n"] = m.n;
        jr["spl"] = {{"mean", m.spl}, {"std", d.spl}};
        jr["success"] = {{"mean", m.success}, {"std", d.success}};
        jr["collision"] = {{"mean", m.collision}, {"std", d.collision}};
        jr["oob"] = {{"mean", m.oob}, {"std", d.oob}};
        jr["timeout"] = {{"mean", m.timeout}, {"std", d.timeout}};
        jrows.push_back(std::move(jr));
    }
    json jreport;
    jreport["manifest"] = manifest;
    jreport["rows"] = jrows;

    std::filesystem::create_directories(opt.out_dir);
    write_text(opt.out_dir + "/report.csv", csv.str());
    write_text(opt.out_dir + "/report.json", jreport.dump(2) + "\n");
    write_text(opt.out_dir + "/manifest.json", manifest.dump(2) + "\n");
    std::cout << csv.str();

    return total_protocol_errors > 0 ? kExitProtocol : kExitOk;
}

// ---------------------------------------------------------------------------
// forecast-eval

struct ForecastEvalOptions {
    std::string input_csv;
    int synthetic_tracks = 0;
    double noise_sigma = 0.05;
    std::uint64_t seed = 7;
    int horizon = 5;
    int stride = 4;
    std::string out_dir;
};

struct TrackData {
    int object_id;
    std::vector<TrackHistory::Sample> samples;
};

std::vector<TrackData> load_tracks_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("trajectory csv: empty file");
    if (line.size() && line.back() == '\r') line.pop_back();
    if (line != "object_id,step,cx,cy,w,h")
        throw ConfigError("trajectory csv: header must be object_id,step,cx,cy,w,h");
    std::map<int, TrackData> by_id;
    size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.size() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cols = split(line, ',');
        if (cols.size() != 6)
            throw ConfigError("trajectory csv: bad column count at line " + std::to_string(line_no));
        try {
            const int id = std::stoi(cols[0]);
            TrackHistory::Sample s{std::stol(cols[1]),
                                   {std::stod(cols[2]), std::stod(cols[3]), std::stod(cols[4]),
                                    std::stod(cols[5])}};
            auto& track = by_id.try_emplace(id, TrackData{id, {}}).first->second;
            track.samples.push_back(s);
        } catch (const std::exception&) {
            throw ConfigError("trajectory csv: unparsable value at line " + std::to_string(line_no));
        }
    }
    std::vector<TrackData> tracks;
    for (auto& [id, track] : by_id) tracks.push_back(std::move(track));
    return tracks;
}

// Constant-velocity tracks with Gaussian position noise. History rows come
// at twice the forecast interval (a last-two CVM needs that baseline against
// the noise); the evaluated future rows come at the interval itself.
std::vector<TrackData> synthesize_tracks(int count, double sigma, std::uint64_t seed, int horizon,
                                         int stride, std::vector<TrackData>* truth_out) {
    std::vector<TrackData> noisy(count);
    if (truth_out) truth_out->resize(count);
    const int history = 8;
    const int history_gap = 2 * stride;
    const double dt = 0.05;
    for (int t = 0; t < count; ++t) {
        std::mt19937_64 rng(mix_seed(seed, std::uint64_t(t)));
        const Vec2 start{uniform_double(rng, 0.0, 20.0), uniform_double(rng, 0.0, 20.0)};
        const double speed = uniform_double(rng, 0.3, 1.5);
        const double dir = uniform_double(rng, -kPi, kPi);
        const Vec2 vel{speed * std::cos(dir) * dt, speed * std::sin(dir) * dt};  // per frame
        noisy[t].object_id = t;
        if (truth_out) (*truth_out)[t].object_id = t;
        std::vector<long> steps;
        for (int k = 0; k < history; ++k) steps.push_back(long(k) * history_gap);
        for (int i = 1; i <= horizon; ++i) steps.push_back(steps[history - 1] + long(i) * stride);
        for (const long step : steps) {
            const Vec2 pos = start + vel * double(step);
            const BoxState clean{pos.x, pos.y, 0.6, 1.7};
            BoxState observed = clean;
            observed.cx += normal_double(rng, 0.0, sigma);
            observed.cy += normal_double(rng, 0.0, sigma);
            noisy[t].samples.push_back({step, observed});
            if (truth_out) (*truth_out)[t].samples.push_back({step, clean});
        }
    }
    return noisy;
}

int run_forecast_eval(const ForecastEvalOptions& opt) {
    if (opt.input_csv.empty() && opt.synthetic_tracks <= 0)
        throw ConfigError("forecast-eval: give --input or --synthetic-tracks");

    std::vector<TrackData> tracks, truth;
    if (!opt.input_csv.empty()) {
        tracks = load_tracks_csv(opt.input_csv);
        truth = tracks;  // recorded positions are the ground truth
    } else {
        tracks = synthesize_tracks(opt.synthetic_tracks, opt.noise_sigma, opt.seed, opt.horizon,
                                   opt.stride, &truth);
    }

    const int H = opt.horizon;
    const int s = opt.stride;
    struct Acc {
        double fde = 0.0, ade = 0.0;
        long n = 0;
    };
    Acc acc_cvm, acc_kf, acc_gt;

    for (size_t ti = 0; ti < tracks.size(); ++ti) {
        const auto& samples = tracks[ti].samples;
        if (samples.size() < 2) throw ConfigError("forecast-eval: track with < 2 samples");
        if (long(samples.size()) < H + 2) continue;

        const size_t eval_from = samples.size() - size_t(H) - 1;  // last history sample
        // Future offsets must match {s, ..., H*s} exactly.
        for (int i = 1; i <= H; ++i) {
            if (samples[eval_from + i].step != samples[eval_from].step + long(i) * s)
                throw ConfigError("forecast-eval: track steps not stride-aligned for evaluation");
        }

        TrackHistory hist(tracks[ti].object_id, ForecastSpace::image);
        std::optional<KalmanState> kf;
        long last_step = 0;
        for (size_t k = 0; k <= eval_from; ++k) {
            hist.push(samples[k].step, samples[k].box);
            if (!kf) kf = kf_init(samples[k].box);
            else kf = kf_step(*kf, samples[k].box, {}, int(samples[k].step - last_step));
            last_step = samples[k].step;
        }

        std::vector<BoxState> actual;
        for (int i = 1; i <= H; ++i) actual.push_back(truth[ti].samples[eval_from + i].box);

        if (auto f = cvm_forecast(hist, H, s)) {
            acc_cvm.fde += fde(*f, actual);
            acc_cvm.ade += ade(*f, actual);
            acc_cvm.n += 1;
        }
        const Forecast fkf = kf_forecast(*kf, H, s, tracks[ti].object_id, ForecastSpace::image);
        acc_kf.fde += fde(fkf, actual);
        acc_kf.ade += ade(fkf, actual);
        acc_kf.n += 1;

        Forecast fgt;
        fgt.object_id = tracks[ti].object_id;
        fgt.algo = ForecastAlgo::GT;
        fgt.space = ForecastSpace::image;
        for (int i = 1; i <= H; ++i) fgt.boxes.push_back({i * s, actual[size_t(i - 1)]});
        acc_gt.fde += fde(fgt, actual);
        acc_gt.ade += ade(fgt, actual);
        acc_gt.n += 1;
    }

    if (acc_kf.n == 0) throw ConfigError("forecast-eval: no track long enough to evaluate");

    std::ostringstream csv;
    csv << "algorithm,fde,ade,n\n";
    auto emit = [&](const char* name, const Acc& a) {
        csv << name << ',' << fmt(a.n ? a.fde / double(a.n) : 0.0) << ','
            << fmt(a.n ? a.ade / double(a.n) : 0.0) << ',' << a.n << '\n';
    };
    emit("CVM", acc_cvm);
    emit("KF", acc_kf);
    emit("GT", acc_gt);
    std::cout << csv.str();
    if (!opt.out_dir.empty()) {
        std::filesystem::create_directories(opt.out_dir);
        write_text(opt.out_dir + "/forecast_eval.csv", csv.str());
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// render-dump

struct RenderDumpOptions {
    std::string scenario = "s-turn";
    std::string approach = "seg+ap";
    std::string forecaster = "cvm";
    std::string space = "3d";
    std::string policy = "pure-pursuit";
    std::uint64_t seed = 1;
    int steps = 100;
    std::string out_dir = "render-out";
};

int run_render_dump(const RenderDumpOptions& opt) {
    const ScenarioConfig config = resolve_scenario(opt.scenario);
    ApproachSpec approach = make_approach(opt.approach, opt.forecaster, opt.space);
    auto policy = make_policy_factory(opt.policy)();

    std::filesystem::create_directories(opt.out_dir);
    json frames = json::array();
    int written = 0;
    StepObserver observer = [&](const StepTrace& trace) {
        if (!trace.observation || written > opt.steps) return;
        if (trace.step > long(opt.steps)) return;
        char name[64];
        std::snprintf(name, sizeof(name), "frame_%06ld.png", trace.step);
        write_label_png(opt.out_dir + "/" + std::string(name), trace.observation->frames.back());
        frames.push_back({{"step", trace.step}, {"file", name}});
        ++written;
    };

    const auto result = run_episode(config, approach, *policy, opt.seed, config.name, observer, true);

    json manifest;
    manifest["tool"] = "vf";
    manifest["version"] = kToolVersion;
    manifest["command"] = "render-dump";
    manifest["scenario"] = json::parse(scenario_to_json(config));
    manifest["approach"] = approach.label();
    manifest["policy"] = opt.policy;
    manifest["seed"] = opt.seed;
    json palette = json::array();
    const char* class_names[] = {"background", "road",         "boundary",     "goal",
                                 "pedestrian", "forecast_box", "forecast_path"};
    for (int i = 0; i < kNumPixelClasses; ++i) {
        const auto& c = class_palette()[size_t(i)];
        palette.push_back({{"class", class_names[i]}, {"rgb", {c.r, c.g, c.b}}});
    }
    manifest["palette"] = palette;
    manifest["frames"] = frames;
    if (result.record) {
        manifest["outcome"] = cause_name(result.record->cause);
        manifest["steps"] = result.record->steps;
    }
    write_text(opt.out_dir + "/manifest.json", manifest.dump(2) + "\n");
    std::cout << "wrote " << written << " frames to " << opt.out_dir << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"visual-forecasting navigation simulator"};
    app.require_subcommand(1);

    EvalOptions eval_opt;
    auto* eval_cmd = app.add_subcommand("eval", "batch closed-loop evaluation");
    eval_cmd->add_option("--scenario", eval_opt.scenario, "preset name or scenario JSON path");
    eval_cmd->add_option("--approach", eval_opt.approaches,
                         "comma list of seg|seg-box|seg-box+box|seg+ap");
    eval_cmd->add_option("--forecaster", eval_opt.forecaster, "none|cvm|kf|gt");
    eval_cmd->add_option("--space", eval_opt.space, "2d|3d");
    eval_cmd->add_option("--policy", eval_opt.policy,
                         "straight|pure-pursuit|forecast-avoid|pixel|exec:<command>");
    eval_cmd->add_option("--seeds", eval_opt.seeds, "comma list of seeds");
    eval_cmd->add_option("--episodes", eval_opt.episodes, "episodes per (seed, cell)");
    eval_cmd->add_option("--speed-band", eval_opt.speed_bands, "comma list of lo:hi bands");
    eval_cmd->add_option("--out", eval_opt.out_dir, "output directory");
    eval_cmd->add_option("--bridge-timeout", eval_opt.bridge_timeout, "seconds per action");

    ForecastEvalOptions fc_opt;
    auto* fc_cmd = app.add_subcommand("forecast-eval", "FDE/ADE forecast-quality table");
    fc_cmd->add_option("--input", fc_opt.input_csv, "trajectory CSV (object_id,step,cx,cy,w,h)");
    fc_cmd->add_option("--synthetic-tracks", fc_opt.synthetic_tracks,
                       "generate N noisy constant-velocity tracks");
    fc_cmd->add_option("--noise", fc_opt.noise_sigma, "position noise sigma (synthetic)");
    fc_cmd->add_option("--seed", fc_opt.seed, "generator seed");
    fc_cmd->add_option("--horizon", fc_opt.horizon, "forecast horizon H");
    fc_cmd->add_option("--stride", fc_opt.stride, "frames per interval");
    fc_cmd->add_option("--out", fc_opt.out_dir, "output directory");

    RenderDumpOptions rd_opt;
    auto* rd_cmd = app.add_subcommand("render-dump", "per-step observation PNG dump");
    rd_cmd->add_option("--scenario", rd_opt.scenario, "preset name or scenario JSON path");
    rd_cmd->add_option("--approach", rd_opt.approach, "seg|seg-box|seg-box+box|seg+ap");
    rd_cmd->add_option("--forecaster", rd_opt.forecaster, "none|cvm|kf|gt");
    rd_cmd->add_option("--space", rd_opt.space, "2d|3d");
    rd_cmd->add_option("--policy", rd_opt.policy, "built-in policy name");
    rd_cmd->add_option("--seed", rd_opt.seed, "episode seed");
    rd_cmd->add_option("--steps", rd_opt.steps, "max steps to dump");
    rd_cmd->add_option("--out", rd_opt.out_dir, "output directory");

    EvalOptions bs_opt;
    int bs_port = 7901;
    auto* bs_cmd = app.add_subcommand("bridge-serve",
                                      "run eval for one external policy over a local TCP socket");
    bs_cmd->add_option("--port", bs_port, "TCP port to listen on (loopback)");
    bs_cmd->add_option("--scenario", bs_opt.scenario, "preset name or scenario JSON path");
    bs_cmd->add_option("--approach", bs_opt.approaches, "observation approach");
    bs_cmd->add_option("--forecaster", bs_opt.forecaster, "none|cvm|kf|gt");
    bs_cmd->add_option("--space", bs_opt.space, "2d|3d");
    bs_cmd->add_option("--seeds", bs_opt.seeds, "comma list of seeds");
    bs_cmd->add_option("--episodes", bs_opt.episodes, "episodes per (seed, cell)");
    bs_cmd->add_option("--speed-band", bs_opt.speed_bands, "comma list of lo:hi bands");
    bs_cmd->add_option("--out", bs_opt.out_dir, "output directory");
    bs_cmd->add_option("--bridge-timeout", bs_opt.bridge_timeout, "seconds per action");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitInvalidSpec;
    }

    try {
        if (eval_cmd->parsed()) return run_eval(eval_opt);
        if (fc_cmd->parsed()) return run_forecast_eval(fc_opt);
        if (rd_cmd->parsed()) return run_render_dump(rd_opt);
        if (bs_cmd->parsed()) {
            std::cerr << "bridge-serve: listening on 127.0.0.1:" << bs_port << "\n";
            auto transport = std::make_shared<TcpServerTransport>(bs_port);
            bs_opt.policy = "bridge(tcp:" + std::to_string(bs_port) + ")";
            return run_eval(bs_opt, transport);
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalidSpec;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const ProtocolError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitProtocol;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalidSpec;
    }
    return kExitOk;
}
