#pragma once

// Config-driven experiment runner behind the photoperceptron CLI.  Loads a
// JSON config, executes one named experiment, and writes deterministic CSV
// artifacts plus summary.json and manifest.json into the output directory.
//
// Determinism contract: identical (config, seed) produce byte-identical CSV
// artifacts for any thread count.  Every CSV embeds the config and seed it was
// produced from, so any artifact can be re-run exactly.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "photoperceptron/classical_perceptron.hpp"
#include "photoperceptron/csv.hpp"
#include "photoperceptron/digest.hpp"
#include "photoperceptron/langevin_thermo.hpp"
#include "photoperceptron/quantum_perceptron.hpp"
#include "photoperceptron/raman_device.hpp"
#include "photoperceptron/rng.hpp"
#include "photoperceptron/temporal_modes.hpp"
#include "photoperceptron/version.hpp"

namespace photoperceptron::experiment {

using nlohmann::json;

/// Invalid or inconsistent configuration (CLI exit code 2).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ArtifactEntry {
    std::string name;
    std::string sha256;
    std::uint64_t bytes = 0;
};

struct RunManifest {
    json config_echo;
    std::vector<ArtifactEntry> artifacts;
    double wall_time_s = 0.0;
    std::string version;
    bool partial = false;
};

inline const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names = {"classical-train", "quantum-not", "mode-learn",
                                                   "jarzynski", "kramers", "absorption-scan"};
    return names;
}

namespace detail {

inline json load_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file: " + path.string());
    try {
        return json::parse(in, nullptr, true, true);  // allow comments
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("config field '" + key + "': " + e.what());
    }
}

template <typename T>
T require(const json& j, const std::string& key) {
    if (!j.contains(key)) throw ConfigError("config missing required field '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("config field '" + key + "': " + e.what());
    }
}

class ArtifactWriter {
public:
    ArtifactWriter(std::filesystem::path dir, std::string header_meta)
        : dir_(std::move(dir)), meta_(std::move(header_meta)) {
        std::filesystem::create_directories(dir_);
    }

    /// Write a CSV artifact: metadata comment lines, verbatim header, rows.
    void write_csv(const std::string& name, const std::string& header,
                   const std::string& body) {
        write_raw(name, meta_ + header + "\n" + body);
    }

    /// Write a TemporalMode CSV (grid parameters in its header already).
    void write_mode(const std::string& name, const modes::TemporalMode& m) {
        write_raw(name, csv::mode_csv(m, meta_));
    }

    void write_raw(const std::string& name, const std::string& content) {
        std::ofstream out(dir_ / name, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write artifact: " + (dir_ / name).string());
        out << content;
        out.close();
        entries_.push_back(ArtifactEntry{name, digest::sha256_hex(content),
                                         static_cast<std::uint64_t>(content.size())});
    }

    const std::vector<ArtifactEntry>& entries() const { return entries_; }
    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path dir_;
    std::string meta_;
    std::vector<ArtifactEntry> entries_;
};

// Module-level validation failures on config-supplied values are config errors.
template <typename Cfg>
Cfg validated(Cfg cfg, const char* what) {
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string(what) + ": " + e.what());
    }
    return cfg;
}

inline classical::TrainingConfig classical_config(const json& block, std::uint64_t seed) {
    classical::TrainingConfig cfg;
    cfg.beta = get_or(block, "beta", 2.0);
    cfg.sigma_init = get_or(block, "sigma_init", 1.0);
    cfg.epochs = get_or(block, "epochs", 200);
    cfg.trials_per_epoch = get_or(block, "trials_per_epoch", std::int64_t{10000});
    cfg.learning_rate = get_or(block, "learning_rate", 1.0);
    cfg.seed = seed;
    const std::string task = get_or<std::string>(block, "task", "NOT");
    if (task == "NOT")
        cfg.task = classical::BooleanTask::Not;
    else if (task == "COPY")
        cfg.task = classical::BooleanTask::Copy;
    else
        throw ConfigError("classical.task must be NOT or COPY, got '" + task + "'");
    return validated(cfg, "classical");
}

inline classical::SwitchBackend classical_backend(const json& block) {
    const std::string b = get_or<std::string>(block, "backend", "sampled");
    if (b == "exact") return classical::SwitchBackend::ExactSigmoid;
    if (b == "sampled") return classical::SwitchBackend::SampledSigmoid;
    if (b == "langevin") return classical::SwitchBackend::LangevinDoubleWell;
    throw ConfigError("classical.backend must be exact, sampled or langevin, got '" + b + "'");
}

inline raman::DetectorModel detector_model(const json& block) {
    const std::string m = get_or<std::string>(block, "model", "ideal");
    if (m == "ideal") return raman::DetectorModel::IdealProjective;
    if (m == "dynamical") return raman::DetectorModel::DynamicalRaman;
    throw ConfigError("model must be ideal or dynamical, got '" + m + "'");
}

inline quantum::QuantumTrainingConfig quantum_config(const json& block, std::uint64_t seed) {
    quantum::QuantumTrainingConfig cfg;
    cfg.model = detector_model(block);
    cfg.trials_per_epoch = get_or(block, "trials_per_epoch", std::int64_t{10000});
    cfg.epochs = get_or(block, "epochs", 200);
    cfg.eta = get_or(block, "eta", 0.5);
    cfg.delta = get_or(block, "delta", 0.1);
    cfg.sigma = get_or(block, "sigma", 1.0);
    cfg.g = get_or(block, "g", 1.0);
    cfg.K = get_or(block, "K", 2);
    cfg.n_points = get_or(block, "n_points", 4096);
    cfg.weight_sigma_init = get_or(block, "weight_sigma_init", 0.5);
    cfg.exact_gradient = get_or(block, "exact_gradient", false);
    cfg.divergence_bound = get_or(block, "divergence_bound", 8.0);
    cfg.stall_window = get_or(block, "stall_window", 10);
    const std::string obj = get_or<std::string>(block, "objective", "minimize-absorption");
    if (obj == "minimize-absorption")
        cfg.objective = quantum::Objective::MinimizeAbsorption;
    else if (obj == "maximize-absorption")
        cfg.objective = quantum::Objective::MaximizeAbsorption;
    else
        throw ConfigError("objective must be minimize-absorption or maximize-absorption");
    if (block.contains("initial_weight")) {
        cfg.initial_weight = block.at("initial_weight").get<double>();
        cfg.use_initial_weight = true;
    }
    cfg.seed = seed;
    return validated(cfg, "quantum");
}

/// Optional hbar*omega_a pricing of lost quanta.
inline std::optional<raman::RamanDeviceSpec> device_spec(const json& block) {
    if (!block.contains("omega_a")) return std::nullopt;
    try {
        return raman::RamanDeviceSpec::make(block.at("omega_a").get<double>(),
                                            get_or(block, "omega_b", 0.0));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("quantum device: ") + e.what());
    }
}

inline langevin::DoubleWellSpec well_spec(const json& block) {
    langevin::DoubleWellSpec spec;
    spec.barrier = get_or(block, "barrier", 2.0);
    spec.half_sep = get_or(block, "half_sep", 1.0);
    spec.gamma = get_or(block, "gamma", 1.0);
    spec.beta = get_or(block, "beta", 1.0);
    return validated(spec, "langevin");
}

/// JSON-array serialization of a temporal mode (grid parameters included).
inline json mode_json(const modes::TemporalMode& m) {
    json j;
    j["t_min"] = m.grid.t_min;
    j["t_max"] = m.grid.t_max;
    j["n_points"] = m.grid.n_points;
    json re = json::array(), im = json::array();
    for (const auto& a : m.amplitude) {
        re.push_back(a.real());
        im.push_back(a.imag());
    }
    j["re"] = re;
    j["im"] = im;
    return j;
}

inline json coeffs_json(std::span<const quantum::Complex> c) {
    json arr = json::array();
    for (const auto& z : c) arr.push_back({z.real(), z.imag()});
    return arr;
}

inline std::string quantum_trace_csv(std::span<const quantum::QuantumEpochRecord> records) {
    std::string body;
    for (const auto& r : records) {
        body += csv::fmt(r.epoch);
        body += ',';
        body += csv::fmt(r.param_summary);
        body += ',';
        body += csv::fmt(r.eps_sampled);
        body += ',';
        body += csv::fmt(r.eps_exact);
        body += ',';
        body += csv::fmt(r.photons_lost);
        body += ',';
        body += csv::fmt(r.energy_per_trial);
        body += '\n';
    }
    return body;
}

inline constexpr const char* kQuantumTraceHeader =
    "epoch,param_summary,eps_sampled,eps_exact,photons_lost,energy_per_trial_quanta";

}  // namespace detail

struct RunOptions {
    std::optional<std::uint64_t> seed_override;
    std::optional<std::string> out_dir_override;
    std::optional<int> threads_override;
};

/// Execute the experiment selected by `config`.  Throws ConfigError for
/// invalid configuration and std::runtime_error for runtime failures.
inline RunManifest run(const json& config_in, const RunOptions& options = {}) {
    const auto t_begin = std::chrono::steady_clock::now();

    json config = config_in;
    if (!config.is_object()) throw ConfigError("config root must be a JSON object");
    const std::string experiment = detail::require<std::string>(config, "experiment");
    bool known = false;
    for (const auto& n : experiment_names()) known = known || n == experiment;
    if (!known) throw ConfigError("unknown experiment '" + experiment + "'");

    if (options.seed_override) config["seed"] = *options.seed_override;
    if (options.out_dir_override) config["out_dir"] = *options.out_dir_override;
    if (options.threads_override) config["threads"] = *options.threads_override;

    const std::uint64_t seed = detail::get_or(config, "seed", std::uint64_t{0});
    const int threads = std::max(1, detail::get_or(config, "threads", 1));
    std::string out_dir = detail::get_or<std::string>(config, "out_dir", "out");
    if (!options.out_dir_override) {
        if (const char* env = std::getenv("PHOTOPERCEPTRON_OUT_DIR")) out_dir = env;
    }

    // Threads never affect results; drop the field from the reproducibility echo.
    json echo = config;
    echo.erase("threads");
    echo["out_dir"] = out_dir;
    std::string meta = "# config: " + echo.dump() + "\n# seed: " + std::to_string(seed) + "\n";

    detail::ArtifactWriter writer(out_dir, meta);
    json summary;
    summary["experiment"] = experiment;
    summary["seed"] = seed;

    const auto write_manifest = [&](bool partial) {
        json mj;
        mj["config"] = echo;
        mj["version"] = kVersion;
        mj["wall_time_s"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin).count();
        mj["partial"] = partial;
        mj["artifacts"] = json::array();
        for (const auto& a : writer.entries())
            mj["artifacts"].push_back({{"name", a.name}, {"sha256", a.sha256}, {"bytes", a.bytes}});
        std::ofstream out(writer.dir() / "manifest.json", std::ios::binary);
        out << mj.dump(2) << "\n";
    };

    try {
    if (experiment == "classical-train") {
        const json block = detail::get_or(config, "classical", json::object());
        const auto backend = detail::classical_backend(block);
        auto cfg = detail::classical_config(block, seed);
        const int restarts = detail::get_or(block, "restarts", 1);
        if (restarts < 1) throw ConfigError("classical.restarts must be >= 1");

        classical::LangevinBackendConfig lb;
        if (backend == classical::SwitchBackend::LangevinDoubleWell) {
            const json lv = detail::get_or(block, "langevin", json::object());
            lb.spec = detail::well_spec(lv);
            lb.window = detail::get_or(lv, "window", 0.0);
            lb.dt = detail::get_or(lv, "dt", 0.0);
        }

        std::vector<classical::TrainingResult> results(restarts);
        langevin::detail::parallel_for(restarts, threads, [&](std::int64_t r) {
            classical::TrainingConfig c = cfg;
            c.seed = rng::derive(seed, static_cast<std::uint64_t>(r));
            results[r] = classical::train(c, backend, lb);
        });

        std::string body;
        for (std::size_t e = 0; e < results[0].trace.size(); ++e) {
            const auto& st = results[0].trace[e];
            body += csv::fmt(static_cast<std::int64_t>(e));
            body += ',' + csv::fmt(st.w) + ',' + csv::fmt(st.eps_exact) + ',' +
                    csv::fmt(st.eps_sampled) + ',' + csv::fmt(st.n_exact) + ',' +
                    csv::fmt(st.n_sampled) + ',' + csv::fmt(st.delta_w) + ',' +
                    csv::fmt(st.heat) + '\n';
        }
        writer.write_csv("trace.csv", "epoch,w,eps_exact,eps_sampled,n_exact,n_sampled,delta_w,heat",
                         body);

        if (restarts > 1) {
            std::string rb;
            for (int r = 0; r < restarts; ++r) {
                rb += csv::fmt(r);
                rb += ',' + csv::fmt(results[r].final_w) + ',' +
                      csv::fmt(results[r].trace.back().eps_exact) + '\n';
            }
            writer.write_csv("final_weights.csv", "restart,final_w,final_eps_exact", rb);
        }

        double mean_w = 0.0;
        for (const auto& r : results) mean_w += r.final_w;
        mean_w /= restarts;
        double var_w = 0.0;
        for (const auto& r : results) var_w += (r.final_w - mean_w) * (r.final_w - mean_w);
        var_w = restarts > 1 ? var_w / (restarts - 1) : 0.0;

        summary["final_error"] = results[0].trace.back().eps_exact;
        summary["final_weight"] = results[0].final_w;
        summary["final_weight_mean"] = mean_w;
        summary["final_weight_variance"] = var_w;
        summary["heat_dissipated_kbt"] = results[0].ledger.heat_kbt;
        summary["heat_per_trial_kbt"] = results[0].ledger.heat_per_trial();
    } else if (experiment == "quantum-not") {
        const json block = detail::get_or(config, "quantum", json::object());
        auto cfg = detail::quantum_config(block, seed);
        const int restarts = detail::get_or(block, "restarts", 1);
        if (restarts < 1) throw ConfigError("quantum.restarts must be >= 1");

        std::vector<quantum::NotTrainingResult> results(restarts);
        langevin::detail::parallel_for(restarts, threads, [&](std::int64_t r) {
            quantum::QuantumTrainingConfig c = cfg;
            c.seed = rng::derive(seed, static_cast<std::uint64_t>(r));
            results[r] = quantum::train_not_gate(c);
        });
        const auto& first = results[0];

        writer.write_csv("trace.csv", detail::kQuantumTraceHeader,
                         detail::quantum_trace_csv(first.records));

        const auto grid = cfg.grid();
        writer.write_mode("read_field_xminus.csv",
                          quantum::infer_not(first.final_w, -1, grid, cfg.sigma, cfg.g));
        writer.write_mode("read_field_xplus.csv",
                          quantum::infer_not(first.final_w, +1, grid, cfg.sigma, cfg.g));

        const auto device = detail::device_spec(block);
        const auto rep = quantum::energy_report(first.records, device ? &*device : nullptr);
        int converged = 0;
        for (const auto& r : results)
            if (std::abs(r.final_w + 1.0) <= 0.1) ++converged;

        summary["final_weight"] = first.final_w;
        summary["final_error"] = first.records.back().eps_exact;
        summary["status"] = first.status == quantum::TrainStatus::Completed ? "completed"
                            : first.status == quantum::TrainStatus::Stalled ? "stalled"
                                                                            : "diverged";
        summary["converged_restarts"] = converged;
        summary["restarts"] = restarts;
        summary["energy"] = {{"cumulative_quanta", rep.cumulative_quanta},
                             {"first_epoch_per_trial", rep.first_epoch},
                             {"final_epoch_per_trial", rep.final_epoch}};
        if (device) summary["energy"]["final_joules_per_trial"] = rep.final_joules_per_trial;
    } else if (experiment == "mode-learn") {
        const json block = detail::get_or(config, "quantum", json::object());
        auto cfg = detail::quantum_config(block, seed);
        if (!block.contains("epochs")) cfg.epochs = 300;
        if (!block.contains("eta")) cfg.eta = 0.4;
        if (!block.contains("delta")) cfg.delta = 0.15;

        const auto grid = cfg.grid();
        std::vector<quantum::Complex> target_coeffs;
        if (block.contains("hidden_coeffs")) {
            for (const auto& pair : block.at("hidden_coeffs"))
                target_coeffs.emplace_back(pair.at(0).get<double>(), pair.at(1).get<double>());
            if (static_cast<int>(target_coeffs.size()) != cfg.K)
                throw ConfigError("quantum.hidden_coeffs must list K coefficient pairs");
        } else {
            const double r = 1.0 / std::sqrt(2.0);
            target_coeffs = {quantum::Complex{r, 0.0}, quantum::Complex{r, 0.0}};
            target_coeffs.resize(cfg.K, quantum::Complex{0.0, 0.0});
        }
        target_coeffs = quantum::detail::gauge_fixed(std::move(target_coeffs));
        const auto hidden = modes::normalize(
            quantum::mode_from_coefficients(target_coeffs, grid, cfg.sigma));

        const auto result = quantum::train_matched_filter(hidden, cfg);
        writer.write_csv("trace.csv", detail::kQuantumTraceHeader,
                         detail::quantum_trace_csv(result.records));
        const auto learned =
            quantum::mode_from_coefficients(result.final_state.c, grid, cfg.sigma);
        writer.write_mode("learned_mode.csv", learned);
        writer.write_mode("hidden_target.csv", hidden);

        const double fidelity = std::norm(modes::inner_product(learned, hidden));
        const auto device = detail::device_spec(block);
        const auto rep = quantum::energy_report(result.records, device ? &*device : nullptr);
        summary["fidelity"] = fidelity;
        summary["final_error"] = result.records.back().eps_exact;
        summary["status"] = result.status == quantum::TrainStatus::Completed ? "completed"
                            : result.status == quantum::TrainStatus::Stalled ? "stalled"
                                                                             : "diverged";
        summary["energy"] = {{"cumulative_quanta", rep.cumulative_quanta},
                             {"first_epoch_per_trial", rep.first_epoch},
                             {"final_epoch_per_trial", rep.final_epoch},
                             {"reduction_ratio", rep.reduction_ratio}};
        if (device) summary["energy"]["final_joules_per_trial"] = rep.final_joules_per_trial;
        summary["learned_coeffs"] = detail::coeffs_json(result.final_state.c);
        summary["hidden_coeffs"] = detail::coeffs_json(target_coeffs);
        summary["learned_mode"] = detail::mode_json(learned);
    } else if (experiment == "jarzynski") {
        const json block = detail::get_or(config, "langevin", json::object());
        const auto spec = detail::well_spec(block);
        const double dt = detail::get_or(block, "dt", spec.default_dt());
        const std::int64_t n = detail::get_or(block, "n_trajectories", std::int64_t{10000});
        const json protocols = block.contains("protocols") ? block.at("protocols") : json::array();
        if (!protocols.is_array() || protocols.empty())
            throw ConfigError("jarzynski: langevin.protocols must be a non-empty array");

        summary["protocols"] = json::array();
        for (const auto& p : protocols) {
            const std::string name = detail::require<std::string>(p, "name");
            const std::string kind = detail::get_or<std::string>(p, "kind", "ramp");
            const double lambda_max = detail::get_or(p, "lambda_max", 1.0);
            const double duration = detail::require<double>(p, "duration");
            langevin::BiasProtocol proto =
                kind == "cyclic" ? langevin::BiasProtocol::cyclic(lambda_max, duration, dt)
                                 : langevin::BiasProtocol::ramp(0.0, lambda_max, duration, dt);
            const double lambda_final = proto.knots.back().second;
            const double dF = langevin::free_energy_difference(spec, 0.0, lambda_final);

            const auto records = langevin::run_protocol_ensemble(
                rng::root_key(seed, ("jarzynski/" + name).c_str()), spec, proto, n, threads);
            const auto est = langevin::jarzynski_estimate(records, spec.beta);

            std::string body;
            for (std::size_t i = 0; i < records.size(); ++i) {
                const auto& r = records[i];
                body += csv::fmt(static_cast<std::int64_t>(i));
                body += ',' + csv::fmt(r.work) + ',' + csv::fmt(r.heat) + ',' +
                        csv::fmt(r.delta_E) + ',' + csv::fmt(r.final_side) + ',' +
                        (r.first_passage_time ? csv::fmt(*r.first_passage_time)
                                              : std::string("nan")) +
                        '\n';
            }
            writer.write_csv("work_" + name + ".csv",
                             "traj_id,W,Q,dE,final_side,first_passage_time", body);

            summary["protocols"].push_back({{"name", name},
                                            {"jarzynski_estimate", est.estimate},
                                            {"standard_error", est.standard_error},
                                            {"mean_work", est.mean_work},
                                            {"delta_F_oracle", dF},
                                            {"target", std::exp(-spec.beta * dF)}});
            if (!summary.contains("jarzynski_estimate")) {
                summary["jarzynski_estimate"] = est.estimate;
                summary["standard_error"] = est.standard_error;
                summary["delta_F_oracle"] = dF;
            }
        }
    } else if (experiment == "kramers") {
        const json block = detail::get_or(config, "langevin", json::object());
        langevin::DoubleWellSpec base = detail::well_spec(block);
        const double dt = detail::get_or(block, "dt", 0.0);
        const double t_max = detail::get_or(block, "t_max", 0.0);
        const std::int64_t n = detail::get_or(block, "n_trajectories", std::int64_t{500});
        std::vector<double> betas = detail::get_or(block, "beta_list",
                                                   std::vector<double>{1.0, 2.0, 3.0, 4.0});
        if (betas.size() < 2) throw ConfigError("kramers: beta_list needs >= 2 entries");

        std::string body;
        std::vector<double> lnr, bdv;
        summary["points"] = json::array();
        for (std::size_t i = 0; i < betas.size(); ++i) {
            langevin::DoubleWellSpec spec = base;
            spec.beta = betas[i];
            const auto fp = langevin::first_passage_rate(
                rng::root_key(seed, "kramers").child(i), spec, n, dt, t_max, threads);
            body += csv::fmt(spec.beta * spec.barrier);
            body += ',' + csv::fmt(fp.rate) + ',' + csv::fmt(fp.rate_se) + ',' +
                    csv::fmt(fp.mfpt) + ',' + csv::fmt(fp.mfpt_se) + ',' +
                    csv::fmt(fp.n_censored) + '\n';
            bdv.push_back(spec.beta * spec.barrier);
            lnr.push_back(std::log(fp.rate));
            summary["points"].push_back({{"beta_dV", spec.beta * spec.barrier},
                                         {"rate", fp.rate},
                                         {"rate_se", fp.rate_se},
                                         {"mfpt", fp.mfpt},
                                         {"n_censored", fp.n_censored}});
        }
        writer.write_csv("rates.csv", "beta_dV,rate,rate_se,mfpt,mfpt_se,n_censored", body);

        // least-squares Arrhenius fit of ln(rate) against beta*dV
        const double m = bdv.size();
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < bdv.size(); ++i) {
            sx += bdv[i]; sy += lnr[i]; sxx += bdv[i] * bdv[i]; sxy += bdv[i] * lnr[i];
        }
        const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
        const double intercept = (sy - slope * sx) / m;
        double ss_res = 0, ss_tot = 0;
        for (std::size_t i = 0; i < bdv.size(); ++i) {
            const double fit = slope * bdv[i] + intercept;
            ss_res += (lnr[i] - fit) * (lnr[i] - fit);
            ss_tot += (lnr[i] - sy / m) * (lnr[i] - sy / m);
        }
        summary["arrhenius"] = {{"slope", slope},
                                {"intercept", intercept},
                                {"r_squared", ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0}};
    } else if (experiment == "absorption-scan") {
        const json block = detail::get_or(config, "scan", json::object());
        const double sigma = detail::get_or(block, "sigma", 1.0);
        const int n_points = detail::get_or(block, "n_points", 4096);
        const double s_min = detail::get_or(block, "g2_min", 0.3);
        const double s_max = detail::get_or(block, "g2_max", 6.0);
        const int steps = detail::get_or(block, "g2_steps", 229);
        if (!(s_min > 0.0) || !(s_max > s_min) || steps < 3)
            throw ConfigError("absorption-scan: need 0 < g2_min < g2_max and g2_steps >= 3");

        const auto grid = modes::make_grid(-8.0 * sigma, 8.0 * sigma, n_points);
        const auto shape = modes::hermite_gaussian({0, sigma, 0.0}, grid);
        auto p_of_s = [&](double s) {
            return raman::absorption_profile(raman::make_read_field(shape, std::sqrt(s)), shape)
                .back();
        };

        std::string body;
        std::vector<double> ss(steps), ps(steps);
        int k_best = 0;
        for (int i = 0; i < steps; ++i) {
            ss[i] = s_min + (s_max - s_min) * i / (steps - 1);
            ps[i] = p_of_s(ss[i]);
            if (ps[i] > ps[k_best]) k_best = i;
            body += csv::fmt(std::sqrt(ss[i]));
            body += ',' + csv::fmt(ps[i]) + '\n';
        }
        writer.write_csv("scan.csv", "g,p_matched", body);

        // parabolic refinement of the interior maximum
        double s_star = ss[k_best];
        if (k_best > 0 && k_best + 1 < steps) {
            const double s0 = ss[k_best - 1], s1 = ss[k_best], s2 = ss[k_best + 1];
            const double p0 = ps[k_best - 1], p1 = ps[k_best], p2 = ps[k_best + 1];
            const double denom = (s0 - s1) * (s0 - s2) * (s1 - s2);
            const double a = (s2 * (p1 - p0) + s1 * (p0 - p2) + s0 * (p2 - p1)) / denom;
            const double b = (s2 * s2 * (p0 - p1) + s1 * s1 * (p2 - p0) + s0 * s0 * (p1 - p2)) /
                             denom;
            if (a < 0.0) s_star = -b / (2.0 * a);
        }
        summary["p_at_g1"] = p_of_s(1.0);
        summary["g2_max_location"] = s_star;
        summary["p_max"] = p_of_s(s_star);
    }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        // flag whatever was already written as a partial run
        write_manifest(true);
        throw;
    }

    summary["version"] = kVersion;
    writer.write_raw("summary.json", summary.dump(2) + "\n");
    write_manifest(false);

    RunManifest manifest;
    manifest.config_echo = echo;
    manifest.version = kVersion;
    manifest.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin).count();
    manifest.artifacts = writer.entries();
    return manifest;
}

inline RunManifest run_config_file(const std::filesystem::path& path,
                                   const RunOptions& options = {}) {
    return run(detail::load_json_file(path), options);
}

}  // namespace photoperceptron::experiment
