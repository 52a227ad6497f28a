#pragma once

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "rmt/common.hpp"
#include "rmt/ensembles.hpp"
#include "rmt/mp_law.hpp"
#include "rmt/spectra.hpp"
#include "rmt/stats.hpp"

namespace rmt {

// %.17g float formatting used for all record fields
inline std::string f17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string f12(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

struct ExperimentConfig {
    int schema = 1;
    std::string experiment;  // figure1|fourmoment|gaps|deloc|concentration|mp_convergence
    std::vector<std::string> ensembles;
    int p = 0;
    int n = 0;
    int trials = 1;
    std::uint64_t master_seed = 0;
    int bins = 40;
    double interval_len = 0.2;
    std::vector<int> indices = {1};  // eigenvalue indices for fourmoment, 1-based
    double g_scale = 0.0;            // 0 selects n * (MP quantile spacing)
    double gap_threshold_c = 1.0;    // gap survey flags min normalized gap < n^{-c}
    double deloc_threshold = 0.0;    // 0 selects 10 * log n
    bool full_records = false;       // persist per-trial eigenvalue lists
    int workers = 1;

    void check() const {
        static const std::set<std::string> kinds{"figure1",      "fourmoment", "gaps",
                                                 "deloc",        "concentration",
                                                 "mp_convergence"};
        if (schema != 1) throw std::invalid_argument("config: unsupported schema");
        if (!kinds.count(experiment))
            throw std::invalid_argument("config: unknown experiment '" + experiment + "'");
        if (ensembles.empty()) throw std::invalid_argument("config: no ensembles");
        if (trials < 1) throw std::invalid_argument("config: trials must be >= 1");
        if (p < 1 || p > n) throw std::invalid_argument("config: need 1 <= p <= n");
        if (workers < 1) throw std::invalid_argument("config: workers must be >= 1");
        for (const auto& e : ensembles) parse_spec(e);  // must resolve
        for (int i : indices)
            if (i < 1 || i > p) throw std::invalid_argument("config: index out of range");
    }
};

inline nlohmann::json config_to_json(const ExperimentConfig& c, bool include_workers = true) {
    nlohmann::json j;
    j["schema"] = c.schema;
    j["experiment"] = c.experiment;
    j["ensembles"] = c.ensembles;
    j["p"] = c.p;
    j["n"] = c.n;
    j["trials"] = c.trials;
    j["master_seed"] = c.master_seed;
    j["bins"] = c.bins;
    j["interval_len"] = c.interval_len;
    j["indices"] = c.indices;
    j["g_scale"] = c.g_scale;
    j["gap_threshold_c"] = c.gap_threshold_c;
    j["deloc_threshold"] = c.deloc_threshold;
    j["full_records"] = c.full_records;
    if (include_workers) j["workers"] = c.workers;
    return j;
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
    static const std::set<std::string> known{
        "schema",     "experiment",      "ensembles",   "p",           "n",
        "trials",     "master_seed",     "bins",        "interval_len", "indices",
        "g_scale",    "gap_threshold_c", "deloc_threshold", "full_records", "workers"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key()))
            throw std::invalid_argument("config: unknown field '" + it.key() + "'");
    ExperimentConfig c;
    c.schema = j.at("schema").get<int>();
    c.experiment = j.at("experiment").get<std::string>();
    c.ensembles = j.at("ensembles").get<std::vector<std::string>>();
    c.p = j.at("p").get<int>();
    c.n = j.at("n").get<int>();
    c.trials = j.at("trials").get<int>();
    c.master_seed = j.at("master_seed").get<std::uint64_t>();
    if (j.contains("bins")) c.bins = j.at("bins").get<int>();
    if (j.contains("interval_len")) c.interval_len = j.at("interval_len").get<double>();
    if (j.contains("indices")) c.indices = j.at("indices").get<std::vector<int>>();
    if (j.contains("g_scale")) c.g_scale = j.at("g_scale").get<double>();
    if (j.contains("gap_threshold_c"))
        c.gap_threshold_c = j.at("gap_threshold_c").get<double>();
    if (j.contains("deloc_threshold"))
        c.deloc_threshold = j.at("deloc_threshold").get<double>();
    if (j.contains("full_records")) c.full_records = j.at("full_records").get<bool>();
    if (j.contains("workers")) c.workers = j.at("workers").get<int>();
    c.check();
    return c;
}

// FNV-1a over the canonical config dump, workers excluded: execution layout
// never changes an experiment's identity
inline std::string config_hash(const ExperimentConfig& c) {
    const std::string dump = config_to_json(c, false).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : dump) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// One Monte Carlo trial's statistics. The body (everything except wall_ms) is
// a pure function of (config, trial, ensemble).
struct RunRecord {
    int trial = 0;
    std::string ensemble;
    std::string status = "ok";
    std::map<std::string, double> stats;
    std::vector<double> lambdas;  // only under full_records
    double wall_ms = 0.0;

    std::string body() const {
        std::ostringstream os;
        os << "{\"type\":\"record\",\"trial\":" << trial << ",\"ensemble\":\""
           << ensemble << "\",\"status\":\"" << status << "\",\"stats\":{";
        bool first = true;
        for (const auto& [k, v] : stats) {
            if (!first) os << ",";
            first = false;
            os << "\"" << k << "\":" << f17(v);
        }
        os << "}";
        if (!lambdas.empty()) {
            os << ",\"lambdas\":[";
            for (std::size_t i = 0; i < lambdas.size(); ++i)
                os << (i ? "," : "") << f17(lambdas[i]);
            os << "]";
        }
        os << "}";
        return os.str();
    }

    std::string line() const {
        std::string b = body();
        b.pop_back();
        return b + ",\"wall_ms\":" + f17(wall_ms) + "}";
    }

    static RunRecord parse(const nlohmann::json& j) {
        RunRecord r;
        r.trial = j.at("trial").get<int>();
        r.ensemble = j.at("ensemble").get<std::string>();
        r.status = j.at("status").get<std::string>();
        for (auto it = j.at("stats").begin(); it != j.at("stats").end(); ++it)
            r.stats[it.key()] = it.value().get<double>();
        if (j.contains("lambdas")) r.lambdas = j.at("lambdas").get<std::vector<double>>();
        if (j.contains("wall_ms")) r.wall_ms = j.at("wall_ms").get<double>();
        return r;
    }
};

namespace detail {

// eigenvalues of the Gram matrix M M*/n, with a real fast path
inline std::vector<double> trial_spectrum(const DistributionSpec& spec,
                                          const MatrixSample& M, bool vectors_needed,
                                          SpectralDecomposition* decomp_out) {
    if (vectors_needed) {
        auto d = decompose(M);
        if (decomp_out) *decomp_out = d;
        return d.lambda;
    }
    std::vector<double> lam(M.p);
    if (spec.is_real()) {
        const Eigen::MatrixXd R = M.entries.real();
        const Eigen::MatrixXd gram = (R * R.transpose()) / static_cast<double>(M.n);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
        if (es.info() != Eigen::Success) throw NumericalError("trial eigensolver failed");
        for (int i = 0; i < M.p; ++i) lam[i] = es.eigenvalues()(i);
    } else {
        lam = covariance_spectrum(M);
    }
    return lam;
}

struct GParams {
    std::vector<double> center;  // MP-predicted n*lambda at each index
    std::vector<double> scale;
};

inline GParams g_params(const ExperimentConfig& c) {
    const MPModel model(static_cast<double>(c.p) / c.n);
    GParams g;
    for (int idx : c.indices) {
        const double qm = (idx - 0.5) / c.p;
        const double qlo = std::max(0.0, (idx - 1.0) / c.p);
        const double qhi = std::min(1.0, static_cast<double>(idx) / c.p);
        g.center.push_back(c.n * quantile(model, qm));
        const double spacing = quantile(model, qhi) - quantile(model, qlo);
        g.scale.push_back(c.g_scale > 0.0 ? c.g_scale : c.n * spacing);
    }
    return g;
}

}  // namespace detail

// statistics for one (ensemble, trial) cell; pure in its arguments
inline RunRecord compute_record(const ExperimentConfig& c, const DistributionSpec& spec,
                                int trial) {
    RunRecord r;
    r.trial = trial;
    r.ensemble = spec.name;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        const bool need_vectors = (c.experiment == "deloc");
        const MatrixSample M = sample_matrix(spec, c.p, c.n, c.master_seed, trial);
        SpectralDecomposition d;
        const std::vector<double> lam =
            detail::trial_spectrum(spec, M, need_vectors, &d);

        if (c.experiment == "figure1") {
            const double smin2 = static_cast<double>(c.n) * lam.front();
            r.stats["sigma_min_sq"] = smin2;
            r.stats["tw"] = tw_normalize(smin2, c.p, c.n);
        } else if (c.experiment == "fourmoment") {
            const auto gp = detail::g_params(c);
            double g = 1.0;
            for (std::size_t k = 0; k < c.indices.size(); ++k) {
                const double x = c.n * lam[c.indices[k] - 1];
                const double zc = (x - gp.center[k]) / gp.scale[k];
                g *= std::exp(-0.5 * zc * zc);
                r.stats["x" + std::to_string(c.indices[k])] = x;
            }
            r.stats["g"] = g;
        } else if (c.experiment == "gaps") {
            const auto gs = gap_stats(lam, c.n);
            r.stats["min_gap"] = gs.min_gap;
            double mn = std::numeric_limits<double>::infinity();
            for (double g : gs.normalized_gaps) mn = std::min(mn, g);
            r.stats["min_norm_gap"] = mn;
            r.stats["edge_min_norm_gap"] =
                std::min(gs.normalized_gaps.front(), gs.normalized_gaps.back());
        } else if (c.experiment == "deloc") {
            r.stats["deloc"] = delocalization_stat(d);
        } else if (c.experiment == "concentration") {
            const MPModel model(static_cast<double>(c.p) / c.n);
            double max_dev = 0.0;
            for (const auto& rep : concentration_report(lam, model, c.interval_len))
                max_dev = std::max(max_dev, rep.deviation);
            r.stats["max_dev"] = max_dev;
        } else if (c.experiment == "mp_convergence") {
            const MPModel model(static_cast<double>(c.p) / c.n);
            double ks = 0.0;
            const double p = static_cast<double>(lam.size());
            for (std::size_t i = 0; i < lam.size(); ++i) {
                const double F = cdf(model, lam[i]);
                ks = std::max(ks, std::abs((i + 1) / p - F));
                ks = std::max(ks, std::abs(i / p - F));
            }
            r.stats["ks"] = ks;
        }
        if (c.full_records) r.lambdas = lam;
    } catch (const NumericalError&) {
        r.status = "failed";
        r.stats.clear();
    }
    r.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
    return r;
}

struct RunArtifact {
    std::string records_path;
    std::string summary_path;
    std::vector<RunRecord> records;  // sorted by (ensemble, trial)
    nlohmann::json summary;
};

namespace detail {

inline void sort_records(std::vector<RunRecord>& recs) {
    std::sort(recs.begin(), recs.end(), [](const RunRecord& a, const RunRecord& b) {
        if (a.ensemble != b.ensemble) return a.ensemble < b.ensemble;
        return a.trial < b.trial;
    });
}

inline nlohmann::json summarize(const ExperimentConfig& c,
                                const std::vector<RunRecord>& recs) {
    nlohmann::json s;
    s["config"] = config_to_json(c, false);
    s["config_hash"] = config_hash(c);
    long failed = 0;
    for (const auto& r : recs)
        if (r.status != "ok") ++failed;
    s["records"] = recs.size();
    s["failed"] = failed;
    s["invalid"] = failed > 0 && failed * 1000 > static_cast<long>(recs.size());

    std::map<std::string, std::vector<const RunRecord*>> by_ensemble;
    for (const auto& r : recs)
        if (r.status == "ok") by_ensemble[r.ensemble].push_back(&r);

    auto moments_of = [](const std::vector<const RunRecord*>& rs, const std::string& key) {
        double mean = 0.0, m2 = 0.0;
        long k = 0;
        for (const auto* r : rs) {
            const auto it = r->stats.find(key);
            if (it == r->stats.end()) continue;
            ++k;
            const double d = it->second - mean;
            mean += d / k;
            m2 += d * (it->second - mean);
        }
        const double var = (k > 1) ? m2 / (k - 1) : 0.0;
        return std::pair<double, double>{mean, std::sqrt(var / std::max<long>(k, 1))};
    };

    if (c.experiment == "figure1") {
        std::map<std::string, std::vector<double>> tws;
        for (const auto& [name, rs] : by_ensemble)
            for (const auto* r : rs) tws[name].push_back(r->stats.at("tw"));
        for (const auto& [name, v] : tws) {
            const auto [m, se] = moments_of(by_ensemble[name], "tw");
            s["ensembles"][name]["mean_tw"] = m;
            s["ensembles"][name]["se_tw"] = se;
            s["ensembles"][name]["count"] = v.size();
        }
        if (c.ensembles.size() >= 2 && tws.count(parse_spec(c.ensembles[0]).name) &&
            tws.count(parse_spec(c.ensembles[1]).name)) {
            const EmpiricalDistribution A(tws.at(parse_spec(c.ensembles[0]).name));
            const EmpiricalDistribution B(tws.at(parse_spec(c.ensembles[1]).name));
            s["ks_distance"] = ks_distance(A, B);
        }
    } else if (c.experiment == "fourmoment") {
        std::vector<std::string> names;
        for (const auto& e : c.ensembles) names.push_back(parse_spec(e).name);
        for (const auto& name : names) {
            if (!by_ensemble.count(name)) continue;
            const auto [m, se] = moments_of(by_ensemble[name], "g");
            s["ensembles"][name]["mean_g"] = m;
            s["ensembles"][name]["se_g"] = se;
        }
        for (std::size_t i = 0; i < names.size(); ++i)
            for (std::size_t j = i + 1; j < names.size(); ++j) {
                if (!by_ensemble.count(names[i]) || !by_ensemble.count(names[j])) continue;
                const auto [mi, si] = moments_of(by_ensemble[names[i]], "g");
                const auto [mj, sj] = moments_of(by_ensemble[names[j]], "g");
                nlohmann::json d;
                d["pair"] = {names[i], names[j]};
                d["delta"] = mi - mj;
                d["pooled_se"] = std::sqrt(si * si + sj * sj);
                s["differences"].push_back(d);
            }
    } else if (c.experiment == "gaps") {
        const double threshold = std::pow(c.n, -c.gap_threshold_c);
        for (const auto& [name, rs] : by_ensemble) {
            long below = 0;
            std::vector<double> mins;
            for (const auto* r : rs) {
                mins.push_back(r->stats.at("min_norm_gap"));
                if (r->stats.at("min_norm_gap") < threshold) ++below;
            }
            std::sort(mins.begin(), mins.end());
            s["ensembles"][name]["fraction_below_threshold"] =
                static_cast<double>(below) / mins.size();
            s["ensembles"][name]["median_min_norm_gap"] = mins[mins.size() / 2];
            s["ensembles"][name]["threshold"] = threshold;
        }
    } else if (c.experiment == "deloc") {
        const double threshold =
            c.deloc_threshold > 0.0 ? c.deloc_threshold : 10.0 * std::log(c.n);
        for (const auto& [name, rs] : by_ensemble) {
            double worst = 0.0;
            long exceed = 0;
            for (const auto* r : rs) {
                worst = std::max(worst, r->stats.at("deloc"));
                if (r->stats.at("deloc") > threshold) ++exceed;
            }
            s["ensembles"][name]["max_deloc"] = worst;
            s["ensembles"][name]["exceed_count"] = exceed;
            s["ensembles"][name]["threshold"] = threshold;
        }
    } else if (c.experiment == "concentration") {
        for (const auto& [name, rs] : by_ensemble) {
            std::vector<double> devs;
            for (const auto* r : rs) devs.push_back(r->stats.at("max_dev"));
            std::sort(devs.begin(), devs.end());
            s["ensembles"][name]["median_max_dev"] = devs[devs.size() / 2];
            s["ensembles"][name]["worst_max_dev"] = devs.back();
        }
    } else if (c.experiment == "mp_convergence") {
        for (const auto& [name, rs] : by_ensemble) {
            std::vector<double> ks;
            for (const auto* r : rs) ks.push_back(r->stats.at("ks"));
            std::sort(ks.begin(), ks.end());
            s["ensembles"][name]["median_ks"] = ks[ks.size() / 2];
            s["ensembles"][name]["max_ks"] = ks.back();
        }
    }
    return s;
}

inline std::string summary_path_for(const std::string& records_path) {
    return records_path + ".summary.json";
}

// header + records of an existing artifact; verifies the hash when expected
inline std::pair<nlohmann::json, std::vector<RunRecord>> read_artifact(
    const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty artifact " + path);
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw IoError("bad artifact header in " + path + ": " + e.what());
    }
    if (header.value("type", "") != "header")
        throw IoError("missing header line in " + path);
    std::vector<RunRecord> recs;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            recs.push_back(RunRecord::parse(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw IoError("bad record in " + path + ": " + e.what());
        }
    }
    return {header, recs};
}

}  // namespace detail

// Executes all (ensemble, trial) cells not already present in out_path,
// appending one JSONL record per cell. Safe to re-run after interruption;
// worker count never changes any record body or summary.
inline RunArtifact run(const ExperimentConfig& config, const std::string& out_path) {
    config.check();
    const std::string hash = config_hash(config);

    std::vector<RunRecord> existing;
    std::set<std::pair<std::string, int>> done;
    const bool resume = std::filesystem::exists(out_path);
    if (resume) {
        auto [header, recs] = detail::read_artifact(out_path);
        if (header.value("config_hash", "") != hash)
            throw IoError("config hash mismatch with existing artifact " + out_path);
        existing = std::move(recs);
        for (const auto& r : existing) done.insert({r.ensemble, r.trial});
    }

    std::vector<DistributionSpec> specs;
    for (const auto& e : config.ensembles) specs.push_back(parse_spec(e));

    struct Task {
        int spec_index;
        int trial;
    };
    std::vector<Task> tasks;
    for (std::size_t s = 0; s < specs.size(); ++s)
        for (int t = 0; t < config.trials; ++t)
            if (!done.count({specs[s].name, t}))
                tasks.push_back({static_cast<int>(s), t});

    std::ofstream out;
    if (!resume) {
        out.open(out_path);
        if (!out) throw IoError("cannot write " + out_path);
        nlohmann::json header;
        header["type"] = "header";
        header["schema"] = 1;
        header["config_hash"] = hash;
        header["config"] = config_to_json(config, false);
        out << header.dump() << "\n";
    } else {
        out.open(out_path, std::ios::app);
        if (!out) throw IoError("cannot append to " + out_path);
    }

    std::vector<RunRecord> fresh(tasks.size());
    std::atomic<std::size_t> next{0};
    std::mutex write_mutex;
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) break;
            RunRecord r = compute_record(config, specs[tasks[i].spec_index], tasks[i].trial);
            {
                std::lock_guard<std::mutex> lock(write_mutex);
                out << r.line() << "\n";
                out.flush();
            }
            fresh[i] = std::move(r);
        }
    };
    if (config.workers == 1 || tasks.size() <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < config.workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    RunArtifact art;
    art.records_path = out_path;
    art.records = std::move(existing);
    for (auto& r : fresh) art.records.push_back(std::move(r));
    detail::sort_records(art.records);
    art.summary = detail::summarize(config, art.records);
    art.summary_path = detail::summary_path_for(out_path);
    std::ofstream sum(art.summary_path);
    if (!sum) throw IoError("cannot write " + art.summary_path);
    sum << art.summary.dump(2) << "\n";
    return art;
}

// Deduplicated union of artifacts sharing one config hash; conflicting
// duplicate bodies are corruption and refuse to merge.
inline RunArtifact merge(const std::vector<std::string>& paths, const std::string& out_path) {
    if (paths.empty()) throw std::invalid_argument("merge: no inputs");
    nlohmann::json first_header;
    std::map<std::pair<std::string, int>, RunRecord> by_key;
    for (std::size_t k = 0; k < paths.size(); ++k) {
        auto [header, recs] = detail::read_artifact(paths[k]);
        if (k == 0) {
            first_header = header;
        } else if (header.value("config_hash", "") !=
                   first_header.value("config_hash", "-")) {
            throw IoError("merge: config hash mismatch between inputs");
        }
        for (auto& r : recs) {
            const auto key = std::make_pair(r.ensemble, r.trial);
            const auto it = by_key.find(key);
            if (it == by_key.end()) {
                by_key.emplace(key, std::move(r));
            } else if (it->second.body() != r.body()) {
                throw IoError("merge: conflicting duplicate record for trial " +
                              std::to_string(r.trial) + " ensemble " + r.ensemble);
            }
        }
    }
    const ExperimentConfig config = config_from_json(first_header.at("config"));

    RunArtifact art;
    art.records_path = out_path;
    for (auto& [key, r] : by_key) art.records.push_back(std::move(r));
    detail::sort_records(art.records);

    std::ofstream out(out_path);
    if (!out) throw IoError("cannot write " + out_path);
    out << first_header.dump() << "\n";
    for (const auto& r : art.records) out << r.line() << "\n";

    art.summary = detail::summarize(config, art.records);
    art.summary_path = detail::summary_path_for(out_path);
    std::ofstream sum(art.summary_path);
    if (!sum) throw IoError("cannot write " + art.summary_path);
    sum << art.summary.dump(2) << "\n";
    return art;
}

// Figure-1 style outputs: aligned histogram PDFs and exact ecdfs of the
// normalized smallest singular value for two ensembles, plus the run summary
// with their KS distance.
struct Figure1Files {
    std::string pdf_csv;
    std::string cdf_csv;
    std::string summary_json;
    double ks = 0.0;
};

inline Figure1Files figure1(const ExperimentConfig& config, const std::string& out_dir) {
    if (config.experiment != "figure1")
        throw std::invalid_argument("figure1: config.experiment must be 'figure1'");
    if (config.ensembles.size() != 2)
        throw std::invalid_argument("figure1: config must name exactly two ensembles");
    std::filesystem::create_directories(out_dir);
    const std::string records = out_dir + "/records.jsonl";
    RunArtifact art = run(config, records);

    std::map<std::string, std::vector<double>> tws;
    for (const auto& r : art.records)
        if (r.status == "ok") tws[r.ensemble].push_back(r.stats.at("tw"));
    const std::string nameA = parse_spec(config.ensembles[0]).name;
    const std::string nameB = parse_spec(config.ensembles[1]).name;
    if (!tws.count(nameA) || !tws.count(nameB))
        throw NumericalError("figure1: an ensemble produced no valid trials");
    EmpiricalDistribution A(tws.at(nameA)), B(tws.at(nameB));

    Figure1Files files;
    files.ks = ks_distance(A, B);
    files.summary_json = art.summary_path;

    // histograms over the pooled range so both PDF columns share bin centers
    const double lo = std::min(A.values().front(), B.values().front());
    double hi = std::max(A.values().back(), B.values().back());
    if (!(hi > lo)) hi = lo + 1.0;  // degenerate single-point samples
    const auto ha = A.histogram(config.bins, lo, hi);
    const auto hb = B.histogram(config.bins, lo, hi);
    files.pdf_csv = out_dir + "/pdf.csv";
    {
        std::ofstream out(files.pdf_csv);
        if (!out) throw IoError("cannot write " + files.pdf_csv);
        out << "x,pdf_" << nameA << ",pdf_" << nameB << "\n";
        for (int b = 0; b < config.bins; ++b) {
            const double x = 0.5 * (ha.edges[b] + ha.edges[b + 1]);
            out << f12(x) << "," << f12(ha.densities[b]) << "," << f12(hb.densities[b])
                << "\n";
        }
    }
    files.cdf_csv = out_dir + "/cdf.csv";
    {
        std::ofstream out(files.cdf_csv);
        if (!out) throw IoError("cannot write " + files.cdf_csv);
        out << "x,cdf_" << nameA << ",cdf_" << nameB << "\n";
        std::vector<double> xs = A.values();
        xs.insert(xs.end(), B.values().begin(), B.values().end());
        std::sort(xs.begin(), xs.end());
        xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
        for (double x : xs)
            out << f12(x) << "," << f12(A.ecdf(x)) << "," << f12(B.ecdf(x)) << "\n";
    }
    return files;
}

// four-moment comparison table (see summarize: per-ensemble E G and pairwise
// differences with pooled standard errors)
inline RunArtifact four_moment_experiment(const ExperimentConfig& config,
                                          const std::string& out_path) {
    if (config.experiment != "fourmoment")
        throw std::invalid_argument("four_moment_experiment: wrong experiment kind");
    if (config.ensembles.size() < 2)
        throw std::invalid_argument("four_moment_experiment: need >= 2 ensembles");
    return run(config, out_path);
}

inline RunArtifact gap_survey(const ExperimentConfig& config, const std::string& out_path) {
    if (config.experiment != "gaps")
        throw std::invalid_argument("gap_survey: wrong experiment kind");
    return run(config, out_path);
}

}  // namespace rmt
