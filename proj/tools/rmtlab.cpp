// rmtlab: command-line front door for the random-matrix laboratory.
// Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 I/O error.
// Diagnostics go to stderr; data goes to files or stdout (CSV/JSON only).

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "rmt/ensembles.hpp"
#include "rmt/harness.hpp"
#include "rmt/mp_law.hpp"
#include "rmt/spectra.hpp"
#include "rmt/stats.hpp"

namespace {

std::uint64_t default_seed() {
    if (const char* env = std::getenv("RMT_LAB_SEED")) return std::stoull(env);
    return 0;
}

struct ConfigFlags {
    std::string config_path;
    std::optional<int> p, n, trials, bins, workers;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> ensembles;
    std::string out = "out";

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_path, "experiment config JSON file");
        cmd->add_option("--p", p, "row count override");
        cmd->add_option("--n", n, "column count override");
        cmd->add_option("--trials", trials, "trial count override");
        cmd->add_option("--seed", seed, "master seed override (beats RMT_LAB_SEED)");
        cmd->add_option("--ensemble", ensembles, "ensemble name override (repeatable)");
        cmd->add_option("--bins", bins, "histogram bin count override");
        cmd->add_option("--workers", workers, "worker thread count");
        cmd->add_option("--out", out, "output directory");
    }

    // config file first, flags override; the effective config is what gets
    // hashed and echoed into the artifact
    rmt::ExperimentConfig resolve(const std::string& experiment) const {
        nlohmann::json j;
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw rmt::IoError("cannot open config " + config_path);
            in >> j;
        } else {
            j["schema"] = 1;
            j["experiment"] = experiment;
            j["ensembles"] = {"gaussian", "bernoulli"};
            j["p"] = 600;
            j["n"] = 800;
            j["trials"] = 1000;
            j["master_seed"] = default_seed();
        }
        j["experiment"] = experiment;
        if (p) j["p"] = *p;
        if (n) j["n"] = *n;
        if (trials) j["trials"] = *trials;
        if (seed) j["master_seed"] = *seed;
        if (bins) j["bins"] = *bins;
        if (workers) j["workers"] = *workers;
        if (!ensembles.empty()) j["ensembles"] = ensembles;
        return rmt::config_from_json(j);
    }
};

void echo_config(const rmt::ExperimentConfig& c, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    std::ofstream out(out_dir + "/config.json");
    if (!out) throw rmt::IoError("cannot write effective config");
    out << rmt::config_to_json(c).dump(2) << "\n";
}

int run_dispatch(int argc, char** argv) {
    CLI::App app{"rmtlab: random covariance matrix laboratory"};
    app.require_subcommand(1);

    // --- sample -------------------------------------------------------------
    auto* sample_cmd = app.add_subcommand("sample", "draw one matrix and print it as CSV");
    std::string sample_ensemble = "gaussian";
    int sp = 4, sn = 6, strial = 0;
    std::uint64_t sseed = default_seed();
    sample_cmd->add_option("--ensemble", sample_ensemble, "entry law name");
    sample_cmd->add_option("--p", sp, "rows");
    sample_cmd->add_option("--n", sn, "columns");
    sample_cmd->add_option("--seed", sseed, "master seed");
    sample_cmd->add_option("--trial", strial, "trial index");

    // --- esd ----------------------------------------------------------------
    auto* esd_cmd = app.add_subcommand("esd", "eigenvalues of W = MM*/n as CSV (x, cdf)");
    std::string esd_ensemble = "gaussian";
    int ep = 300, en = 400, etrial = 0;
    std::uint64_t eseed = default_seed();
    esd_cmd->add_option("--ensemble", esd_ensemble, "entry law name");
    esd_cmd->add_option("--p", ep, "rows");
    esd_cmd->add_option("--n", en, "columns");
    esd_cmd->add_option("--seed", eseed, "master seed");
    esd_cmd->add_option("--trial", etrial, "trial index");

    // --- verify -------------------------------------------------------------
    auto* verify_cmd = app.add_subcommand("verify", "run an exact-identity verifier");
    std::string verify_op = "interlacing";
    std::string verify_ensemble = "gaussian";
    int vp = 5, vn = 8, vtrial = 0, vindex = 0;
    std::uint64_t vseed = 1;
    verify_cmd
        ->add_option("--op", verify_op,
                     "interlacing | weyl | coordinate | interlacing-identity | schur")
        ->required();
    verify_cmd->add_option("--ensemble", verify_ensemble, "entry law name");
    verify_cmd->add_option("--p", vp, "rows");
    verify_cmd->add_option("--n", vn, "columns");
    verify_cmd->add_option("--seed", vseed, "master seed");
    verify_cmd->add_option("--trial", vtrial, "trial index");
    verify_cmd->add_option("--index", vindex, "singular value index (coordinate formula)");

    // --- mp -----------------------------------------------------------------
    auto* mp_cmd = app.add_subcommand("mp", "evaluate Marchenko-Pastur closed forms");
    double mp_y = 0.5, mp_x = 1.0, mp_im = 1.0;
    std::string mp_eval = "density";
    mp_cmd->add_option("--y", mp_y, "aspect ratio in (0,1]")->required();
    mp_cmd->add_option("--eval", mp_eval,
                       "density | cdf | quantile | stieltjes | pv-edge | edges");
    mp_cmd->add_option("--x", mp_x, "evaluation point (real part for stieltjes)");
    mp_cmd->add_option("--im", mp_im, "imaginary part for stieltjes");

    // --- experiment subcommands ---------------------------------------------
    ConfigFlags fig_flags, fm_flags, gap_flags, deloc_flags, conc_flags;
    auto* fig_cmd = app.add_subcommand("figure1", "edge-universality PDF/CDF comparison");
    fig_flags.attach(fig_cmd);
    auto* fm_cmd = app.add_subcommand("fourmoment", "four-moment comparison experiment");
    fm_flags.attach(fm_cmd);
    auto* gaps_cmd = app.add_subcommand("gaps", "eigenvalue gap survey");
    gap_flags.attach(gaps_cmd);
    auto* deloc_cmd = app.add_subcommand("deloc", "singular vector delocalization survey");
    deloc_flags.attach(deloc_cmd);
    auto* conc_cmd = app.add_subcommand("concentration", "interval count concentration survey");
    conc_flags.attach(conc_cmd);

    // --- merge --------------------------------------------------------------
    auto* merge_cmd = app.add_subcommand("merge", "merge run artifacts of one config");
    std::vector<std::string> merge_inputs;
    std::string merge_out = "merged.jsonl";
    merge_cmd->add_option("inputs", merge_inputs, "record files")->required();
    merge_cmd->add_option("--out", merge_out, "merged output path");

    CLI11_PARSE(app, argc, argv);

    if (sample_cmd->parsed()) {
        const auto spec = rmt::parse_spec(sample_ensemble);
        const auto M = rmt::sample_matrix(spec, sp, sn, sseed, strial);
        for (int i = 0; i < M.p; ++i) {
            for (int j = 0; j < M.n; ++j) {
                const auto z = M.entries(i, j);
                std::cout << (j ? "," : "") << rmt::f12(z.real());
                if (!spec.is_real()) std::cout << "+" << rmt::f12(z.imag()) << "i";
            }
            std::cout << "\n";
        }
        return 0;
    }

    if (esd_cmd->parsed()) {
        const auto spec = rmt::parse_spec(esd_ensemble);
        const auto M = rmt::sample_matrix(spec, ep, en, eseed, etrial);
        const auto lam = rmt::covariance_spectrum(M);
        std::cout << "x,cdf\n";
        for (std::size_t i = 0; i < lam.size(); ++i)
            std::cout << rmt::f12(lam[i]) << ","
                      << rmt::f12(static_cast<double>(i + 1) / lam.size()) << "\n";
        return 0;
    }

    if (verify_cmd->parsed()) {
        const auto spec = rmt::parse_spec(verify_ensemble);
        const auto M = rmt::sample_matrix(spec, vp, vn, vseed, vtrial);
        nlohmann::json out;
        if (verify_op == "interlacing") {
            const auto rep = rmt::verify_interlacing_law(M);
            out = {{"check", rep.check}, {"max_violation", rep.max_violation}};
        } else if (verify_op == "weyl") {
            const auto N = rmt::sample_matrix(spec, vp, vn, vseed + 1, vtrial);
            const auto rep = rmt::verify_weyl(M, N);
            out = {{"check", rep.check}, {"max_violation", rep.max_violation}};
        } else if (verify_op == "coordinate") {
            out = {{"check", "coordinate_formula"},
                   {"residual", rmt::verify_coordinate_formula(M, vindex)}};
        } else if (verify_op == "interlacing-identity") {
            const auto rep = rmt::verify_interlacing_identity(M);
            out = {{"check", rep.check}, {"max_violation", rep.max_violation}};
        } else if (verify_op == "schur") {
            const Eigen::MatrixXcd H =
                (M.entries * M.entries.adjoint()) / static_cast<double>(M.n);
            out = {{"check", "schur_stieltjes"},
                   {"residual", rmt::verify_schur_stieltjes(H, {2.0, 1.0})}};
        } else {
            std::cerr << "unknown verifier: " << verify_op << "\n";
            return 1;
        }
        std::cout << out.dump(2) << "\n";
        return 0;
    }

    if (mp_cmd->parsed()) {
        const rmt::MPModel model(mp_y);
        if (mp_eval == "density") {
            std::cout << rmt::f17(rmt::density(model, mp_x)) << "\n";
        } else if (mp_eval == "cdf") {
            std::cout << rmt::f17(rmt::cdf(model, mp_x)) << "\n";
        } else if (mp_eval == "quantile") {
            std::cout << rmt::f17(rmt::quantile(model, mp_x)) << "\n";
        } else if (mp_eval == "stieltjes") {
            const auto s = rmt::stieltjes(model, {mp_x, mp_im});
            std::cout << rmt::f17(s.real()) << " " << rmt::f17(s.imag()) << "\n";
        } else if (mp_eval == "pv-edge") {
            std::cout << rmt::f17(rmt::pv_edge_integral(model, mp_x)) << "\n";
        } else if (mp_eval == "edges") {
            std::cout << rmt::f17(model.a) << " " << rmt::f17(model.b) << "\n";
        } else {
            std::cerr << "unknown --eval: " << mp_eval << "\n";
            return 1;
        }
        return 0;
    }

    if (fig_cmd->parsed()) {
        const auto config = fig_flags.resolve("figure1");
        echo_config(config, fig_flags.out);
        const auto files = rmt::figure1(config, fig_flags.out);
        std::cerr << "figure1: ks=" << files.ks << " pdf=" << files.pdf_csv
                  << " cdf=" << files.cdf_csv << "\n";
        return 0;
    }

    auto run_experiment = [&](const ConfigFlags& flags, const std::string& kind) {
        const auto config = flags.resolve(kind);
        echo_config(config, flags.out);
        const auto art = rmt::run(config, flags.out + "/records.jsonl");
        std::cerr << kind << ": " << art.records.size() << " records, summary "
                  << art.summary_path << "\n";
    };
    if (fm_cmd->parsed()) {
        run_experiment(fm_flags, "fourmoment");
        return 0;
    }
    if (gaps_cmd->parsed()) {
        run_experiment(gap_flags, "gaps");
        return 0;
    }
    if (deloc_cmd->parsed()) {
        run_experiment(deloc_flags, "deloc");
        return 0;
    }
    if (conc_cmd->parsed()) {
        run_experiment(conc_flags, "concentration");
        return 0;
    }

    if (merge_cmd->parsed()) {
        const auto art = rmt::merge(merge_inputs, merge_out);
        std::cerr << "merged " << art.records.size() << " records into " << merge_out
                  << "\n";
        return 0;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_dispatch(argc, argv);
    } catch (const rmt::IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return 3;
    } catch (const rmt::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
