#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "rmt/harness.hpp"

using namespace rmt;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_config(const std::string& experiment, int trials = 6) {
    ExperimentConfig c;
    c.experiment = experiment;
    c.ensembles = {"gaussian", "bernoulli"};
    c.p = 6;
    c.n = 8;
    c.trials = trials;
    c.master_seed = 123;
    c.workers = 1;
    return c;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::vector<std::string> bodies(const RunArtifact& a) {
    std::vector<std::string> out;
    for (const auto& r : a.records) out.push_back(r.body());
    return out;
}

struct TempDir {
    fs::path path;
    TempDir(const std::string& tag) : path(fs::temp_directory_path() / ("rmtlab_" + tag)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("config json round-trip, unknown-field rejection, worker-free hash") {
    auto c = small_config("figure1");
    auto j = config_to_json(c);
    auto back = config_from_json(j);
    CHECK(config_hash(back) == config_hash(c));
    j["surprise"] = 1;
    CHECK_THROWS_AS(config_from_json(j), std::invalid_argument);

    auto c8 = c;
    c8.workers = 8;
    CHECK(config_hash(c8) == config_hash(c));
    auto c2 = c;
    c2.master_seed = 124;
    CHECK(config_hash(c2) != config_hash(c));

    auto bad = c;
    bad.experiment = "no-such";
    CHECK_THROWS_AS(bad.check(), std::invalid_argument);
    bad = c;
    bad.p = 10;  // p > n
    CHECK_THROWS_AS(bad.check(), std::invalid_argument);
}

TEST_CASE("record body excludes wall time and round-trips through json") {
    RunRecord r;
    r.trial = 3;
    r.ensemble = "gaussian";
    r.stats["tw"] = -1.25;
    r.wall_ms = 17.0;
    CHECK(r.body().find("wall_ms") == std::string::npos);
    CHECK(r.line().find("wall_ms") != std::string::npos);
    auto back = RunRecord::parse(nlohmann::json::parse(r.line()));
    CHECK(back.body() == r.body());
    CHECK(back.wall_ms == 17.0);
}

TEST_CASE("compute_record is a pure function of (config, spec, trial)") {
    auto c = small_config("figure1");
    auto spec = parse_spec("gaussian");
    auto a = compute_record(c, spec, 2);
    auto b = compute_record(c, spec, 2);
    CHECK(a.body() == b.body());
    CHECK(a.body() != compute_record(c, spec, 3).body());
}

TEST_CASE("runs are deterministic: identical summaries across repeats and workers") {
    TempDir td("det");
    auto c = small_config("figure1", 8);
    auto a1 = run(c, td.file("a.jsonl"));
    auto a2 = run(c, td.file("b.jsonl"));
    CHECK(bodies(a1) == bodies(a2));
    CHECK(slurp(a1.summary_path) == slurp(a2.summary_path));

    auto c8 = c;
    c8.workers = 8;
    auto a8 = run(c8, td.file("c.jsonl"));
    CHECK(bodies(a1) == bodies(a8));
    CHECK(slurp(a1.summary_path) == slurp(a8.summary_path));
}

TEST_CASE("interrupted runs resume without recomputation drift") {
    TempDir td("resume");
    auto c = small_config("mp_convergence", 6);
    auto full = run(c, td.file("full.jsonl"));

    // simulate an interruption: keep the header and the first four records
    std::istringstream in(slurp(td.file("full.jsonl")));
    std::ofstream part(td.file("part.jsonl"));
    std::string line;
    for (int k = 0; k < 5 && std::getline(in, line); ++k) part << line << "\n";
    part.close();
    auto resumed = run(c, td.file("part.jsonl"));
    CHECK(bodies(resumed) == bodies(full));
    CHECK(slurp(resumed.summary_path) == slurp(full.summary_path));

    // completed artifact: resuming is a no-op
    auto again = run(c, td.file("part.jsonl"));
    CHECK(bodies(again) == bodies(full));

    // config mismatch against an existing artifact is refused
    auto c2 = c;
    c2.master_seed = 999;
    CHECK_THROWS_AS(run(c2, td.file("part.jsonl")), IoError);
}

TEST_CASE("merge of a split run reproduces the unsplit summary") {
    TempDir td("merge");
    auto c = small_config("gaps", 6);
    auto full = run(c, td.file("full.jsonl"));

    // split the records into two artifacts sharing the header
    std::istringstream in(slurp(td.file("full.jsonl")));
    std::string header, line;
    std::getline(in, header);
    std::ofstream p1(td.file("p1.jsonl")), p2(td.file("p2.jsonl"));
    p1 << header << "\n";
    p2 << header << "\n";
    int k = 0;
    while (std::getline(in, line))
        ((k++ % 2) ? p1 : p2) << line << "\n";
    p1.close();
    p2.close();

    auto merged = merge({td.file("p1.jsonl"), td.file("p2.jsonl")}, td.file("m.jsonl"));
    CHECK(bodies(merged) == bodies(full));
    CHECK(slurp(merged.summary_path) == slurp(full.summary_path));

    // overlapping inputs with identical bodies are fine (idempotent)
    auto merged2 =
        merge({td.file("m.jsonl"), td.file("p1.jsonl")}, td.file("m2.jsonl"));
    CHECK(bodies(merged2) == bodies(full));
}

TEST_CASE("merge refuses conflicting duplicates and mismatched configs") {
    TempDir td("conflict");
    auto c = small_config("gaps", 3);
    run(c, td.file("a.jsonl"));

    // corrupt one record's stats in a copy
    std::istringstream in(slurp(td.file("a.jsonl")));
    std::ofstream bad(td.file("bad.jsonl"));
    std::string line;
    bool done = false;
    while (std::getline(in, line)) {
        if (!done && line.find("\"min_gap\":") != std::string::npos) {
            auto pos = line.find("\"min_gap\":");
            line.replace(pos, 10 + 1, "\"min_gap\":9");
            done = true;
        }
        bad << line << "\n";
    }
    bad.close();
    REQUIRE(done);
    CHECK_THROWS_AS(merge({td.file("a.jsonl"), td.file("bad.jsonl")}, td.file("m.jsonl")),
                    IoError);

    auto c2 = c;
    c2.master_seed = 7;
    run(c2, td.file("other.jsonl"));
    CHECK_THROWS_AS(
        merge({td.file("a.jsonl"), td.file("other.jsonl")}, td.file("m.jsonl")), IoError);
}

TEST_CASE("figure1 emits aligned csv columns with unit-mass pdfs") {
    TempDir td("fig");
    auto c = small_config("figure1", 20);
    c.bins = 10;
    auto files = figure1(c, td.file("out"));
    CHECK(files.ks >= 0.0);
    CHECK(files.ks <= 1.0);

    // pdf columns integrate to one over shared bins
    std::istringstream pdf(slurp(files.pdf_csv));
    std::string line;
    std::getline(pdf, line);  // header
    CHECK(line == "x,pdf_gaussian,pdf_bernoulli");
    std::vector<double> xs, pa, pb;
    while (std::getline(pdf, line)) {
        double x, a, b;
        REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf", &x, &a, &b) == 3);
        xs.push_back(x), pa.push_back(a), pb.push_back(b);
    }
    REQUIRE(xs.size() == 10);
    const double w = xs[1] - xs[0];
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) ma += pa[i] * w, mb += pb[i] * w;
    CHECK(ma == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(mb == doctest::Approx(1.0).epsilon(1e-9));

    // cdf columns are monotone and end at one
    std::istringstream cdf(slurp(files.cdf_csv));
    std::getline(cdf, line);
    CHECK(line == "x,cdf_gaussian,cdf_bernoulli");
    double la = 0.0, lb = 0.0, x, a, b;
    int rows = 0;
    while (std::getline(cdf, line)) {
        REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf", &x, &a, &b) == 3);
        CHECK(a >= la);
        CHECK(b >= lb);
        la = a, lb = b;
        ++rows;
    }
    CHECK(rows > 0);
    CHECK(la == doctest::Approx(1.0));
    CHECK(lb == doctest::Approx(1.0));

    CHECK_THROWS_AS(figure1(small_config("gaps"), td.file("bad")), std::invalid_argument);
}

TEST_CASE("matched seeds: identical ensembles give identical trial statistics") {
    auto c = small_config("fourmoment", 4);
    c.ensembles = {"gaussian", "gaussian"};
    auto ga = parse_spec("gaussian");
    for (int t = 0; t < 4; ++t) {
        auto a = compute_record(c, ga, t);
        auto b = compute_record(c, ga, t);
        CHECK(a.stats.at("g") == b.stats.at("g"));
    }
}

TEST_CASE("deloc and concentration experiments populate their statistics") {
    TempDir td("misc");
    auto cd = small_config("deloc", 3);
    auto ad = run(cd, td.file("d.jsonl"));
    for (const auto& r : ad.records) {
        CHECK(r.status == "ok");
        CHECK(r.stats.at("deloc") >= 1.0);  // unit vectors force the floor
    }
    auto cc = small_config("concentration", 3);
    auto ac = run(cc, td.file("c.jsonl"));
    for (const auto& r : ac.records) CHECK(r.stats.count("max_dev") == 1);
    CHECK(ac.summary.at("ensembles").at("gaussian").contains("median_max_dev"));
}

TEST_CASE("full_records persists the eigenvalue list") {
    auto c = small_config("mp_convergence", 1);
    c.full_records = true;
    auto r = compute_record(c, parse_spec("gaussian"), 0);
    REQUIRE(r.lambdas.size() == 6);
    auto back = RunRecord::parse(nlohmann::json::parse(r.line()));
    CHECK(back.lambdas == r.lambdas);
}
