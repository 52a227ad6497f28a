#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "rmt/ensembles.hpp"
#include "rmt/rng.hpp"

using namespace rmt;

namespace {

// Brute-force mixed moment E[Re^m Im^l] over an explicit complex atom list,
// used as an independent check of the recursive moment machinery.
double brute_moment(const std::vector<std::pair<std::complex<double>, double>>& atoms,
                    int m, int l) {
    double acc = 0.0;
    for (const auto& [v, p] : atoms)
        acc += p * std::pow(v.real(), m) * std::pow(v.imag(), l);
    return acc;
}

std::vector<std::pair<std::complex<double>, double>> cross_atoms(const DistributionSpec& s) {
    std::vector<std::pair<std::complex<double>, double>> out;
    for (const auto& re : s.re_atoms)
        for (const auto& im : s.im_atoms)
            out.push_back({{re.value, im.value}, re.prob * im.prob});
    return out;
}

}  // namespace

TEST_CASE("real atomic moments agree with direct summation") {
    auto b = rademacher();
    CHECK(moments(b, 1, 0) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(moments(b, 2, 0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(moments(b, 3, 0) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(moments(b, 4, 0) == doctest::Approx(1.0).epsilon(1e-14));
    // any Im factor kills the moment of a real law
    CHECK(moments(b, 1, 1) == 0.0);
    CHECK(moments(b, 2, 2) == 0.0);
    CHECK(moments(b, 0, 2) == 0.0);
}

TEST_CASE("gaussian moments: 0,1,0,3 plus mixed-index values") {
    auto g = gaussian_real();
    CHECK(moments(g, 1, 0) == doctest::Approx(0.0));
    CHECK(moments(g, 2, 0) == doctest::Approx(1.0));
    CHECK(moments(g, 3, 0) == doctest::Approx(0.0));
    CHECK(moments(g, 4, 0) == doctest::Approx(3.0));

    auto gc = gaussian_complex();
    CHECK(moments(gc, 1, 0) == 0.0);
    CHECK(moments(gc, 2, 0) == doctest::Approx(0.5));  // Re and Im each N(0, 1/2)
    CHECK(moments(gc, 0, 2) == doctest::Approx(0.5));
    CHECK(moments(gc, 1, 1) == 0.0);
    CHECK(moments(gc, 2, 2) == doctest::Approx(0.25));
    CHECK(moments(gc, 4, 0) == doctest::Approx(0.75));  // 3 * (1/2)^2
    // E|xi|^2 = 1 and E|xi|^4 = 2 assembled from the mixed table
    CHECK(moments(gc, 2, 0) + moments(gc, 0, 2) == doctest::Approx(1.0));
    CHECK(moments(gc, 4, 0) + 2.0 * moments(gc, 2, 2) + moments(gc, 0, 4) ==
          doctest::Approx(2.0));
}

TEST_CASE("complex atomic moments agree with cross-product brute force") {
    std::mt19937_64 rd(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int rep = 0; rep < 20; ++rep) {
        // random two-atom symmetric laws on each part, then C-normalize
        double v = 0.3 + 0.5 * std::abs(u(rd));
        std::vector<Atom> re = {{-v, 0.5}, {v, 0.5}};
        double w = 0.3 + 0.5 * std::abs(u(rd));
        std::vector<Atom> im = {{-w, 0.5}, {w, 0.5}};
        // rescale to Re^2 = Im^2 = 1/2
        for (auto& a : re) a.value *= std::sqrt(0.5) / v;
        for (auto& a : im) a.value *= std::sqrt(0.5) / w;
        auto spec = atomic_complex(re, im, "test-atomic");
        auto flat = cross_atoms(spec);
        for (int m = 0; m <= 4; ++m)
            for (int l = 0; m + l <= 4; ++l) {
                auto got = moments(spec, m, l);
                auto want = brute_moment(flat, m, l);
                CHECK(std::abs(got - want) < 1e-13);
            }
    }
}

TEST_CASE("match_third_order hits requested third moment exactly") {
    std::mt19937_64 rd(11);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int rep = 0; rep < 100; ++rep) {
        double m3 = u(rd);
        auto spec = match_third_order(m3);
        CHECK(std::abs(moments(spec, 1, 0)) < 1e-12);
        CHECK(std::abs(moments(spec, 2, 0) - 1.0) < 1e-12);
        CHECK(std::abs(moments(spec, 3, 0) - m3) < 1e-12);
    }
}

TEST_CASE("match_fourth_order_gaussian reproduces 0,1,0,3") {
    auto spec = match_fourth_order_gaussian();
    CHECK(std::abs(moments(spec, 1, 0)) < 1e-14);
    CHECK(std::abs(moments(spec, 2, 0) - 1.0) < 1e-14);
    CHECK(std::abs(moments(spec, 3, 0)) < 1e-14);
    CHECK(std::abs(moments(spec, 4, 0) - 3.0) < 1e-14);
}

TEST_CASE("gaussian-divisible law keeps unit variance, interpolates kurtosis") {
    auto base = rademacher();
    // x = sqrt(1-t) b + sqrt(t) g; fourth moment = (1-t)^2*1 + 6t(1-t)/2... do
    // the binomial expansion by hand for t = 1/2:
    //   E[x^4] = (1/4)*1 + 6*(1/4)*1*1 + (1/4)*3 = 1/4 + 3/2 + 3/4 = 5/2
    auto mix = gaussian_divisible(0.5, base);
    CHECK(std::abs(moments(mix, 1, 0)) < 1e-14);
    CHECK(moments(mix, 2, 0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(moments(mix, 4, 0) == doctest::Approx(2.5).epsilon(1e-13));
}

TEST_CASE("truncated gaussian: approximate moments and clean pass-through") {
    // bounded base is returned unchanged
    auto b = rademacher();
    auto tb = truncated(b, 5.0);
    CHECK(tb.kind == b.kind);
    CHECK(std::abs(moments(tb, 4, 0) - 1.0) < 1e-14);

    // truncated gaussian second moment from the closed recurrence:
    // m2 = 1 - 2K phi(K)/erf(K/sqrt2); cross-check against numeric integration
    double K = 1.5;
    auto tg = truncated(gaussian_real(), K);
    double Z = std::erf(K / std::sqrt(2.0));
    double phiK = std::exp(-0.5 * K * K) / std::sqrt(2.0 * M_PI);
    double want_m2 = 1.0 - 2.0 * K * phiK / Z;
    CHECK(moments(tg, 2, 0) == doctest::Approx(want_m2).epsilon(1e-12));

    // numeric oracle: midpoint rule on [-K, K]
    double num = 0.0;
    int panels = 200000;
    for (int i = 0; i < panels; ++i) {
        double x = -K + (i + 0.5) * (2.0 * K / panels);
        num += x * x * std::exp(-0.5 * x * x);
    }
    num *= (2.0 * K / panels) / (std::sqrt(2.0 * M_PI) * Z);
    CHECK(moments(tg, 2, 0) == doctest::Approx(num).epsilon(1e-8));
}

TEST_CASE("truncate picks bound n^{10/C0}") {
    auto spec = truncate(gaussian_real(), 40.0, 256);
    CHECK(spec.bound == doctest::Approx(std::pow(256.0, 0.25)));
}

TEST_CASE("empirical moments of samplers match analytic moments") {
    std::vector<DistributionSpec> specs = {
        gaussian_real(),   gaussian_complex(),
        rademacher(),      match_fourth_order_gaussian(),
        match_third_order(1.25),
        gaussian_divisible(0.3, rademacher()),
    };
    const int N = 400000;
    for (const auto& spec : specs) {
        CAPTURE(spec.name);
        double s10 = 0, s20 = 0, s30 = 0, s40 = 0, s11 = 0, s02 = 0, s22 = 0;
        for (int i = 0; i < N; ++i) {
            CounterStream cs(CounterStream::derive_key(99, 0, i, 0));
            auto x = sample(spec, cs);
            const double re = x.real(), im = x.imag();
            s10 += re;
            s20 += re * re;
            s30 += re * re * re;
            s40 += re * re * re * re;
            s11 += re * im;
            s02 += im * im;
            s22 += re * re * im * im;
        }
        const double inv = 1.0 / N, se = 1.0 / std::sqrt(double(N));
        // generous multiples of the standard error; these laws have O(1) tails
        CHECK(std::abs(s10 * inv - moments(spec, 1, 0)) < 6.0 * se);
        CHECK(std::abs(s20 * inv - moments(spec, 2, 0)) < 10.0 * se);
        CHECK(std::abs(s30 * inv - moments(spec, 3, 0)) < 25.0 * se);
        CHECK(std::abs(s40 * inv - moments(spec, 4, 0)) < 60.0 * se);
        CHECK(std::abs(s11 * inv - moments(spec, 1, 1)) < 10.0 * se);
        CHECK(std::abs(s02 * inv - moments(spec, 0, 2)) < 10.0 * se);
        CHECK(std::abs(s22 * inv - moments(spec, 2, 2)) < 30.0 * se);
    }
}

TEST_CASE("truncated sampler respects the bound and acceptance rate") {
    double K = 2.0;
    auto tg = truncated(gaussian_real(), K);
    int N = 200000;
    int dummy_inside = 0;
    for (int i = 0; i < N; ++i) {
        CounterStream cs(CounterStream::derive_key(5, 1, i, 0));
        auto x = sample(tg, cs);
        CHECK(std::abs(x.imag()) == 0.0);
        REQUIRE(std::abs(x.real()) <= K);
        if (std::abs(x.real()) <= K) ++dummy_inside;
    }
    CHECK(dummy_inside == N);
}

TEST_CASE("samples are deterministic functions of (seed, trial, i, j)") {
    auto spec = gaussian_complex();
    CounterStream a(CounterStream::derive_key(42, 7, 3, 9));
    CounterStream b(CounterStream::derive_key(42, 7, 3, 9));
    auto xa = sample(spec, a);
    auto xb = sample(spec, b);
    CHECK(xa == xb);

    CounterStream c(CounterStream::derive_key(42, 7, 3, 10));
    CHECK(sample(spec, c) != xa);
}

TEST_CASE("sample_matrix is order-free: entries independent of traversal") {
    auto spec = gaussian_real();
    auto M = sample_matrix(spec, 4, 6, 42, 3);
    // regenerate one entry in isolation
    CounterStream cs(CounterStream::derive_key(42, 3, 2, 5));
    auto x = sample(spec, cs);
    CHECK(M.entries(2, 5) == x);
    CHECK(M.p == 4);
    CHECK(M.n == 6);
}

TEST_CASE("matrix entries are unit variance across a large matrix") {
    auto spec = rademacher();
    auto M = sample_matrix(spec, 100, 200, 17, 0);
    double s2 = M.entries.squaredNorm() / (100.0 * 200.0);
    CHECK(s2 == doctest::Approx(1.0).epsilon(1e-12));  // Rademacher: |x| = 1 always
}

TEST_CASE("spec validation rejects malformed atom lists") {
    std::vector<Atom> bad = {{1.0, 0.6}, {-1.0, 0.6}};  // probs sum 1.2
    CHECK_THROWS_AS(atomic_real(bad, "bad"), std::invalid_argument);
    std::vector<Atom> biased = {{0.5, 0.5}, {1.5, 0.5}};  // mean 1
    CHECK_THROWS_AS(atomic_real(biased, "biased"), std::invalid_argument);
}

TEST_CASE("moments beyond fourth order are refused") {
    CHECK_THROWS_AS(moments(gaussian_real(), 5, 0), std::invalid_argument);
    CHECK_THROWS_AS(moments(gaussian_complex(), 3, 2), std::invalid_argument);
}

TEST_CASE("parse_spec handles the documented ensemble names") {
    CHECK(parse_spec("gaussian").kind == Kind::GaussianReal);
    CHECK(parse_spec("gaussian-complex").kind == Kind::GaussianComplex);
    CHECK(parse_spec("bernoulli").kind == Kind::Rademacher);
    auto g4 = parse_spec("gauss4");
    CHECK(std::abs(moments(g4, 4, 0) - 3.0) < 1e-13);
    auto m3 = parse_spec("m3:0.75");
    CHECK(std::abs(moments(m3, 3, 0) - 0.75) < 1e-12);
    auto gd = parse_spec("gauss-div:t=0.5:base=bernoulli");
    CHECK(std::abs(moments(gd, 4, 0) - 2.5) < 1e-12);
    auto tr = parse_spec("trunc:K=2.0:base=gaussian");
    CHECK(tr.bound == doctest::Approx(2.0));
    CHECK_THROWS_AS(parse_spec("no-such-ensemble"), std::invalid_argument);
}

TEST_CASE("spec JSON round-trip preserves moments and sampling") {
    auto spec = gaussian_divisible(0.25, match_third_order(0.5));
    auto j = to_json(spec);
    auto back = spec_from_json(j);
    for (int m = 0; m <= 4; ++m)
        for (int l = 0; m + l <= 4; ++l)
            CHECK(std::abs(moments(spec, m, l) - moments(back, m, l)) < 1e-14);
    CounterStream a(CounterStream::derive_key(3, 0, 0, 0)), b(CounterStream::derive_key(3, 0, 0, 0));
    CHECK(sample(spec, a) == sample(back, b));
}
