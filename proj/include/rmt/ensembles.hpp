#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "rmt/common.hpp"
#include "rmt/rng.hpp"

namespace rmt {

enum class Kind {
    GaussianReal,
    GaussianComplex,
    Rademacher,
    AtomicReal,
    AtomicComplex,
    GaussianDivisible,
    Truncated,
};

enum class Normalization { RNormalized, CNormalized };

struct Atom {
    double value;
    double prob;
};

// Entry law of a condition-C1 ensemble: mean 0, total variance 1, with exact
// mixed moments E[Re^m Im^l] for m+l <= 4 available through moments().
// All built-in laws have independent real and imaginary parts.
struct DistributionSpec {
    Kind kind = Kind::GaussianReal;
    Normalization normalization = Normalization::RNormalized;
    std::vector<Atom> atoms;                         // AtomicReal
    std::vector<Atom> re_atoms, im_atoms;            // AtomicComplex
    double t = 0.0;                                  // GaussianDivisible
    double bound = 0.0;                              // Truncated
    std::shared_ptr<const DistributionSpec> base;    // divisible / truncated
    std::vector<double> exact_re_moments;            // optional table m = 0..4
    bool approximate_moments = false;
    std::string name;

    bool is_real() const { return normalization == Normalization::RNormalized; }
};

namespace detail {

inline double atomic_moment(const std::vector<Atom>& atoms, int m) {
    double s = 0.0;
    for (const auto& a : atoms) s += a.prob * std::pow(a.value, m);
    return s;
}

// central moment of N(0, var): var^{m/2} (m-1)!! for even m
inline double gaussian_moment(double var, int m) {
    if (m % 2 != 0) return 0.0;
    double dfact = 1.0;
    for (int k = m - 1; k > 1; k -= 2) dfact *= k;
    return dfact * std::pow(var, m / 2.0);
}

// moments of N(0,1) conditioned on |x| <= K, by the standard recurrence
// m_k = (k-1) m_{k-2} - 2 K^{k-1} phi(K) / (2 Phi(K) - 1) for even k
inline double truncated_gaussian_moment(double K, int m) {
    if (m % 2 != 0) return 0.0;
    const double phiK = std::exp(-0.5 * K * K) / std::sqrt(2.0 * M_PI);
    const double Z = std::erf(K / std::sqrt(2.0));
    double prev = 1.0;  // m_0
    double cur = 1.0;
    for (int k = 2; k <= m; k += 2) {
        cur = (k - 1) * prev - 2.0 * std::pow(K, k - 1) * phiK / Z;
        // chain: m_k depends on m_{k-2}; odd moments vanish by symmetry
        prev = cur;
    }
    return cur;
}

inline double binomial(int n, int k) {
    double c = 1.0;
    for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
    return c;
}

double re_moment(const DistributionSpec& spec, int m);
double im_moment(const DistributionSpec& spec, int l);

// E[((1-t)^{1/2} A + t^{1/2} B)^m] for independent A, B given their moments
inline double mixture_moment(double t, int m, const double* ma, const double* mb) {
    double s = 0.0;
    for (int k = 0; k <= m; ++k)
        s += binomial(m, k) * std::pow(1.0 - t, k / 2.0) * std::pow(t, (m - k) / 2.0) *
             ma[k] * mb[m - k];
    return s;
}

inline double re_moment(const DistributionSpec& spec, int m) {
    if (static_cast<std::size_t>(m) < spec.exact_re_moments.size())
        return spec.exact_re_moments[m];
    switch (spec.kind) {
        case Kind::GaussianReal: return gaussian_moment(1.0, m);
        case Kind::GaussianComplex: return gaussian_moment(0.5, m);
        case Kind::Rademacher: return (m % 2 == 0) ? 1.0 : 0.0;
        case Kind::AtomicReal: return atomic_moment(spec.atoms, m);
        case Kind::AtomicComplex: return atomic_moment(spec.re_atoms, m);
        case Kind::GaussianDivisible: {
            double ma[5], mb[5];
            const double var = spec.is_real() ? 1.0 : 0.5;
            for (int k = 0; k <= m; ++k) {
                ma[k] = re_moment(*spec.base, k);
                mb[k] = gaussian_moment(var, k);
            }
            return mixture_moment(spec.t, m, ma, mb);
        }
        case Kind::Truncated: {
            const DistributionSpec& b = *spec.base;
            if (b.kind == Kind::AtomicReal || b.kind == Kind::Rademacher) {
                std::vector<Atom> clipped;
                double mass = 0.0;
                if (b.kind == Kind::Rademacher) {
                    clipped = {{-1.0, 0.5}, {1.0, 0.5}};
                } else {
                    clipped = b.atoms;
                }
                std::vector<Atom> kept;
                for (const auto& a : clipped)
                    if (std::abs(a.value) <= spec.bound) {
                        kept.push_back(a);
                        mass += a.prob;
                    }
                if (mass <= 0.0) throw NumericalError("truncation removes all atoms");
                for (auto& a : kept) a.prob /= mass;
                return atomic_moment(kept, m);
            }
            if (b.kind == Kind::GaussianReal) return truncated_gaussian_moment(spec.bound, m);
            // complex / composite base: moments carried over, flagged approximate
            return re_moment(b, m);
        }
    }
    return 0.0;
}

inline double im_moment(const DistributionSpec& spec, int l) {
    if (spec.is_real()) return (l == 0) ? 1.0 : 0.0;
    switch (spec.kind) {
        case Kind::GaussianComplex: return gaussian_moment(0.5, l);
        case Kind::AtomicComplex: return atomic_moment(spec.im_atoms, l);
        case Kind::GaussianDivisible: {
            double ma[5], mb[5];
            for (int k = 0; k <= l; ++k) {
                ma[k] = im_moment(*spec.base, k);
                mb[k] = gaussian_moment(0.5, k);
            }
            return mixture_moment(spec.t, l, ma, mb);
        }
        case Kind::Truncated: return im_moment(*spec.base, l);
        default: return (l == 0) ? 1.0 : 0.0;
    }
}

}  // namespace detail

// exact mixed moment E[Re(zeta)^m Im(zeta)^l], m + l <= 4
inline double moments(const DistributionSpec& spec, int m, int l) {
    if (m < 0 || l < 0) throw std::invalid_argument("moments: negative order");
    if (m + l > 4) throw std::invalid_argument("moments: unsupported order > 4");
    // every built-in law is a product law Re (x) Im
    return detail::re_moment(spec, m) * detail::im_moment(spec, l);
}

inline void validate(const DistributionSpec& spec) {
    auto check_atoms = [](const std::vector<Atom>& atoms) {
        double mass = 0.0;
        for (const auto& a : atoms) {
            if (a.prob < 0.0) throw std::invalid_argument("atomic probability < 0");
            mass += a.prob;
        }
        if (std::abs(mass - 1.0) > 1e-12)
            throw std::invalid_argument("atomic probabilities do not sum to 1");
    };
    if (spec.kind == Kind::AtomicReal) check_atoms(spec.atoms);
    if (spec.kind == Kind::AtomicComplex) {
        check_atoms(spec.re_atoms);
        check_atoms(spec.im_atoms);
    }
    if (spec.kind == Kind::GaussianDivisible && (spec.t <= 0.0 || spec.t >= 1.0))
        throw std::invalid_argument("gaussian_divisible: t outside (0,1)");
    if (spec.kind == Kind::Truncated && spec.bound <= 0.0)
        throw std::invalid_argument("truncated: bound must be positive");
    // truncation conditions the law, so its table need not be 0/1-normalized
    if (!spec.approximate_moments && spec.kind != Kind::Truncated) {
        if (std::abs(moments(spec, 1, 0)) > 1e-12 || std::abs(moments(spec, 0, 1)) > 1e-12)
            throw std::invalid_argument("spec has nonzero mean");
        const double var = moments(spec, 2, 0) + moments(spec, 0, 2);
        if (std::abs(var - 1.0) > 1e-12)
            throw std::invalid_argument("spec has total variance != 1");
        if (!spec.is_real()) {
            if (std::abs(moments(spec, 2, 0) - 0.5) > 1e-12 ||
                std::abs(moments(spec, 0, 2) - 0.5) > 1e-12 ||
                std::abs(moments(spec, 1, 1)) > 1e-12)
                throw std::invalid_argument("complex spec not C-normalized");
        }
    }
}

// ---- built-in constructors -------------------------------------------------

inline DistributionSpec gaussian_real() {
    DistributionSpec s;
    s.kind = Kind::GaussianReal;
    s.name = "gaussian";
    return s;
}

inline DistributionSpec gaussian_complex() {
    DistributionSpec s;
    s.kind = Kind::GaussianComplex;
    s.normalization = Normalization::CNormalized;
    s.name = "gaussian-complex";
    return s;
}

inline DistributionSpec rademacher() {
    DistributionSpec s;
    s.kind = Kind::Rademacher;
    s.name = "bernoulli";
    return s;
}

inline DistributionSpec atomic_real(std::vector<Atom> atoms, std::string name = "atomic") {
    DistributionSpec s;
    s.kind = Kind::AtomicReal;
    s.atoms = std::move(atoms);
    s.name = std::move(name);
    validate(s);
    return s;
}

// complex product law; each part must carry variance 1/2
inline DistributionSpec atomic_complex(std::vector<Atom> re, std::vector<Atom> im,
                                       std::string name = "atomic-complex") {
    DistributionSpec s;
    s.kind = Kind::AtomicComplex;
    s.normalization = Normalization::CNormalized;
    s.re_atoms = std::move(re);
    s.im_atoms = std::move(im);
    s.name = std::move(name);
    validate(s);
    return s;
}

// Two-atom real law with mean 0, variance 1 and prescribed third moment m3.
// Atoms are the roots of x^2 - m3 x - 1, so the support radius is <= |m3| + 1.
inline DistributionSpec match_third_order(double m3) {
    if (!std::isfinite(m3)) throw std::invalid_argument("match_third_order: m3 not finite");
    const double r = std::sqrt(m3 * m3 + 4.0);
    const double a = (m3 - r) / 2.0;
    const double b = (m3 + r) / 2.0;
    std::ostringstream nm;
    nm << "m3:" << m3;
    return atomic_real({{a, b / (b - a)}, {b, -a / (b - a)}}, nm.str());
}

// Three-atom law matching the real standard Gaussian to order 4:
// {-sqrt(3): 1/6, 0: 2/3, sqrt(3): 1/6}
inline DistributionSpec match_fourth_order_gaussian() {
    const double s3 = std::sqrt(3.0);
    auto s = atomic_real({{-s3, 1.0 / 6.0}, {0.0, 2.0 / 3.0}, {s3, 1.0 / 6.0}}, "gauss4");
    // atom values are +-sqrt(3); even powers are exact integers, so pin the table
    s.exact_re_moments = {1.0, 0.0, 1.0, 0.0, 3.0};
    return s;
}

inline DistributionSpec gaussian_divisible(double t, DistributionSpec base) {
    if (!(t > 0.0 && t < 1.0))
        throw std::invalid_argument("gaussian_divisible: t outside (0,1)");
    DistributionSpec s;
    s.kind = Kind::GaussianDivisible;
    s.normalization = base.normalization;
    s.t = t;
    s.approximate_moments = base.approximate_moments;
    std::ostringstream nm;
    nm << "gauss-div:t=" << t << ":base=" << base.name;
    s.name = nm.str();
    s.base = std::make_shared<DistributionSpec>(std::move(base));
    validate(s);
    return s;
}

inline DistributionSpec truncated(DistributionSpec base, double bound) {
    if (!(bound > 0.0)) throw std::invalid_argument("truncated: bound must be positive");
    // laws already supported inside the ball are unchanged
    if (base.kind == Kind::Rademacher && bound >= 1.0) return base;
    if (base.kind == Kind::AtomicReal) {
        double radius = 0.0;
        for (const auto& a : base.atoms) radius = std::max(radius, std::abs(a.value));
        if (radius <= bound) return base;
    }
    DistributionSpec s;
    s.kind = Kind::Truncated;
    s.normalization = base.normalization;
    s.bound = bound;
    s.approximate_moments =
        !(base.kind == Kind::AtomicReal || base.kind == Kind::Rademacher);
    std::ostringstream nm;
    nm << "trunc:K=" << bound << ":base=" << base.name;
    s.name = nm.str();
    s.base = std::make_shared<DistributionSpec>(std::move(base));
    validate(s);
    return s;
}

// truncation at the C1 level K = n^{10/C0}
inline DistributionSpec truncate(const DistributionSpec& spec, double C0, int n) {
    if (!(C0 > 0.0) || n < 1) throw std::invalid_argument("truncate: need C0 > 0, n >= 1");
    return truncated(spec, std::pow(static_cast<double>(n), 10.0 / C0));
}

// radius of the support ball where one exists; 0 for unbounded laws
inline double support_radius(const DistributionSpec& spec) {
    switch (spec.kind) {
        case Kind::Rademacher: return 1.0;
        case Kind::AtomicReal: {
            double r = 0.0;
            for (const auto& a : spec.atoms) r = std::max(r, std::abs(a.value));
            return r;
        }
        case Kind::AtomicComplex: {
            double re = 0.0, im = 0.0;
            for (const auto& a : spec.re_atoms) re = std::max(re, std::abs(a.value));
            for (const auto& a : spec.im_atoms) im = std::max(im, std::abs(a.value));
            return std::hypot(re, im);
        }
        case Kind::Truncated: return spec.bound;
        default: return 0.0;
    }
}

// ---- sampling --------------------------------------------------------------

namespace detail {

inline double sample_atomic(const std::vector<Atom>& atoms, CounterStream& s) {
    double u = s.next_uniform();
    double acc = 0.0;
    for (const auto& a : atoms) {
        acc += a.prob;
        if (u <= acc) return a.value;
    }
    return atoms.back().value;
}

}  // namespace detail

inline std::complex<double> sample(const DistributionSpec& spec, CounterStream& s) {
    switch (spec.kind) {
        case Kind::GaussianReal:
            return {s.next_gaussian(), 0.0};
        case Kind::GaussianComplex: {
            const double g1 = s.next_gaussian();
            const double g2 = s.next_gaussian();
            return {g1 * M_SQRT1_2, g2 * M_SQRT1_2};
        }
        case Kind::Rademacher:
            return {s.next_uniform() < 0.5 ? -1.0 : 1.0, 0.0};
        case Kind::AtomicReal:
            return {detail::sample_atomic(spec.atoms, s), 0.0};
        case Kind::AtomicComplex: {
            const double re = detail::sample_atomic(spec.re_atoms, s);
            const double im = detail::sample_atomic(spec.im_atoms, s);
            return {re, im};
        }
        case Kind::GaussianDivisible: {
            const std::complex<double> zp = sample(*spec.base, s);
            std::complex<double> zpp;
            if (spec.is_real()) {
                zpp = {s.next_gaussian(), 0.0};
            } else {
                const double g1 = s.next_gaussian();
                const double g2 = s.next_gaussian();
                zpp = {g1 * M_SQRT1_2, g2 * M_SQRT1_2};
            }
            return std::sqrt(1.0 - spec.t) * zp + std::sqrt(spec.t) * zpp;
        }
        case Kind::Truncated: {
            // rejection keeps the law symmetric; clipping would shift the variance
            for (int it = 0; it < 1000000; ++it) {
                const std::complex<double> z = sample(*spec.base, s);
                if (std::abs(z) <= spec.bound) return z;
            }
            throw NumericalError("truncated sampling: rejection cap exceeded");
        }
    }
    return {0.0, 0.0};
}

// ---- matrix sampling -------------------------------------------------------

struct MatrixSample {
    int p = 0;
    int n = 0;
    Eigen::MatrixXcd entries;
    std::uint64_t seed = 0;
    int trial_index = 0;
    std::string spec_name;
};

inline MatrixSample sample_matrix(const DistributionSpec& spec, int p, int n,
                                  std::uint64_t seed, int trial) {
    if (p < 1 || p > n) throw std::invalid_argument("sample_matrix: need 1 <= p <= n");
    MatrixSample m;
    m.p = p;
    m.n = n;
    m.seed = seed;
    m.trial_index = trial;
    m.spec_name = spec.name;
    m.entries.resize(p, n);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < n; ++j) {
            CounterStream s(CounterStream::derive_key(seed, static_cast<std::uint64_t>(trial),
                                                      static_cast<std::uint64_t>(i),
                                                      static_cast<std::uint64_t>(j)));
            m.entries(i, j) = sample(spec, s);
        }
    return m;
}

// real view of a sample from an R-normalized law
inline Eigen::MatrixXd real_entries(const MatrixSample& m) { return m.entries.real(); }

// ---- names and serialization -----------------------------------------------

inline DistributionSpec parse_spec(const std::string& name);

namespace detail {

inline std::string kind_name(Kind k) {
    switch (k) {
        case Kind::GaussianReal: return "gaussian_real";
        case Kind::GaussianComplex: return "gaussian_complex";
        case Kind::Rademacher: return "rademacher";
        case Kind::AtomicReal: return "atomic_real";
        case Kind::AtomicComplex: return "atomic_complex";
        case Kind::GaussianDivisible: return "gaussian_divisible";
        case Kind::Truncated: return "truncated";
    }
    return "?";
}

}  // namespace detail

inline nlohmann::json to_json(const DistributionSpec& spec) {
    nlohmann::json j;
    j["kind"] = detail::kind_name(spec.kind);
    j["normalization"] = spec.is_real() ? "r_normalized" : "c_normalized";
    j["name"] = spec.name;
    auto atoms_json = [](const std::vector<Atom>& atoms) {
        nlohmann::json a = nlohmann::json::array();
        for (const auto& at : atoms) a.push_back({{"value", at.value}, {"prob", at.prob}});
        return a;
    };
    switch (spec.kind) {
        case Kind::AtomicReal: j["atoms"] = atoms_json(spec.atoms); break;
        case Kind::AtomicComplex:
            j["re_atoms"] = atoms_json(spec.re_atoms);
            j["im_atoms"] = atoms_json(spec.im_atoms);
            break;
        case Kind::GaussianDivisible:
            j["t"] = spec.t;
            j["base"] = to_json(*spec.base);
            break;
        case Kind::Truncated:
            j["bound"] = spec.bound;
            j["base"] = to_json(*spec.base);
            break;
        default: break;
    }
    return j;
}

inline DistributionSpec spec_from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    auto atoms_from = [](const nlohmann::json& a) {
        std::vector<Atom> atoms;
        for (const auto& at : a)
            atoms.push_back({at.at("value").get<double>(), at.at("prob").get<double>()});
        return atoms;
    };
    DistributionSpec s;
    if (kind == "gaussian_real") s = gaussian_real();
    else if (kind == "gaussian_complex") s = gaussian_complex();
    else if (kind == "rademacher") s = rademacher();
    else if (kind == "atomic_real") s = atomic_real(atoms_from(j.at("atoms")));
    else if (kind == "atomic_complex")
        s = atomic_complex(atoms_from(j.at("re_atoms")), atoms_from(j.at("im_atoms")));
    else if (kind == "gaussian_divisible")
        s = gaussian_divisible(j.at("t").get<double>(), spec_from_json(j.at("base")));
    else if (kind == "truncated")
        s = truncated(spec_from_json(j.at("base")), j.at("bound").get<double>());
    else throw std::invalid_argument("unknown spec kind: " + kind);
    if (j.contains("name")) s.name = j.at("name").get<std::string>();
    return s;
}

// names: "gaussian", "gaussian-complex", "bernoulli", "gauss4", "m3:<v>",
// "gauss-div:t=<t>:base=<name>", "trunc:K=<K>:base=<name>"
inline DistributionSpec parse_spec(const std::string& name) {
    if (name == "gaussian" || name == "gauss" || name == "gaussian_real")
        return gaussian_real();
    if (name == "gaussian-complex" || name == "gaussian_complex")
        return gaussian_complex();
    if (name == "bernoulli" || name == "rademacher") return rademacher();
    if (name == "gauss4") return match_fourth_order_gaussian();
    if (name.rfind("m3:", 0) == 0) return match_third_order(std::stod(name.substr(3)));
    if (name.rfind("gauss-div:t=", 0) == 0) {
        const auto sep = name.find(":base=");
        if (sep == std::string::npos)
            throw std::invalid_argument("gauss-div spec needs :base=<name>");
        const double t = std::stod(name.substr(12, sep - 12));
        return gaussian_divisible(t, parse_spec(name.substr(sep + 6)));
    }
    if (name.rfind("trunc:K=", 0) == 0) {
        const auto sep = name.find(":base=");
        if (sep == std::string::npos)
            throw std::invalid_argument("trunc spec needs :base=<name>");
        const double K = std::stod(name.substr(8, sep - 8));
        return truncated(parse_spec(name.substr(sep + 6)), K);
    }
    throw std::invalid_argument("unknown ensemble name: " + name);
}

}  // namespace rmt
