#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rmt/common.hpp"
#include "rmt/ensembles.hpp"
#include "rmt/mp_law.hpp"
#include "rmt/spectra.hpp"

namespace rmt {

// Sorted sample with exact ecdf and a fixed-bin histogram view.
class EmpiricalDistribution {
public:
    explicit EmpiricalDistribution(std::vector<double> values) : values_(std::move(values)) {
        if (values_.empty()) throw std::invalid_argument("EmpiricalDistribution: empty sample");
        std::sort(values_.begin(), values_.end());
    }

    const std::vector<double>& values() const { return values_; }
    std::size_t size() const { return values_.size(); }

    // right-continuous step function: fraction of sample <= x
    double ecdf(double x) const {
        const auto it = std::upper_bound(values_.begin(), values_.end(), x);
        return static_cast<double>(it - values_.begin()) / static_cast<double>(values_.size());
    }

    struct Histogram {
        std::vector<double> edges;      // bins+1 edges
        std::vector<double> densities;  // count / (N * width)
    };

    // fixed bin count over [lo, hi]; defaults to the sample range
    Histogram histogram(int bins, double lo, double hi) const {
        if (bins < 1 || !(hi > lo)) throw std::invalid_argument("histogram: bad bins/range");
        Histogram h;
        const double width = (hi - lo) / bins;
        h.edges.resize(bins + 1);
        for (int b = 0; b <= bins; ++b) h.edges[b] = lo + b * width;
        std::vector<int> counts(bins, 0);
        for (double v : values_) {
            int b = static_cast<int>((v - lo) / width);
            b = std::clamp(b, 0, bins - 1);
            ++counts[b];
        }
        h.densities.resize(bins);
        for (int b = 0; b < bins; ++b)
            h.densities[b] = counts[b] / (static_cast<double>(values_.size()) * width);
        return h;
    }

    Histogram histogram(int bins) const { return histogram(bins, values_.front(), values_.back()); }

private:
    std::vector<double> values_;
};

inline EmpiricalDistribution esd(const std::vector<double>& lambdas) {
    return EmpiricalDistribution(lambdas);
}

// exact sup_x |F_A - F_B| over the merged sample
inline double ks_distance(const EmpiricalDistribution& A, const EmpiricalDistribution& B) {
    double d = 0.0;
    for (double x : A.values()) d = std::max(d, std::abs(A.ecdf(x) - B.ecdf(x)));
    for (double x : B.values()) d = std::max(d, std::abs(A.ecdf(x) - B.ecdf(x)));
    return d;
}

// one cell of the eigenvalue-count concentration statistic
// |N_I - p int_I rho| <= delta p |I|
struct IntervalReport {
    double lo = 0.0;
    double hi = 0.0;
    long count = 0;       // N_I
    double expected = 0.0;  // p * int_I rho
    double deviation = 0.0; // |N_I - expected| / (p |I|)
};

inline std::vector<IntervalReport> concentration_report(const std::vector<double>& lambdas,
                                                        const MPModel& model,
                                                        double interval_len) {
    if (!(interval_len > 0.0))
        throw std::invalid_argument("concentration_report: interval_len must be positive");
    const double p = static_cast<double>(lambdas.size());
    std::vector<IntervalReport> out;
    for (double lo = model.a; lo < model.b - 1e-15; lo += interval_len) {
        IntervalReport r;
        r.lo = lo;
        r.hi = std::min(lo + interval_len, model.b);
        r.count = std::count_if(lambdas.begin(), lambdas.end(), [&](double x) {
            return x >= r.lo && (x < r.hi || (r.hi == model.b && x <= r.hi));
        });
        r.expected = p * (cdf(model, r.hi) - cdf(model, r.lo));
        r.deviation = std::abs(r.count - r.expected) / (p * (r.hi - r.lo));
        out.push_back(r);
    }
    return out;
}

// sqrt(n) * max |coefficient| over all left and right singular vectors; the
// flat-vector floor is 1, delocalization predicts K^2 polylog(n)
inline double delocalization_stat(const SpectralDecomposition& d) {
    const double m = std::max(d.right_vectors.cwiseAbs().maxCoeff(),
                              d.left_vectors.cwiseAbs().maxCoeff());
    return std::sqrt(static_cast<double>(d.n)) * m;
}

struct GapSummary {
    double min_gap = 0.0;                 // min_i (lambda_{i+1} - lambda_i)
    std::vector<double> normalized_gaps;  // n * (lambda_{i+1} - lambda_i)
    double quantile(double q) const {
        std::vector<double> s = normalized_gaps;
        std::sort(s.begin(), s.end());
        const auto idx = static_cast<std::size_t>(q * (s.size() - 1));
        return s[idx];
    }
};

inline GapSummary gap_stats(const std::vector<double>& lambdas, int n) {
    if (lambdas.size() < 2) throw std::invalid_argument("gap_stats: need >= 2 eigenvalues");
    if (!std::is_sorted(lambdas.begin(), lambdas.end()))
        throw std::invalid_argument("gap_stats: input not sorted");
    GapSummary g;
    g.min_gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < lambdas.size(); ++i) {
        const double gap = lambdas[i + 1] - lambdas[i];
        g.min_gap = std::min(g.min_gap, gap);
        g.normalized_gaps.push_back(n * gap);
    }
    return g;
}

// Regularized gap: exact infimum over 1 <= i- <= i0-l < i0 <= i+ <= p of
//   sqrt(N0) (sigma_{i+} - sigma_{i-}) / min(i+ - i-, log^C1 N0)^{log^0.9 N0},
// N0 = p + n, indices 1-based.
inline double regularized_gap(const std::vector<double>& sigmas, int i0, int l, double C1,
                              int p, int n) {
    if (static_cast<int>(sigmas.size()) != p)
        throw std::invalid_argument("regularized_gap: sigma count != p");
    if (!(1 <= i0 - l && i0 - l < i0 && i0 <= p))
        throw std::invalid_argument("regularized_gap: need 1 <= i0-l < i0 <= p");
    const double N0 = static_cast<double>(p + n);
    const double expo = std::pow(std::log(N0), 0.9);
    const double cap = std::pow(std::log(N0), C1);
    double best = std::numeric_limits<double>::infinity();
    for (int im = 1; im <= i0 - l; ++im)
        for (int ip = i0; ip <= p; ++ip) {
            const double num = std::sqrt(N0) * (sigmas[ip - 1] - sigmas[im - 1]);
            const double den = std::pow(std::min(static_cast<double>(ip - im), cap), expo);
            best = std::min(best, num / den);
        }
    return best;
}

// Q_i diagnostic of the augmented matrix:
// (1/n) [ sum_{j != i} 1/|sigma_j - sigma_i|^2 + (n-p)/sigma_i^2
//         + sum_j 1/|sigma_j + sigma_i|^2 ]
inline double q_index(const std::vector<double>& sigmas, int i, int p, int n) {
    if (static_cast<int>(sigmas.size()) != p)
        throw std::invalid_argument("q_index: sigma count != p");
    if (i < 1 || i > p) throw std::invalid_argument("q_index: index out of range");
    const double si = sigmas[i - 1];
    if (!(si > 0.0)) throw std::invalid_argument("q_index: sigma_i must be positive");
    double s = 0.0;
    for (int j = 1; j <= p; ++j) {
        if (j != i) {
            const double gap = sigmas[j - 1] - si;
            if (gap == 0.0) throw NumericalError("q_index: coinciding singular values");
            s += 1.0 / (gap * gap);
        }
        const double sum = sigmas[j - 1] + si;
        s += 1.0 / (sum * sum);
    }
    s += (n - p) / (si * si);
    return s / n;
}

// Soft-edge normalization of sigma_min^2: center (sqrt n - sqrt p)^2, scale
// (sqrt n - sqrt p)(1/sqrt p - 1/sqrt n)^{1/3}. literal_paper switches to the
// printed centering (p^{1/2} - n^{1/2}); any common affine map cancels in the
// two-sample comparisons.
inline double tw_normalize(double sigma_min_sq, int p, int n, bool literal_paper = false) {
    if (p >= n)
        throw NumericalError("tw_normalize: hard edge p = n, normalization degenerates");
    const double sp = std::sqrt(static_cast<double>(p)), sn = std::sqrt(static_cast<double>(n));
    if (literal_paper) {
        const double c = sp - sn;
        const double s = (sp - sn) * std::cbrt(1.0 / sp - 1.0 / sn);
        return (sigma_min_sq - c) / s;
    }
    const double c = (sn - sp) * (sn - sp);
    const double s = (sn - sp) * std::cbrt(1.0 / sp - 1.0 / sn);
    return (sigma_min_sq - c) / s;
}

// Norm of the projection of a spec-distributed vector onto a fixed random
// d-dimensional subspace, over many trials; centered by sqrt(d).
struct ProjectionSummary {
    std::vector<double> centered_norms;       // ||pi_H X|| - sqrt(d)
    std::vector<double> exceedance_fraction;  // at t = K, 2K, ..., 10K
    double K = 1.0;
};

inline ProjectionSummary projection_concentration(const DistributionSpec& spec, int n, int d,
                                                  int trials, std::uint64_t seed) {
    if (d < 1 || d > n) throw std::invalid_argument("projection_concentration: need 1 <= d <= n");
    // fixed subspace: orthonormalized Gaussian frame drawn from a reserved trial index
    Eigen::MatrixXcd frame(n, d);
    for (int j = 0; j < d; ++j)
        for (int i = 0; i < n; ++i) {
            CounterStream s(CounterStream::derive_key(seed ^ 0x5a5a5a5a5a5a5a5aULL, 0, i, j));
            frame(i, j) = std::complex<double>(s.next_gaussian(),
                                               spec.is_real() ? 0.0 : s.next_gaussian());
        }
    const Eigen::MatrixXcd Q =
        Eigen::HouseholderQR<Eigen::MatrixXcd>(frame).householderQ() *
        Eigen::MatrixXcd::Identity(n, d);

    ProjectionSummary out;
    const double radius = support_radius(spec);
    out.K = radius > 0.0 ? radius : 1.0;
    const double sqd = std::sqrt(static_cast<double>(d));
    for (int t = 0; t < trials; ++t) {
        Eigen::VectorXcd X(n);
        for (int i = 0; i < n; ++i) {
            CounterStream s(CounterStream::derive_key(seed, static_cast<std::uint64_t>(t) + 1, i, 0));
            X(i) = sample(spec, s);
        }
        out.centered_norms.push_back((Q.adjoint() * X).norm() - sqd);
    }
    for (int k = 1; k <= 10; ++k) {
        const double t = k * out.K;
        const long exceed =
            std::count_if(out.centered_norms.begin(), out.centered_norms.end(),
                          [&](double v) { return std::abs(v) >= t; });
        out.exceedance_fraction.push_back(static_cast<double>(exceed) / trials);
    }
    return out;
}

}  // namespace rmt
