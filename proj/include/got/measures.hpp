#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "got/errors.hpp"
#include "got/rng.hpp"

namespace got {

/// Row-major list of d-dimensional points.
class PointCloud {
public:
    PointCloud() = default;
    PointCloud(std::size_t dim, std::vector<double> coords) : dim_(dim), coords_(std::move(coords)) {
        if (dim_ == 0) throw ArgumentError("point dimension must be >= 1");
        if (coords_.size() % dim_ != 0) throw ArgumentError("coordinate count is not a multiple of the dimension");
    }
    static PointCloud zeros(std::size_t dim, std::size_t n) { return {dim, std::vector<double>(dim * n, 0.0)}; }

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return dim_ == 0 ? 0 : coords_.size() / dim_; }
    bool empty() const noexcept { return coords_.empty(); }

    std::span<const double> operator[](std::size_t i) const { return {coords_.data() + i * dim_, dim_}; }
    std::span<double> operator[](std::size_t i) { return {coords_.data() + i * dim_, dim_}; }

    const std::vector<double>& coords() const noexcept { return coords_; }
    std::vector<double>& coords() noexcept { return coords_; }

    void push_back(std::span<const double> p) {
        if (dim_ == 0) dim_ = p.size();
        if (p.size() != dim_) throw ArgumentError("inconsistent point dimension");
        coords_.insert(coords_.end(), p.begin(), p.end());
    }

    bool operator==(const PointCloud&) const = default;

private:
    std::size_t dim_ = 0;
    std::vector<double> coords_;
};

inline double euclidean(std::span<const double> a, std::span<const double> b) noexcept {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double t = a[k] - b[k];
        s += t * t;
    }
    return std::sqrt(s);
}

inline double norm(std::span<const double> a) noexcept {
    double s = 0.0;
    for (double v : a) s += v * v;
    return std::sqrt(s);
}

/// Weighted point cloud. Immutable once constructed; the constructor
/// enforces the invariants (finite points, non-negative weights summing to 1).
class DiscreteMeasure {
public:
    static constexpr double kWeightSumTolerance = 1e-12;

    DiscreteMeasure(PointCloud points, std::vector<double> weights)
        : points_(std::move(points)), weights_(std::move(weights)) {
        if (points_.empty()) throw ArgumentError("measure needs at least one atom");
        if (weights_.size() != points_.size()) throw ArgumentError("weights and points differ in length");
        for (double c : points_.coords())
            if (!std::isfinite(c)) throw ArgumentError("measure atom has a non-finite coordinate");
        double total = 0.0;
        for (double w : weights_) {
            if (!(w >= 0.0) || !std::isfinite(w)) throw ArgumentError("measure weights must be finite and >= 0");
            total += w;
        }
        if (std::abs(total - 1.0) > kWeightSumTolerance)
            throw ArgumentError("measure weights sum to " + std::to_string(total) + ", expected 1");
    }

    /// Dirac mass at x.
    static DiscreteMeasure dirac(std::span<const double> x) {
        return {PointCloud(x.size(), {x.begin(), x.end()}), {1.0}};
    }

    std::size_t size() const noexcept { return points_.size(); }
    std::size_t dim() const noexcept { return points_.dim(); }
    const PointCloud& points() const noexcept { return points_; }
    const std::vector<double>& weights() const noexcept { return weights_; }
    std::span<const double> atom(std::size_t i) const { return points_[i]; }
    double weight(std::size_t i) const { return weights_[i]; }

    /// Copy of the measure with every atom shifted by v.
    DiscreteMeasure translated(std::span<const double> v) const {
        if (v.size() != dim()) throw ArgumentError("translation dimension mismatch");
        PointCloud shifted = points_;
        for (std::size_t i = 0; i < shifted.size(); ++i)
            for (std::size_t k = 0; k < dim(); ++k) shifted[i][k] += v[k];
        return {std::move(shifted), weights_};
    }

private:
    PointCloud points_;
    std::vector<double> weights_;
};

/// Uniform weights on the given samples; duplicate atoms stay separate.
inline DiscreteMeasure make_empirical(PointCloud samples) {
    if (samples.empty()) throw ArgumentError("make_empirical: empty sample list");
    const std::size_t n = samples.size();
    return {std::move(samples), std::vector<double>(n, 1.0 / static_cast<double>(n))};
}

/// Integral of ||x|| against the measure.
inline double first_moment(const DiscreteMeasure& m) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) s += m.weight(i) * norm(m.atom(i));
    return s;
}

// ---------------------------------------------------------------------------
// Source distributions

enum class SourceFamily { uniform_cube, isotropic_gaussian, gaussian_mixture, dirac_pair };

inline std::string_view to_string(SourceFamily f) {
    switch (f) {
        case SourceFamily::uniform_cube: return "uniform-cube";
        case SourceFamily::isotropic_gaussian: return "isotropic-gaussian";
        case SourceFamily::gaussian_mixture: return "gaussian-mixture";
        case SourceFamily::dirac_pair: return "dirac-pair";
    }
    return "?";
}

inline SourceFamily parse_source_family(std::string_view s) {
    if (s == "uniform-cube") return SourceFamily::uniform_cube;
    if (s == "isotropic-gaussian") return SourceFamily::isotropic_gaussian;
    if (s == "gaussian-mixture") return SourceFamily::gaussian_mixture;
    if (s == "dirac-pair") return SourceFamily::dirac_pair;
    throw ConfigError("unknown source family '" + std::string(s) + "'");
}

struct MixtureComponent {
    double weight = 1.0;
    std::vector<double> mean;
    double stddev = 1.0;
};

/// A source distribution mu together with a certified subgaussian constant.
/// Build through the named constructors; they validate the parameters.
struct SourceSpec {
    SourceFamily family = SourceFamily::uniform_cube;
    std::size_t d = 1;
    double side = 1.0;                          // uniform-cube: [0, side]^d
    double stddev = 1.0;                        // isotropic-gaussian N(0, stddev^2 I)
    std::vector<MixtureComponent> components;   // gaussian-mixture
    std::vector<double> x, y;                   // dirac-pair locations
    int component = 0;                          // dirac-pair: 0 samples delta_x, 1 samples delta_y

    static SourceSpec uniform_cube(std::size_t d, double side = 1.0) {
        SourceSpec s;
        s.family = SourceFamily::uniform_cube;
        s.d = d;
        s.side = side;
        s.validate();
        return s;
    }
    static SourceSpec isotropic_gaussian(std::size_t d, double stddev = 1.0) {
        SourceSpec s;
        s.family = SourceFamily::isotropic_gaussian;
        s.d = d;
        s.stddev = stddev;
        s.validate();
        return s;
    }
    static SourceSpec gaussian_mixture(std::vector<MixtureComponent> comps) {
        SourceSpec s;
        s.family = SourceFamily::gaussian_mixture;
        s.d = comps.empty() ? 0 : comps.front().mean.size();
        s.components = std::move(comps);
        s.validate();
        return s;
    }
    static SourceSpec dirac_pair(std::vector<double> x, std::vector<double> y, int component = 0) {
        SourceSpec s;
        s.family = SourceFamily::dirac_pair;
        s.d = x.size();
        s.x = std::move(x);
        s.y = std::move(y);
        s.component = component;
        s.validate();
        return s;
    }

    /// The other Dirac of a dirac-pair spec.
    SourceSpec other_component() const {
        if (family != SourceFamily::dirac_pair) throw ConfigError("other_component: not a dirac-pair source");
        SourceSpec s = *this;
        s.component = 1 - component;
        return s;
    }

    const std::vector<double>& dirac_location() const { return component == 0 ? x : y; }

    void validate() const {
        if (d == 0) throw ConfigError("source dimension must be >= 1");
        switch (family) {
            case SourceFamily::uniform_cube:
                if (!(side > 0.0) || !std::isfinite(side)) throw ConfigError("uniform-cube side must be > 0");
                break;
            case SourceFamily::isotropic_gaussian:
                if (!(stddev > 0.0) || !std::isfinite(stddev)) throw ConfigError("isotropic-gaussian stddev must be > 0");
                break;
            case SourceFamily::gaussian_mixture: {
                if (components.empty()) throw ConfigError("gaussian-mixture needs at least one component");
                double total = 0.0;
                for (const auto& c : components) {
                    if (c.mean.size() != d) throw ConfigError("gaussian-mixture component dimension mismatch");
                    if (!(c.weight > 0.0)) throw ConfigError("gaussian-mixture weights must be > 0");
                    if (!(c.stddev > 0.0)) throw ConfigError("gaussian-mixture stddev must be > 0");
                    total += c.weight;
                }
                if (std::abs(total - 1.0) > 1e-9) throw ConfigError("gaussian-mixture weights must sum to 1");
                break;
            }
            case SourceFamily::dirac_pair:
                if (x.size() != d || y.size() != d) throw ConfigError("dirac-pair locations must have dimension d");
                if (x == y) throw ConfigError("dirac-pair requires x != y");
                if (component != 0 && component != 1) throw ConfigError("dirac-pair component must be 0 or 1");
                break;
        }
    }

    /// Subgaussian constant K of the family. Bounded support uses Hoeffding
    /// (half the range per coordinate); a mixture adds the Hoeffding term of
    /// its bounded component means to the largest component variance.
    double subgaussian_constant() const {
        switch (family) {
            case SourceFamily::uniform_cube: return side / 2.0;
            case SourceFamily::isotropic_gaussian: return stddev;
            case SourceFamily::gaussian_mixture: {
                double s_max = 0.0, spread = 0.0;
                for (const auto& a : components) {
                    s_max = std::max(s_max, a.stddev);
                    for (const auto& b : components) spread = std::max(spread, euclidean(a.mean, b.mean));
                }
                return std::sqrt(s_max * s_max + spread * spread / 4.0);
            }
            case SourceFamily::dirac_pair: return 0.0;
        }
        return 0.0;
    }

    /// Diameter of the support, +inf for unbounded families.
    double support_diameter() const {
        switch (family) {
            case SourceFamily::uniform_cube: return side * std::sqrt(static_cast<double>(d));
            case SourceFamily::dirac_pair: return 0.0;
            default: return std::numeric_limits<double>::infinity();
        }
    }
};

/// n i.i.d. draws from the source; deterministic in the seed tuple.
inline PointCloud sample_source(const SourceSpec& spec, std::size_t n, const SeedTuple& seed) {
    if (n == 0) throw ArgumentError("sample_source: n must be >= 1");
    spec.validate();
    Rng rng(seed);
    PointCloud out = PointCloud::zeros(spec.d, n);
    switch (spec.family) {
        case SourceFamily::uniform_cube:
            for (double& c : out.coords()) c = spec.side * rng.uniform();
            break;
        case SourceFamily::isotropic_gaussian:
            for (double& c : out.coords()) c = spec.stddev * rng.normal();
            break;
        case SourceFamily::gaussian_mixture: {
            std::vector<double> cdf;
            double acc = 0.0;
            for (const auto& c : spec.components) cdf.push_back(acc += c.weight);
            for (std::size_t i = 0; i < n; ++i) {
                const double u = rng.uniform() * acc;
                std::size_t k = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
                k = std::min(k, cdf.size() - 1);
                const auto& comp = spec.components[k];
                for (std::size_t j = 0; j < spec.d; ++j) out[i][j] = comp.mean[j] + comp.stddev * rng.normal();
            }
            break;
        }
        case SourceFamily::dirac_pair: {
            const auto& loc = spec.dirac_location();
            for (std::size_t i = 0; i < n; ++i) std::copy(loc.begin(), loc.end(), out[i].begin());
            break;
        }
    }
    return out;
}

/// m draws (with replacement) from the atoms of a discrete measure.
/// Returns the points and the index of the atom behind each point.
inline std::pair<PointCloud, std::vector<std::size_t>> resample_atoms(const DiscreteMeasure& mu, std::size_t m,
                                                                       const SeedTuple& seed) {
    if (m == 0) throw ArgumentError("resample_atoms: m must be >= 1");
    Rng rng(seed);
    std::vector<double> cdf(mu.size());
    double acc = 0.0;
    bool uniform = true;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        acc += mu.weight(i);
        cdf[i] = acc;
        uniform = uniform && mu.weight(i) == mu.weight(0);
    }
    PointCloud out = PointCloud::zeros(mu.dim(), m);
    std::vector<std::size_t> idx(m);
    for (std::size_t r = 0; r < m; ++r) {
        std::size_t k;
        if (uniform) {
            k = static_cast<std::size_t>(rng.below(mu.size()));
        } else {
            const double u = rng.uniform() * acc;
            k = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
            k = std::min(k, mu.size() - 1);
        }
        idx[r] = k;
        const auto a = mu.atom(k);
        std::copy(a.begin(), a.end(), out[r].begin());
    }
    return {std::move(out), std::move(idx)};
}

/// Random discrete measure with atoms uniform in [0,1]^d; weights uniform or
/// Dirichlet(1)-distributed when mixed_weights is set. Used by the test harnesses.
inline DiscreteMeasure random_measure(std::size_t atoms, std::size_t d, const SeedTuple& seed, bool mixed_weights = false) {
    Rng rng(seed);
    PointCloud pts = PointCloud::zeros(d, atoms);
    for (double& c : pts.coords()) c = rng.uniform();
    std::vector<double> w(atoms, 1.0 / static_cast<double>(atoms));
    if (mixed_weights) {
        double total = 0.0;
        for (double& v : w) total += (v = -std::log(rng.uniform_open0()));
        for (double& v : w) v /= total;
        // Renormalize the rounding residue onto the largest weight.
        const double resid = 1.0 - std::accumulate(w.begin(), w.end(), 0.0);
        *std::max_element(w.begin(), w.end()) += resid;
    }
    return {std::move(pts), std::move(w)};
}

}  // namespace got
