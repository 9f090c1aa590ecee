#pragma once

// Finite probability distributions and joints: Shannon entropy (base 2,
// 0 log 0 = 0), mutual information by the double-sum formula, pushforwards
// under finite-range quantizers, and the data-processing comparison.

#include <cmath>
#include <string>
#include <vector>

#include "meandim/core.hpp"

namespace meandim {

inline constexpr double prob_tolerance = 1e-12;

struct FiniteDistribution {
    std::vector<std::string> labels;
    std::vector<double> p;

    FiniteDistribution() = default;

    static FiniteDistribution from_probabilities(std::vector<double> probs,
                                                 std::vector<std::string> names = {}) {
        FiniteDistribution d;
        d.p = std::move(probs);
        if (names.empty())
            for (std::size_t i = 0; i < d.p.size(); ++i) d.labels.push_back(std::to_string(i));
        else
            d.labels = std::move(names);
        d.validate();
        return d;
    }

    static FiniteDistribution uniform(std::size_t n) {
        return from_probabilities(std::vector<double>(n, 1.0 / static_cast<double>(n)));
    }

    // Nonnegative weights, normalized to a distribution.
    static FiniteDistribution from_weights(std::vector<double> w,
                                           std::vector<std::string> names = {}) {
        KahanSum total;
        for (double x : w) {
            if (x < 0) throw precondition_error("negative probability weight");
            total.add(x);
        }
        if (total.value() <= 0) throw precondition_error("weights sum to zero");
        for (double& x : w) x /= total.value();
        return from_probabilities(std::move(w), std::move(names));
    }

    std::size_t size() const { return p.size(); }

    void validate() const {
        if (p.empty()) throw precondition_error("empty distribution");
        if (labels.size() != p.size()) throw precondition_error("label/probability size mismatch");
        KahanSum s;
        for (double x : p) {
            if (x < 0) throw precondition_error("negative probability");
            s.add(x);
        }
        if (std::abs(s.value() - 1.0) > prob_tolerance)
            throw precondition_error("probabilities do not sum to 1 within 1e-12");
    }
};

inline double entropy(const FiniteDistribution& d) {
    KahanSum h;
    for (double x : d.p)
        if (x > 0) h.add(-x * std::log2(x));
    return h.value();
}

inline double binary_entropy(double delta) {
    if (delta < 0.0 || delta > 1.0) throw precondition_error("binary entropy needs delta in [0,1]");
    double h = 0.0;
    if (delta > 0.0) h -= delta * std::log2(delta);
    if (delta < 1.0) h -= (1.0 - delta) * std::log2(1.0 - delta);
    return h;
}

// ---------------------------------------------------------------- joints --

struct JointDistribution {
    std::size_t nx = 0, ny = 0;
    std::vector<double> p;  // row-major, p[x*ny + y]

    JointDistribution() = default;
    JointDistribution(std::size_t nx_, std::size_t ny_, std::vector<double> probs)
        : nx(nx_), ny(ny_), p(std::move(probs)) {
        validate();
    }

    double at(std::size_t x, std::size_t y) const { return p[x * ny + y]; }
    double& at(std::size_t x, std::size_t y) { return p[x * ny + y]; }

    void validate() const {
        if (nx == 0 || ny == 0 || p.size() != nx * ny)
            throw precondition_error("joint distribution shape mismatch");
        KahanSum s;
        for (double x : p) {
            if (x < 0) throw precondition_error("negative joint probability");
            s.add(x);
        }
        if (std::abs(s.value() - 1.0) > prob_tolerance)
            throw precondition_error("joint probabilities do not sum to 1 within 1e-12");
    }

    std::vector<double> marginal_x() const {
        std::vector<double> m(nx, 0.0);
        for (std::size_t x = 0; x < nx; ++x) {
            KahanSum s;
            for (std::size_t y = 0; y < ny; ++y) s.add(at(x, y));
            m[x] = s.value();
        }
        return m;
    }
    std::vector<double> marginal_y() const {
        std::vector<double> m(ny, 0.0);
        for (std::size_t y = 0; y < ny; ++y) {
            KahanSum s;
            for (std::size_t x = 0; x < nx; ++x) s.add(at(x, y));
            m[y] = s.value();
        }
        return m;
    }

    static JointDistribution independent(const FiniteDistribution& a, const FiniteDistribution& b) {
        std::vector<double> q(a.size() * b.size());
        for (std::size_t x = 0; x < a.size(); ++x)
            for (std::size_t y = 0; y < b.size(); ++y) q[x * b.size() + y] = a.p[x] * b.p[y];
        return JointDistribution(a.size(), b.size(), std::move(q));
    }
};

namespace detail {

inline double entropy_of(const std::vector<double>& p) {
    KahanSum h;
    for (double x : p)
        if (x > 0) h.add(-x * std::log2(x));
    return h.value();
}

}  // namespace detail

inline double joint_entropy(const JointDistribution& j) { return detail::entropy_of(j.p); }

// I(X;Y) by the double sum; tiny negative floating noise is clamped to 0.
inline double mutual_information(const JointDistribution& j) {
    const auto px = j.marginal_x();
    const auto py = j.marginal_y();
    KahanSum s;
    for (std::size_t x = 0; x < j.nx; ++x)
        for (std::size_t y = 0; y < j.ny; ++y) {
            const double pxy = j.at(x, y);
            if (pxy > 0) s.add(pxy * std::log2(pxy / (px[x] * py[y])));
        }
    const double v = s.value();
    if (v < 0) {
        if (v < -1e-9) throw error("mutual information evaluated below -1e-9");
        return 0.0;
    }
    return v;
}

// H(X) + H(Y) - H(X,Y): the entropy-combination route, kept separate so the
// two formulas can be compared as an invariant.
inline double mutual_information_entropies(const JointDistribution& j) {
    return detail::entropy_of(j.marginal_x()) + detail::entropy_of(j.marginal_y()) -
           joint_entropy(j);
}

// H(X) - H(X|Y) with H(X|Y) = H(X,Y) - H(Y).
inline double mutual_information_conditional(const JointDistribution& j) {
    return detail::entropy_of(j.marginal_x()) -
           (joint_entropy(j) - detail::entropy_of(j.marginal_y()));
}

// Push the joint forward through finite-range maps f (on X) and g (on Y).
inline JointDistribution pushforward(const JointDistribution& j, const std::vector<std::size_t>& f,
                                     std::size_t nfx, const std::vector<std::size_t>& g,
                                     std::size_t nfy) {
    if (f.size() != j.nx || g.size() != j.ny)
        throw precondition_error("quantizer not defined on the whole support");
    std::vector<double> q(nfx * nfy, 0.0);
    for (std::size_t x = 0; x < j.nx; ++x) {
        if (f[x] >= nfx) throw precondition_error("quantizer value out of range");
        for (std::size_t y = 0; y < j.ny; ++y) {
            if (g[y] >= nfy) throw precondition_error("quantizer value out of range");
            q[f[x] * nfy + g[y]] += j.at(x, y);
        }
    }
    return JointDistribution(nfx, nfy, std::move(q));
}

inline double quantized_mutual_information(const JointDistribution& j,
                                           const std::vector<std::size_t>& f, std::size_t nfx,
                                           const std::vector<std::size_t>& g, std::size_t nfy) {
    return mutual_information(pushforward(j, f, nfx, g, nfy));
}

// Canonical cylinder quantizer on tuple supports indexed base-|B|: keep the
// first `depth` coordinates. The supremum over depths of the quantized value
// realizes the general-measurable-map definition restricted to finite depth.
inline std::vector<std::size_t> cylinder_quantizer(std::size_t states, int base, int n_sites,
                                                   int depth) {
    if (depth < 0 || depth > n_sites) throw precondition_error("quantizer depth out of range");
    std::size_t kept = 1;
    for (int i = 0; i < depth; ++i) kept *= static_cast<std::size_t>(base);
    std::vector<std::size_t> f(states);
    for (std::size_t s = 0; s < states; ++s) f[s] = s % kept;
    return f;
}

inline double mutual_information_at_depth(const JointDistribution& j, int base, int n_sites,
                                          int depth) {
    std::size_t kept = 1;
    for (int i = 0; i < depth; ++i) kept *= static_cast<std::size_t>(base);
    const auto f = cylinder_quantizer(j.nx, base, n_sites, depth);
    const auto g = cylinder_quantizer(j.ny, base, n_sites, depth);
    return quantized_mutual_information(j, f, kept, g, kept);
}

struct DataProcessingWitness {
    double quantized;  // I(X; f(Y))
    double original;   // I(X; Y)
    bool holds;        // quantized <= original + 1e-9
};

inline DataProcessingWitness check_data_processing(const JointDistribution& j,
                                                   const std::vector<std::size_t>& f,
                                                   std::size_t nf) {
    std::vector<std::size_t> id(j.nx);
    for (std::size_t x = 0; x < j.nx; ++x) id[x] = x;
    const double lhs = quantized_mutual_information(j, id, j.nx, f, nf);
    const double rhs = mutual_information(j);
    return {lhs, rhs, lhs <= rhs + 1e-9};
}

}  // namespace meandim
