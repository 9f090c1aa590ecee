#pragma once

// Shift-invariant measures carried by the artifact: Bernoulli products and
// fiberwise Markov chains (independent across G1, stationary along G2 = Z),
// with exact window entropies and maximal cylinder masses.

#include <cmath>
#include <map>
#include <vector>

#include "meandim/core.hpp"
#include "meandim/distribution.hpp"
#include "meandim/subshift.hpp"

namespace meandim {

enum class MeasureKind { bernoulli, fiber_markov };

struct MeasureSpec {
    MeasureKind kind = MeasureKind::bernoulli;
    FiniteDistribution per_letter;                 // bernoulli
    std::vector<std::vector<double>> transition;   // fiber_markov rows
    std::vector<double> stationary;                // fixed by the transition matrix
    std::string name;

    int alphabet_size() const {
        return kind == MeasureKind::bernoulli ? static_cast<int>(per_letter.size())
                                              : static_cast<int>(transition.size());
    }

    static MeasureSpec bernoulli(FiniteDistribution letter_dist) {
        MeasureSpec m;
        m.kind = MeasureKind::bernoulli;
        m.per_letter = std::move(letter_dist);
        m.name = "bernoulli";
        return m;
    }

    static MeasureSpec fiber_markov(std::vector<std::vector<double>> p,
                                    std::vector<double> pi = {}) {
        MeasureSpec m;
        m.kind = MeasureKind::fiber_markov;
        m.transition = std::move(p);
        const std::size_t k = m.transition.size();
        if (k == 0) throw precondition_error("empty transition matrix");
        for (const auto& row : m.transition) {
            if (row.size() != k) throw precondition_error("transition matrix is not square");
            KahanSum s;
            for (double x : row) {
                if (x < 0) throw precondition_error("negative transition probability");
                s.add(x);
            }
            if (std::abs(s.value() - 1.0) > 1e-9)
                throw precondition_error("transition row does not sum to 1");
        }
        if (pi.empty()) {
            // power iteration on the left eigenvector
            std::vector<double> v(k, 1.0 / static_cast<double>(k));
            for (int it = 0; it < 20000; ++it) {
                std::vector<double> w(k, 0.0);
                for (std::size_t i = 0; i < k; ++i)
                    for (std::size_t j = 0; j < k; ++j) w[j] += v[i] * m.transition[i][j];
                double total = 0;
                for (double x : w) total += x;
                for (double& x : w) x /= total;
                double diff = 0;
                for (std::size_t i = 0; i < k; ++i) diff = std::max(diff, std::abs(w[i] - v[i]));
                v = std::move(w);
                if (diff < 1e-15) break;
            }
            pi = std::move(v);
        }
        m.stationary = std::move(pi);
        if (m.stationary.size() != k) throw precondition_error("stationary vector size mismatch");
        // pi P = pi within tolerance
        for (std::size_t j = 0; j < k; ++j) {
            double s = 0;
            for (std::size_t i = 0; i < k; ++i) s += m.stationary[i] * m.transition[i][j];
            if (std::abs(s - m.stationary[j]) > 1e-9)
                throw precondition_error("stationary vector is not fixed by the transition matrix");
        }
        m.name = "fiber-markov";
        return m;
    }
};

// The Parry (maximal-entropy) chain of a 0/1 adjacency matrix.
inline MeasureSpec max_entropy_markov(const std::vector<std::vector<int>>& adjacency) {
    const std::size_t k = adjacency.size();
    std::vector<double> v(k, 1.0), u(k, 1.0);
    double lambda = 1.0;
    for (int it = 0; it < 20000; ++it) {
        std::vector<double> nv(k, 0.0), nu(k, 0.0);
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j)
                if (adjacency[i][j]) {
                    nv[i] += v[j];   // right eigenvector
                    nu[j] += u[i];   // left eigenvector
                }
        double norm_v = 0, norm_u = 0;
        for (std::size_t i = 0; i < k; ++i) {
            norm_v = std::max(norm_v, nv[i]);
            norm_u = std::max(norm_u, nu[i]);
        }
        if (norm_v == 0) throw precondition_error("adjacency matrix has an empty row pattern");
        lambda = norm_v;
        for (std::size_t i = 0; i < k; ++i) {
            nv[i] /= norm_v;
            nu[i] /= norm_u;
        }
        double diff = 0;
        for (std::size_t i = 0; i < k; ++i) diff = std::max(diff, std::abs(nv[i] - v[i]));
        v = std::move(nv);
        u = std::move(nu);
        if (diff < 1e-15 && it > 64) break;
    }
    std::vector<std::vector<double>> p(k, std::vector<double>(k, 0.0));
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            if (adjacency[i][j]) p[i][j] = v[j] / (lambda * v[i]);
    std::vector<double> pi(k);
    double total = 0;
    for (std::size_t i = 0; i < k; ++i) {
        pi[i] = u[i] * v[i];
        total += pi[i];
    }
    for (double& x : pi) x /= total;
    return MeasureSpec::fiber_markov(std::move(p), std::move(pi));
}

// Is the measure supported on the subshift?
inline void validate_measure_on(const MeasureSpec& m, const SubshiftSpec& shift) {
    if (m.alphabet_size() != shift.alphabet.size())
        throw incompatible_error("measure alphabet size differs from the subshift's");
    if (m.kind == MeasureKind::bernoulli) {
        if (shift.kind != SubshiftKind::full_shift)
            throw incompatible_error("bernoulli measures are supported on full shifts only");
        return;
    }
    if (shift.kind != SubshiftKind::fiber_sft)
        throw incompatible_error("fiber-markov measures require a fiber SFT");
    for (const auto& w : shift.forbidden_words) {
        if (w.size() > 2)
            throw incompatible_error("fiber-markov support check needs forbidden words of length <= 2");
        if (w.size() == 1 && m.stationary[static_cast<std::size_t>(w[0])] > 0)
            throw incompatible_error("measure charges a forbidden letter");
        if (w.size() == 2 &&
            m.transition[static_cast<std::size_t>(w[0])][static_cast<std::size_t>(w[1])] > 0)
            throw incompatible_error("measure charges a forbidden transition");
    }
}

// Entropy rate of the stationary chain: H(X_2 | X_1) in bits.
inline double markov_entropy_rate(const MeasureSpec& m) {
    if (m.kind != MeasureKind::fiber_markov) throw precondition_error("not a markov measure");
    KahanSum h;
    const std::size_t k = m.transition.size();
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) {
            const double p = m.transition[i][j];
            if (p > 0 && m.stationary[i] > 0) h.add(-m.stationary[i] * p * std::log2(p));
        }
    return h.value();
}

// Per-site entropy in the infinite-window limit.
inline double entropy_rate(const MeasureSpec& m) {
    return m.kind == MeasureKind::bernoulli ? entropy(m.per_letter) : markov_entropy_rate(m);
}

// Exact H of the measure restricted to a window. For Bernoulli any cell set
// works; for fiber-Markov the window is described by its fiber lengths.
inline double window_entropy_cells(const MeasureSpec& m, std::size_t cells) {
    if (m.kind != MeasureKind::bernoulli)
        throw precondition_error("cell-count window entropy needs a bernoulli measure");
    return static_cast<double>(cells) * entropy(m.per_letter);
}

inline double window_entropy_fibers(const MeasureSpec& m, const std::vector<long>& fiber_lengths) {
    if (m.kind == MeasureKind::bernoulli) {
        std::size_t cells = 0;
        for (long len : fiber_lengths) cells += static_cast<std::size_t>(len);
        return window_entropy_cells(m, cells);
    }
    const double h_start = detail::entropy_of(m.stationary);
    const double h_step = markov_entropy_rate(m);
    KahanSum total;
    for (long len : fiber_lengths) {
        if (len <= 0) continue;
        total.add(h_start + static_cast<double>(len - 1) * h_step);
    }
    return total.value();
}

namespace detail {

// best log2 path mass of a stationary chain over `len` steps
inline double markov_best_log2_mass(const MeasureSpec& m, long len) {
    const std::size_t k = m.transition.size();
    std::vector<double> best(k);
    for (std::size_t i = 0; i < k; ++i)
        best[i] = m.stationary[i] > 0 ? std::log2(m.stationary[i])
                                      : -std::numeric_limits<double>::infinity();
    for (long step = 1; step < len; ++step) {
        std::vector<double> next(k, -std::numeric_limits<double>::infinity());
        for (std::size_t i = 0; i < k; ++i) {
            if (best[i] == -std::numeric_limits<double>::infinity()) continue;
            for (std::size_t j = 0; j < k; ++j)
                if (m.transition[i][j] > 0)
                    next[j] = std::max(next[j], best[i] + std::log2(m.transition[i][j]));
        }
        best = std::move(next);
    }
    double out = -std::numeric_limits<double>::infinity();
    for (double x : best) out = std::max(out, x);
    return out;
}

}  // namespace detail

// -log2 of the largest cylinder mass over a window (per-fiber Viterbi for the
// Markov case). The mass-distribution lower bound feeds on this.
inline double min_log2_inverse_mass_fibers(const MeasureSpec& m,
                                           const std::vector<long>& fiber_lengths) {
    if (m.kind == MeasureKind::bernoulli) {
        double pmax = 0;
        for (double x : m.per_letter.p) pmax = std::max(pmax, x);
        std::size_t cells = 0;
        for (long len : fiber_lengths) cells += static_cast<std::size_t>(len);
        return -static_cast<double>(cells) * std::log2(pmax);
    }
    KahanSum total;
    std::map<long, double> best_by_length;
    for (long len : fiber_lengths) {
        if (len <= 0) continue;
        auto it = best_by_length.find(len);
        if (it == best_by_length.end())
            it = best_by_length.emplace(len, detail::markov_best_log2_mass(m, len)).first;
        if (it->second == -std::numeric_limits<double>::infinity())
            throw precondition_error("measure assigns zero mass to every word of a fiber");
        total.add(-it->second);
    }
    return total.value();
}

}  // namespace meandim
