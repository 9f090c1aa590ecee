#pragma once

// Computable finite-size versions of the dimension quantities: covering
// numbers of the dynamical ultrametric (exact, as cylinder counts), the rate
// S(X, G1, d, 2^-M), metric mean dimension tables, scale-Hausdorff upper
// bounds, mass-distribution lower bounds, growth constants and entropy
// estimates, plus the bundled theorem-verification report.

#include <atomic>
#include <cmath>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "meandim/core.hpp"
#include "meandim/group.hpp"
#include "meandim/measure.hpp"
#include "meandim/subshift.hpp"

namespace meandim {

namespace detail {

// Run work(i) for i in [0, count) over a bounded worker pool. Outputs land in
// preallocated slots, so results are identical for any job count.
template <typename F>
void parallel_cells(std::size_t count, int jobs, F&& work) {
    if (jobs <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) work(i);
        return;
    }
    const int workers = std::min<int>(jobs, static_cast<int>(count));
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                work(i);
            }
        });
    for (auto& th : pool) th.join();
}

}  // namespace detail

struct TableRow {
    long n = 0;       // G1 radius (or window parameter)
    long m = 0;       // depth / scale exponent
    double value = 0;
    bool exact = true;
};

struct ConvergenceTable {
    std::string estimator;
    std::vector<TableRow> rows;
    std::optional<double> target;
    std::string target_note;
};

// ----------------------------------------------------------- box counting --

struct LogCount {
    double log2 = 0;
    bool exact = true;
    std::size_t cells = 0;
};

namespace detail {

inline bool g2_is_line(const GroupSpec& product) {
    const GroupSpec& g2 = right_factor(product);
    return g2.kind == GroupKind::integer_lattice && g2.lattice_dim == 1;
}

// Window B1(n1) x B2(m2) as an explicit cell list.
inline Window explicit_box(const GroupSpec& product, int n1, int m2, const Limits& lim) {
    const auto b1 = build_ball(left_factor(product), n1, lim);
    const auto b2 = build_ball(right_factor(product), m2, lim);
    if (b1.size() * b2.size() > lim.window_cells)
        throw resource_error("box window exceeds cell cap");
    std::vector<GroupElement> cells;
    cells.reserve(b1.size() * b2.size());
    for (const auto& a : b1.elements)
        for (const auto& b : b2.elements) cells.push_back(join(a, b));
    return Window::from_cells(std::move(cells),
                              "B1(" + std::to_string(n1) + ") x B2(" + std::to_string(m2) + ")");
}

}  // namespace detail

// log2 of |pi_W(X)| over W = B1(n1) x B2(m2), without materializing the
// window when a closed form applies.
inline LogCount log2_count_box(const SubshiftSpec& shift, const GroupSpec& product, int n1, int m2,
                               const Limits& lim = default_limits()) {
    const std::size_t gamma1 = build_ball(left_factor(product), n1, lim).size();
    const std::size_t gamma2 = build_ball(right_factor(product), m2, lim).size();
    const std::size_t cells = gamma1 * gamma2;
    switch (shift.kind) {
        case SubshiftKind::full_shift:
            return {static_cast<double>(cells) * std::log2(shift.alphabet.size()), true, cells};
        case SubshiftKind::fiber_sft: {
            if (!detail::g2_is_line(product))
                throw incompatible_error("fiber SFT requires the G2 factor to be Z");
            FiberCounter counter(shift.alphabet.size(), shift.forbidden_words);
            const BigInt per_fiber = counter.count(2L * m2 + 1);
            if (per_fiber == 0) return {-std::numeric_limits<double>::infinity(), true, cells};
            return {static_cast<double>(gamma1) * log2_big(per_fiber), true, cells};
        }
        case SubshiftKind::general_sft: {
            const Window w = detail::explicit_box(product, n1, m2, lim);
            const CountResult r = count_patterns(shift, w, product, lim);
            if (r.value == 0) return {-std::numeric_limits<double>::infinity(), r.exact, cells};
            return {log2_big(r.value), r.exact, cells};
        }
    }
    throw error("unreachable subshift kind");
}

// ------------------------------------------------------- covering numbers --

// #(X, d^{sigma_1}_F, 2^-M), exact because the ultrametric's epsilon-balls are
// cylinders over the dynamical window. Empty F follows the B1(M) x B2(M)
// convention (F = {identity}).
inline CountResult covering_number(const SubshiftSpec& shift, const GroupSpec& product,
                                   std::vector<GroupElement> f_set, int depth,
                                   const Limits& lim = default_limits()) {
    if (f_set.empty()) f_set.push_back(identity_of(left_factor(product)));
    const Window w = dynamical_ball_window(product, f_set, depth, lim);
    return count_patterns(shift, w, product, lim);
}

// Same count for F = B1(N) in closed form: the window is B1(M+N) x B2(M).
inline LogCount log2_covering(const SubshiftSpec& shift, const GroupSpec& product, int n_radius,
                              int depth, const Limits& lim = default_limits()) {
    return log2_count_box(shift, product, n_radius + depth, depth, lim);
}

// ------------------------------------------------------------------ rates --

// Rows (N, M, log2 #(X, d_{B1(N)}, 2^-M) / |B1(N)|).
inline ConvergenceTable s_rate(const SubshiftSpec& shift, const GroupSpec& product, int depth,
                               const std::vector<int>& n_list,
                               const Limits& lim = default_limits()) {
    ConvergenceTable t;
    t.estimator = "s_rate";
    for (int n : n_list) {
        const LogCount c = log2_covering(shift, product, n, depth, lim);
        const std::size_t gamma1 = build_ball(left_factor(product), n, lim).size();
        t.rows.push_back({n, depth, c.log2 / static_cast<double>(gamma1), c.exact});
    }
    return t;
}

// Theoretical h_top of the bundled exact-countable kinds.
inline std::optional<double> h_top_value(const SubshiftSpec& shift) {
    switch (shift.kind) {
        case SubshiftKind::full_shift:
            return std::log2(shift.alphabet.size());
        case SubshiftKind::fiber_sft: {
            FiberCounter counter(shift.alphabet.size(), shift.forbidden_words);
            const BigInt a = counter.count(512), b = counter.count(513);
            if (a == 0 || b == 0) return 0.0;
            return log2_big(b) - log2_big(a);  // log2 of the Perron eigenvalue
        }
        case SubshiftKind::general_sft:
            return std::nullopt;
    }
    return std::nullopt;
}

// ------------------------------------------------------- growth constants --

struct GrowthConstants {
    std::vector<double> ratios;  // |B2(n)|/n for n = 1..n_max
    double c1 = 0;               // limsup proxy: max over the tail
    double c2 = 0;               // liminf proxy: min over the tail
    double c_limit = 0;          // tail-averaged increment; exact for linear growth
    double degree_fit = 0;
    bool degree_warning = false;  // deg(G2) does not look like 1
};

inline GrowthConstants growth_constants(const GroupSpec& g2, int n_max,
                                        const Limits& lim = default_limits()) {
    if (n_max < 2) throw precondition_error("growth constants need n_max >= 2");
    GrowthConstants gc;
    const GrowthTable t = growth_table(g2, n_max, lim);
    for (int n = 1; n <= n_max; ++n)
        gc.ratios.push_back(static_cast<double>(t.sizes[static_cast<std::size_t>(n)]) /
                            static_cast<double>(n));
    const std::size_t tail_start = gc.ratios.size() / 2;
    gc.c1 = 0;
    gc.c2 = std::numeric_limits<double>::infinity();
    for (std::size_t i = tail_start; i < gc.ratios.size(); ++i) {
        gc.c1 = std::max(gc.c1, gc.ratios[i]);
        gc.c2 = std::min(gc.c2, gc.ratios[i]);
    }
    KahanSum inc;
    std::size_t count = 0;
    for (std::size_t n = tail_start + 1; n < t.sizes.size(); ++n) {
        inc.add(static_cast<double>(t.sizes[n] - t.sizes[n - 1]));
        ++count;
    }
    gc.c_limit = count > 0 ? inc.value() / static_cast<double>(count) : gc.c2;
    gc.degree_fit = t.degree_fit;
    gc.degree_warning = std::abs(t.degree_fit - 1.0) > 0.2;
    return gc;
}

// --------------------------------------------------------- mdim estimates --

// Rows (N, M, s_rate/M), over the full (M, N) grid. The theorem target
// c * h_top is attached when both factors are computable.
inline ConvergenceTable mdim_m_estimate(const SubshiftSpec& shift, const GroupSpec& product,
                                        const std::vector<int>& m_list,
                                        const std::vector<int>& n_list,
                                        const Limits& lim = default_limits(), int jobs = 1) {
    ConvergenceTable t;
    t.estimator = "mdim_M";
    for (int m : m_list)
        if (m <= 0) throw precondition_error("mdim estimate needs depth M >= 1");
    t.rows.resize(m_list.size() * n_list.size());
    detail::parallel_cells(t.rows.size(), jobs, [&](std::size_t i) {
        const int m = m_list[i / n_list.size()];
        const int n = n_list[i % n_list.size()];
        const LogCount c = log2_covering(shift, product, n, m, lim);
        const std::size_t gamma1 = build_ball(left_factor(product), n, lim).size();
        t.rows[i] = {n, m, c.log2 / (static_cast<double>(gamma1) * static_cast<double>(m)), c.exact};
    });
    const auto h = h_top_value(shift);
    if (h) {
        const GrowthConstants gc = growth_constants(right_factor(product), 128, lim);
        if (std::abs(gc.c1 - gc.c2) <= 0.25 && !gc.degree_warning) {
            t.target = gc.c_limit * *h;
            t.target_note = "c * h_top";
        }
    }
    return t;
}

// dim_H(X, d_{B1(N)}, 2^-M) <= log2 #(X, d_{B1(N)}, 2^-M) / M.
inline double hdim_scale_upper(const SubshiftSpec& shift, const GroupSpec& product, int n_radius,
                               int depth, const Limits& lim = default_limits()) {
    if (depth <= 0) throw precondition_error("scale-Hausdorff bound needs M >= 1");
    return log2_covering(shift, product, n_radius, depth, lim).log2;
}

// Largest s with mu(C) <= (2^-r)^s for every cylinder of depth r >= M on the
// d_{B1(N)} windows: s = min_{r >= M} -log2(max cylinder mass on W(r)) / r.
// The scan over r stops once a certified floor on every remaining tail value
// exceeds the minimum found so far. The floor rests on: balls grow by at
// least one element per radius, per-window max masses only shrink as the
// window grows, and chain masses are superadditive up to log2(1/pi_min).
inline double hdim_scale_lower_mass(const MeasureSpec& measure, const GroupSpec& product,
                                    int n_radius, int depth,
                                    const Limits& lim = default_limits(),
                                    int scan_cap = (1 << 16)) {
    if (depth <= 0) throw precondition_error("mass lower bound needs M >= 1");
    if (measure.kind == MeasureKind::fiber_markov && !detail::g2_is_line(product))
        throw incompatible_error("fiber-markov mass bounds require the G2 factor to be Z");

    double pmax = 0, pi_min_positive = 1;
    if (measure.kind == MeasureKind::bernoulli) {
        for (double x : measure.per_letter.p) pmax = std::max(pmax, x);
        if (pmax >= 1.0) return 0.0;  // point mass certifies nothing
    } else {
        for (double x : measure.stationary)
            if (x > 0) pi_min_positive = std::min(pi_min_positive, x);
    }
    const double c_min = measure.kind == MeasureKind::bernoulli ? -std::log2(pmax) : 0.0;
    const double c0 = measure.kind == MeasureKind::fiber_markov ? std::log2(1.0 / pi_min_positive)
                                                                : 0.0;

    BallTable b1 = build_ball(left_factor(product), n_radius + depth + 64, lim);
    BallTable b2 = build_ball(right_factor(product), depth + 64, lim);
    auto gamma1 = [&](int radius) -> double {
        while (radius > b1.radius)
            b1 = build_ball(left_factor(product), std::max(radius, 2 * b1.radius), lim);
        return static_cast<double>(b1.gamma(radius));
    };
    auto gamma2 = [&](int radius) -> double {
        while (radius > b2.radius)
            b2 = build_ball(right_factor(product), std::max(radius, 2 * b2.radius), lim);
        return static_cast<double>(b2.gamma(radius));
    };

    double best = std::numeric_limits<double>::infinity();
    for (int r = depth; r <= depth + scan_cap; ++r) {
        double neg_log_mass, tail_unit;
        if (measure.kind == MeasureKind::bernoulli) {
            neg_log_mass = gamma1(r + n_radius) * gamma2(r) * c_min;
            // value(rho > r) >= gamma1(r+N) c_min gamma2(rho)/rho >= gamma1(r+N) c_min
            tail_unit = c_min;
        } else {
            const double per_fiber = -detail::markov_best_log2_mass(measure, 2L * r + 1);
            neg_log_mass = gamma1(r + n_radius) * per_fiber;
            // rho in (r, 2r): mass monotone; rho >= 2r: superadditivity
            tail_unit = std::max(0.0, std::min(per_fiber / (2.0 * r),
                                               (per_fiber - c0) / (2.0 * r + 1.0)));
        }
        best = std::min(best, neg_log_mass / static_cast<double>(r));
        if (best == 0.0) return 0.0;
        if (gamma1(r + n_radius) * tail_unit >= best) return best;
    }
    throw resource_error("mass-bound tail not certified within the scan cap; raise it");
}

// ------------------------------------------------------- entropy estimate --

// Rows (n, log2 |pi_{B_S(n)}(X)| / |B_S(n)|) over true product balls.
inline ConvergenceTable h_top_estimate(const SubshiftSpec& shift, const GroupSpec& product,
                                       const std::vector<int>& n_list,
                                       const Limits& lim = default_limits()) {
    ConvergenceTable t;
    t.estimator = "h_top";
    for (int n : n_list) {
        const BallTable b = build_ball(product, n, lim);
        const Window w = Window::from_cells(b.elements, "B_S(" + std::to_string(n) + ")");
        const CountResult c = count_patterns(shift, w, product, lim);
        const double v = c.value == 0 ? -std::numeric_limits<double>::infinity()
                                      : log2_big(c.value) / static_cast<double>(b.size());
        t.rows.push_back({n, n, v, c.exact});
    }
    if (auto h = h_top_value(shift)) {
        t.target = *h;
        t.target_note = "h_top";
    }
    return t;
}

// --------------------------------------------------------- theorem report --

// Max-entropy invariant measure of the bundled kinds, used as the default
// mass-distribution witness.
inline std::optional<MeasureSpec> default_measure_for(const SubshiftSpec& shift) {
    switch (shift.kind) {
        case SubshiftKind::full_shift:
            return MeasureSpec::bernoulli(
                FiniteDistribution::uniform(static_cast<std::size_t>(shift.alphabet.size())));
        case SubshiftKind::fiber_sft: {
            const int k = shift.alphabet.size();
            std::vector<std::vector<int>> adj(static_cast<std::size_t>(k),
                                              std::vector<int>(static_cast<std::size_t>(k), 1));
            for (const auto& w : shift.forbidden_words) {
                if (w.size() == 1) {
                    for (int j = 0; j < k; ++j) {
                        adj[static_cast<std::size_t>(w[0])][static_cast<std::size_t>(j)] = 0;
                        adj[static_cast<std::size_t>(j)][static_cast<std::size_t>(w[0])] = 0;
                    }
                } else if (w.size() == 2) {
                    adj[static_cast<std::size_t>(w[0])][static_cast<std::size_t>(w[1])] = 0;
                } else {
                    return std::nullopt;  // no Markov presentation at order 1
                }
            }
            return max_entropy_markov(adj);
        }
        case SubshiftKind::general_sft:
            return std::nullopt;
    }
    return std::nullopt;
}

struct Theorem1Report {
    ConvergenceTable mdim;        // s_rate / M per (N, M) cell
    ConvergenceTable hdim_upper;  // log2 cov / (M |B1(N)|)
    ConvergenceTable mass_lower;  // certified s / |B1(N)|
    GrowthConstants g2_constants;
    std::optional<double> target;  // c * h_top
    double achieved = 0;           // mdim value at the largest (M, N)
    double deviation = 0;
    bool has_mass_table = false;
};

inline Theorem1Report verify_theorem1(const SubshiftSpec& shift, const GroupSpec& product,
                                      const std::vector<int>& m_list, const std::vector<int>& n_list,
                                      std::optional<MeasureSpec> measure = std::nullopt,
                                      const Limits& lim = default_limits(), int jobs = 1) {
    if (m_list.empty() || n_list.empty()) throw precondition_error("empty budget lists");
    Theorem1Report rep;
    rep.mdim = mdim_m_estimate(shift, product, m_list, n_list, lim, jobs);
    rep.g2_constants = growth_constants(right_factor(product), 128, lim);

    rep.hdim_upper.estimator = "hdim_upper";
    if (!measure) measure = default_measure_for(shift);
    rep.has_mass_table = measure.has_value();
    rep.mass_lower.estimator = "hdim_mass_lower";
    rep.hdim_upper.rows.resize(m_list.size() * n_list.size());
    if (rep.has_mass_table) rep.mass_lower.rows.resize(m_list.size() * n_list.size());
    detail::parallel_cells(rep.hdim_upper.rows.size(), jobs, [&](std::size_t i) {
        const int m = m_list[i / n_list.size()];
        const int n = n_list[i % n_list.size()];
        const LogCount c = log2_covering(shift, product, n, m, lim);
        const double gamma1 = static_cast<double>(build_ball(left_factor(product), n, lim).size());
        rep.hdim_upper.rows[i] = {n, m, c.log2 / (static_cast<double>(m) * gamma1), c.exact};
        if (rep.has_mass_table) {
            const double s = hdim_scale_lower_mass(*measure, product, n, m, lim);
            rep.mass_lower.rows[i] = {n, m, s / gamma1, true};
        }
    });

    rep.target = rep.mdim.target;
    if (!rep.mdim.rows.empty()) {
        rep.achieved = rep.mdim.rows.back().value;
        if (rep.target) rep.deviation = std::abs(rep.achieved - *rep.target);
    }
    return rep;
}

}  // namespace meandim
