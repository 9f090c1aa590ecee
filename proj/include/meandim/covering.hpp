#pragma once

// Executable form of the tower covering lemma: instance data (shape arrays,
// base sets, ambient set, delta/C/D), exact hypothesis checking, epsilon-
// disjointness decisions (flow-exact at small scale, greedy above), greedy
// subfamily selection with seeded restarts, and instance generators.

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "meandim/core.hpp"
#include "meandim/group.hpp"

namespace meandim {

struct TranslateArray {
    GroupSpec spec;                                            // ambient group
    std::vector<std::vector<std::vector<GroupElement>>> shapes;  // [level][j] = F_{i,j}
    std::vector<std::vector<std::vector<GroupElement>>> bases;   // [level][j] = A_{i,j}
    std::vector<GroupElement> ambient;                         // F
    std::vector<GroupElement> d_set;                           // D, defaults to {identity}
    double delta = 0.001;                                      // in (0, 1/100)
    double big_c = 2.0;                                        // per-level constant C

    double epsilon0() const { return 10.0 * std::pow(delta, 0.25); }
    std::size_t levels() const { return shapes.size(); }
};

// ------------------------------------------------------------- hypotheses --

struct HypothesisReport {
    bool containment_ok = true;
    bool per_level_ok = true;
    bool cross_level_ok = true;
    bool delta_in_range = true;
    double alpha = 0;  // min_i |D A_{i,*}| / |F|
    std::vector<std::string> failures;

    bool all_ok() const {
        return containment_ok && per_level_ok && cross_level_ok && delta_in_range;
    }
};

namespace detail {

inline ElementSet to_set(const std::vector<GroupElement>& v) {
    return ElementSet(v.begin(), v.end());
}

inline std::vector<GroupElement> translate_cells(const std::vector<GroupElement>& shape,
                                                 const GroupElement& a, const GroupSpec& spec) {
    std::vector<GroupElement> out;
    out.reserve(shape.size());
    for (const GroupElement& f : shape) out.push_back(multiply(f, a, spec));
    return out;
}

// multiply into a reused element, skipping the per-call allocation
inline void multiply_reuse(const GroupSpec& spec, const GroupElement& a, const GroupElement& b,
                           GroupElement& out) {
    out.c.resize(static_cast<std::size_t>(spec.arity()));
    multiply_span(spec, a.c.data(), b.c.data(), out.c.data());
}

}  // namespace detail

inline HypothesisReport check_hypotheses(const TranslateArray& t) {
    HypothesisReport rep;
    if (!(t.delta > 0 && t.delta < 0.01)) {
        rep.delta_in_range = false;
        rep.failures.push_back("delta outside (0, 1/100)");
    }
    const ElementSet ambient = detail::to_set(t.ambient);

    // containment F_{i,j} a subset of F
    GroupElement cbuf = identity_of(t.spec);
    for (std::size_t i = 0; i < t.levels(); ++i)
        for (std::size_t j = 0; j < t.shapes[i].size(); ++j) {
            bool ok = true;
            for (const GroupElement& a : t.bases[i][j]) {
                for (const GroupElement& f : t.shapes[i][j]) {
                    detail::multiply_reuse(t.spec, f, a, cbuf);
                    if (!ambient.count(cbuf)) {
                        ok = false;
                        break;
                    }
                }
                if (!ok) break;
            }
            if (!ok) {
                rep.containment_ok = false;
                rep.failures.push_back("containment fails at level " + std::to_string(i + 1) +
                                       ", shape " + std::to_string(j + 1));
            }
        }

    // per-level: |U_{k'<k} F_{i,k'}^{-1} F_{i,k}| <= C |F_{i,k}|
    GroupElement buf = identity_of(t.spec);
    for (std::size_t i = 0; i < t.levels(); ++i) {
        for (std::size_t k = 1; k < t.shapes[i].size(); ++k) {
            ElementSet u;
            for (std::size_t kp = 0; kp < k; ++kp)
                for (const GroupElement& f : t.shapes[i][kp]) {
                    const GroupElement f_inv = inverse(f, t.spec);
                    for (const GroupElement& g : t.shapes[i][k]) {
                        detail::multiply_reuse(t.spec, f_inv, g, buf);
                        u.insert(buf);
                    }
                }
            if (static_cast<double>(u.size()) >
                t.big_c * static_cast<double>(t.shapes[i][k].size()) + 1e-9) {
                rep.per_level_ok = false;
                rep.failures.push_back("per-level condition fails at level " + std::to_string(i + 1) +
                                       ", k=" + std::to_string(k + 1) + " (" + std::to_string(u.size()) +
                                       " > C*" + std::to_string(t.shapes[i][k].size()) + ")");
            }
        }
    }

    // cross-level: |U_{i'<i} D F_{i',*}^{-1} F_{i,k}| <= (1+delta) |F_{i,k}|
    for (std::size_t i = 1; i < t.levels(); ++i) {
        // D F_{i',*}^{-1} accumulated over lower levels
        ElementSet lower_inv;
        for (std::size_t ip = 0; ip < i; ++ip)
            for (const auto& shape : t.shapes[ip])
                for (const GroupElement& f : shape)
                    for (const GroupElement& d : t.d_set)
                        lower_inv.insert(multiply(d, inverse(f, t.spec), t.spec));
        for (std::size_t k = 0; k < t.shapes[i].size(); ++k) {
            ElementSet u;
            for (const GroupElement& pre : lower_inv)
                for (const GroupElement& g : t.shapes[i][k]) {
                    detail::multiply_reuse(t.spec, pre, g, buf);
                    u.insert(buf);
                }
            if (static_cast<double>(u.size()) >
                (1.0 + t.delta) * static_cast<double>(t.shapes[i][k].size()) + 1e-9) {
                rep.cross_level_ok = false;
                rep.failures.push_back("cross-level condition fails at level " + std::to_string(i + 1) +
                                       ", k=" + std::to_string(k + 1));
            }
        }
    }

    // alpha = min_i |D A_{i,*}| / |F|
    double alpha = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < t.levels(); ++i) {
        ElementSet da;
        for (const auto& base : t.bases[i])
            for (const GroupElement& a : base)
                for (const GroupElement& d : t.d_set) {
                    detail::multiply_reuse(t.spec, d, a, buf);
                    da.insert(buf);
                }
        alpha = std::min(alpha, static_cast<double>(da.size()) / static_cast<double>(t.ambient.size()));
    }
    rep.alpha = alpha;
    return rep;
}

// ------------------------------------------------------ epsilon-disjointness --

struct DisjointnessResult {
    bool disjoint = false;
    bool exact = true;  // false: greedy heuristic above the flow cell cap
    std::vector<std::vector<GroupElement>> shrinkings;  // witness when disjoint
};

namespace detail {

// Compact Dinic max-flow for the shrinking feasibility problem.
class Dinic {
public:
    explicit Dinic(int n) : adj_(static_cast<std::size_t>(n)) {}

    void add_edge(int from, int to, long cap) {
        adj_[static_cast<std::size_t>(from)].push_back(static_cast<int>(edges_.size()));
        edges_.push_back({to, cap});
        adj_[static_cast<std::size_t>(to)].push_back(static_cast<int>(edges_.size()));
        edges_.push_back({from, 0});
    }

    long max_flow(int s, int t) {
        long flow = 0;
        while (bfs(s, t)) {
            iter_.assign(adj_.size(), 0);
            long f;
            while ((f = dfs(s, t, std::numeric_limits<long>::max())) > 0) flow += f;
        }
        return flow;
    }

    long edge_flow_reverse(int edge_index) const {
        return edges_[static_cast<std::size_t>(edge_index) ^ 1U].cap;
    }

private:
    struct Edge {
        int to;
        long cap;
    };
    std::vector<Edge> edges_;
    std::vector<std::vector<int>> adj_;
    std::vector<int> level_, iter_;

    bool bfs(int s, int t) {
        level_.assign(adj_.size(), -1);
        std::vector<int> q{s};
        level_[static_cast<std::size_t>(s)] = 0;
        for (std::size_t head = 0; head < q.size(); ++head) {
            const int u = q[head];
            for (int ei : adj_[static_cast<std::size_t>(u)]) {
                const Edge& e = edges_[static_cast<std::size_t>(ei)];
                if (e.cap > 0 && level_[static_cast<std::size_t>(e.to)] < 0) {
                    level_[static_cast<std::size_t>(e.to)] = level_[static_cast<std::size_t>(u)] + 1;
                    q.push_back(e.to);
                }
            }
        }
        return level_[static_cast<std::size_t>(t)] >= 0;
    }

    long dfs(int u, int t, long f) {
        if (u == t) return f;
        for (int& i = iter_[static_cast<std::size_t>(u)];
             i < static_cast<int>(adj_[static_cast<std::size_t>(u)].size()); ++i) {
            const int ei = adj_[static_cast<std::size_t>(u)][static_cast<std::size_t>(i)];
            Edge& e = edges_[static_cast<std::size_t>(ei)];
            if (e.cap <= 0 || level_[static_cast<std::size_t>(e.to)] !=
                                  level_[static_cast<std::size_t>(u)] + 1)
                continue;
            const long d = dfs(e.to, t, std::min(f, e.cap));
            if (d > 0) {
                e.cap -= d;
                edges_[static_cast<std::size_t>(ei) ^ 1U].cap += d;
                return d;
            }
        }
        return 0;
    }
};

inline long shrink_requirement(double eps, std::size_t size) {
    const double x = (1.0 - eps) * static_cast<double>(size);
    return std::lround(std::ceil(x - 1e-9));
}

}  // namespace detail

// Do pairwise-disjoint shrinkings A_i' with |A_i'| >= (1-eps)|A_i| exist?
// Exact (max-flow) when the total cell count is small; greedy with the exact
// flag cleared above the cap.
inline DisjointnessResult epsilon_disjoint_check(const std::vector<std::vector<GroupElement>>& family,
                                                 double eps, std::size_t flow_cell_cap = 1000) {
    if (!(eps > 0.0 && eps < 1.0)) throw precondition_error("epsilon must lie in (0,1)");
    DisjointnessResult res;
    std::size_t total = 0;
    for (const auto& a : family) total += a.size();

    // index the cells
    std::unordered_map<GroupElement, int, ElementHash> cell_id;
    for (const auto& a : family)
        for (const GroupElement& g : a) cell_id.emplace(g, static_cast<int>(cell_id.size()));

    if (total <= flow_cell_cap) {
        const int k = static_cast<int>(family.size());
        const int cells = static_cast<int>(cell_id.size());
        const int source = 0, sink = 1 + k + cells;
        detail::Dinic net(sink + 1);
        long need_total = 0;
        for (int i = 0; i < k; ++i) {
            const long need = detail::shrink_requirement(eps, family[static_cast<std::size_t>(i)].size());
            need_total += need;
            net.add_edge(source, 1 + i, need);
        }
        std::vector<std::vector<std::pair<int, const GroupElement*>>> tracked(
            static_cast<std::size_t>(k));
        int edge_counter = 2 * k;
        for (int i = 0; i < k; ++i)
            for (const GroupElement& g : family[static_cast<std::size_t>(i)]) {
                net.add_edge(1 + i, 1 + k + cell_id.at(g), 1);
                tracked[static_cast<std::size_t>(i)].push_back({edge_counter, &g});
                edge_counter += 2;
            }
        for (const auto& [g, id] : cell_id) net.add_edge(1 + k + id, sink, 1);
        const long flow = net.max_flow(source, sink);
        res.exact = true;
        res.disjoint = (flow == need_total);
        if (res.disjoint) {
            res.shrinkings.resize(static_cast<std::size_t>(k));
            for (int i = 0; i < k; ++i)
                for (const auto& [ei, gp] : tracked[static_cast<std::size_t>(i)])
                    if (net.edge_flow_reverse(ei) > 0)
                        res.shrinkings[static_cast<std::size_t>(i)].push_back(*gp);
        }
        return res;
    }

    // greedy heuristic: smallest sets claim first
    res.exact = false;
    std::vector<std::size_t> order(family.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return family[a].size() < family[b].size();
    });
    ElementSet claimed;
    res.shrinkings.resize(family.size());
    for (std::size_t i : order) {
        const long need = detail::shrink_requirement(eps, family[i].size());
        std::vector<GroupElement> mine;
        for (const GroupElement& g : family[i]) {
            if (static_cast<long>(mine.size()) >= need) break;
            if (!claimed.count(g)) mine.push_back(g);
        }
        if (static_cast<long>(mine.size()) < need) {
            res.disjoint = false;
            return res;
        }
        for (const GroupElement& g : mine) claimed.insert(g);
        res.shrinkings[i] = std::move(mine);
    }
    res.disjoint = true;
    return res;
}

// ----------------------------------------------------------- selection --

struct SelectionResult {
    struct Chosen {
        std::size_t level;  // 0-based
        std::size_t shape;  // 0-based
        GroupElement base;
        std::vector<GroupElement> witness;  // claimed disjoint shrinking
    };
    std::vector<Chosen> chosen;
    std::size_t covered_cells = 0;   // |union of chosen translates|, exact
    double coverage_fraction = 0;
    double epsilon0 = 0;
    double alpha = 0;
    double coverage_target = 0;      // (alpha - delta^{1/4}) |F|
    bool met_bound = false;
    int restarts_used = 0;
};

// Verify a selection certificate independently: witnesses are pairwise
// disjoint, large enough, and the coverage count is re-derived by set union.
inline bool verify_selection(const TranslateArray& t, const SelectionResult& sel) {
    const double eps0 = t.epsilon0();
    ElementSet claimed;
    ElementSet covered;
    for (const auto& ch : sel.chosen) {
        const auto cells = detail::translate_cells(t.shapes[ch.level][ch.shape], ch.base, t.spec);
        const ElementSet cell_set = detail::to_set(cells);
        const long need = eps0 >= 1.0 ? 0 : detail::shrink_requirement(eps0, cells.size());
        if (static_cast<long>(ch.witness.size()) < need) return false;
        for (const GroupElement& g : ch.witness) {
            if (!cell_set.count(g)) return false;
            if (!claimed.insert(g).second) return false;  // witness overlap
        }
        for (const GroupElement& g : cells) covered.insert(g);
    }
    if (covered.size() != sel.covered_cells) return false;
    // epsilon-disjointness consequence: sum of sizes bounded by the union
    if (eps0 < 1.0) {
        double total = 0;
        for (const auto& ch : sel.chosen)
            total += static_cast<double>(t.shapes[ch.level][ch.shape].size());
        if (total > static_cast<double>(covered.size()) / (1.0 - eps0) + 1e-6) return false;
    }
    return true;
}

namespace detail {

// Candidate translate with its cells resolved to ambient indices once, so the
// greedy passes and restarts run on plain integers.
struct IndexedCandidate {
    std::size_t level, shape;
    const GroupElement* base;
    std::vector<std::int32_t> cell_ids;
    long need;
};

struct IndexedInstance {
    std::vector<IndexedCandidate> candidates;
    std::vector<const GroupElement*> id_to_cell;
    double epsilon0;
};

inline SelectionResult greedy_pass(const TranslateArray& t, const IndexedInstance& inst,
                                   const std::vector<std::size_t>& order, double alpha) {
    SelectionResult sel;
    sel.epsilon0 = inst.epsilon0;
    sel.alpha = alpha;
    sel.coverage_target = (alpha - std::pow(t.delta, 0.25)) * static_cast<double>(t.ambient.size());
    std::vector<char> claimed(inst.id_to_cell.size(), 0);
    std::vector<char> covered(inst.id_to_cell.size(), 0);
    std::size_t claimed_count = 0, covered_count = 0;
    std::vector<std::int32_t> mine;
    for (std::size_t ci : order) {
        const IndexedCandidate& cand = inst.candidates[ci];
        if (covered_count == inst.id_to_cell.size()) break;  // nothing left to gain
        if (cand.need > 0 && claimed_count == inst.id_to_cell.size()) break;
        mine.clear();
        for (std::int32_t id : cand.cell_ids) {
            if (static_cast<long>(mine.size()) >= cand.need) break;
            if (!claimed[static_cast<std::size_t>(id)]) mine.push_back(id);
        }
        if (static_cast<long>(mine.size()) < cand.need) continue;  // breaks disjointness
        for (std::int32_t id : mine) {
            claimed[static_cast<std::size_t>(id)] = 1;
            ++claimed_count;
        }
        for (std::int32_t id : cand.cell_ids)
            if (!covered[static_cast<std::size_t>(id)]) {
                covered[static_cast<std::size_t>(id)] = 1;
                ++covered_count;
            }
        SelectionResult::Chosen ch;
        ch.level = cand.level;
        ch.shape = cand.shape;
        ch.base = *cand.base;
        ch.witness.reserve(mine.size());
        for (std::int32_t id : mine) ch.witness.push_back(*inst.id_to_cell[static_cast<std::size_t>(id)]);
        sel.chosen.push_back(std::move(ch));
    }
    sel.covered_cells = covered_count;
    sel.coverage_fraction =
        static_cast<double>(covered_count) / static_cast<double>(t.ambient.size());
    sel.met_bound = static_cast<double>(covered_count) >= sel.coverage_target - 1e-9;
    return sel;
}

}  // namespace detail

// Greedy selection from the top level down, largest shapes first, admitting a
// translate when a disjoint shrinking of the required size is still available.
// Seeded randomized restarts reshuffle the admission order if the coverage
// target is missed; a miss after all restarts is reported honestly.
inline SelectionResult select_subfamily(const TranslateArray& t, std::uint64_t seed = 0,
                                        int restarts = 8) {
    const HypothesisReport hyp = check_hypotheses(t);
    if (!hyp.all_ok())
        throw precondition_error("translate array violates the covering hypotheses: " +
                                 (hyp.failures.empty() ? std::string("(unknown)") : hyp.failures[0]));

    detail::IndexedInstance inst;
    inst.epsilon0 = t.epsilon0();
    std::unordered_map<GroupElement, std::int32_t, ElementHash> cell_id;
    cell_id.reserve(t.ambient.size() * 2);
    for (const GroupElement& g : t.ambient) {
        const auto id = static_cast<std::int32_t>(inst.id_to_cell.size());
        if (cell_id.emplace(g, id).second) inst.id_to_cell.push_back(&g);
    }
    for (std::size_t i = t.levels(); i-- > 0;) {
        std::vector<std::size_t> shape_order(t.shapes[i].size());
        for (std::size_t j = 0; j < shape_order.size(); ++j) shape_order[j] = j;
        std::sort(shape_order.begin(), shape_order.end(), [&](std::size_t a, std::size_t b) {
            return t.shapes[i][a].size() > t.shapes[i][b].size();
        });
        GroupElement buf = identity_of(t.spec);
        for (std::size_t j : shape_order)
            for (const GroupElement& a : t.bases[i][j]) {
                detail::IndexedCandidate cand;
                cand.level = i;
                cand.shape = j;
                cand.base = &a;
                cand.cell_ids.reserve(t.shapes[i][j].size());
                for (const GroupElement& f : t.shapes[i][j]) {
                    detail::multiply_reuse(t.spec, f, a, buf);
                    cand.cell_ids.push_back(cell_id.at(buf));
                }
                cand.need = inst.epsilon0 >= 1.0
                                ? 0
                                : detail::shrink_requirement(inst.epsilon0, cand.cell_ids.size());
                inst.candidates.push_back(std::move(cand));
            }
    }

    std::vector<std::size_t> order(inst.candidates.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    SelectionResult best = detail::greedy_pass(t, inst, order, hyp.alpha);
    best.restarts_used = 0;
    if (best.met_bound) return best;

    std::mt19937_64 rng(seed);
    for (int r = 1; r <= restarts; ++r) {
        std::shuffle(order.begin(), order.end(), rng);
        SelectionResult attempt = detail::greedy_pass(t, inst, order, hyp.alpha);
        attempt.restarts_used = r;
        if (attempt.covered_cells > best.covered_cells) best = std::move(attempt);
        if (best.met_bound) break;
    }
    return best;
}

// ----------------------------------------------------------- generators --

// Interval instances over Z: ambient [0, length), shapes are intervals
// [0, len). Base sets are the positions where the shape fits, thinned to the
// requested density. A dense singleton level can be prepended; it never
// disturbs the cross-level condition since D F^{-1} = {0} there.
struct IntervalInstanceParams {
    long ambient_length = 10000;
    std::vector<long> shape_lengths{10, 100, 1000};  // one level, ascending
    double base_density = 1.0;                       // fraction of positions kept
    double delta = 1e-5;
    bool singleton_level = false;                    // prepend a dense {0} level
    std::uint64_t seed = 0;
};

inline TranslateArray make_interval_instance(const IntervalInstanceParams& p) {
    TranslateArray t;
    t.spec = GroupSpec::integer_lattice(1);
    t.delta = p.delta;
    t.d_set = {identity_of(t.spec)};
    for (long x = 0; x < p.ambient_length; ++x) t.ambient.push_back(GroupElement({x}));

    std::mt19937_64 rng(p.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);

    auto interval_shape = [](long len) {
        std::vector<GroupElement> cells;
        for (long x = 0; x < len; ++x) cells.push_back(GroupElement({x}));
        return cells;
    };

    if (p.singleton_level) {
        t.shapes.push_back({interval_shape(1)});
        t.bases.push_back({t.ambient});
    }

    std::vector<std::vector<GroupElement>> level_shapes, level_bases;
    double max_ratio = 1.0;
    std::vector<long> sorted_lengths = p.shape_lengths;
    std::sort(sorted_lengths.begin(), sorted_lengths.end());
    for (std::size_t k = 0; k < sorted_lengths.size(); ++k) {
        const long len = sorted_lengths[k];
        level_shapes.push_back(interval_shape(len));
        std::vector<GroupElement> base;
        for (long a = 0; a + len <= p.ambient_length; ++a)
            if (p.base_density >= 1.0 || u(rng) < p.base_density) base.push_back(GroupElement({a}));
        if (base.empty()) base.push_back(GroupElement({0}));
        level_bases.push_back(std::move(base));
        if (k > 0) {
            // |U_{k'<k} F_{k'}^{-1} F_k| = len + len_{k-1} - 1 over intervals
            max_ratio = std::max(max_ratio,
                                 static_cast<double>(len + sorted_lengths[k - 1] - 1) /
                                     static_cast<double>(len));
        }
    }
    t.shapes.push_back(std::move(level_shapes));
    t.bases.push_back(std::move(level_bases));
    t.big_c = max_ratio + 0.5;
    return t;
}

// Three-level tower: dense singletons, short intervals, long intervals, with
// the middle length pinned by the cross-level budget s <= delta*len + 1.
struct TowerInstanceParams {
    long ambient_length = 9000;
    long top_length = 8000;
    double delta = 0.009;
    double base_density = 0.7;
    std::uint64_t seed = 0;
};

inline TranslateArray make_tower_instance(const TowerInstanceParams& p) {
    const long mid = std::max(2L, static_cast<long>(p.delta * static_cast<double>(p.top_length)));
    TranslateArray t;
    t.spec = GroupSpec::integer_lattice(1);
    t.delta = p.delta;
    t.d_set = {identity_of(t.spec)};
    for (long x = 0; x < p.ambient_length; ++x) t.ambient.push_back(GroupElement({x}));

    std::mt19937_64 rng(p.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto interval_shape = [](long len) {
        std::vector<GroupElement> cells;
        for (long x = 0; x < len; ++x) cells.push_back(GroupElement({x}));
        return cells;
    };
    auto dense_base = [&](long len, double density) {
        std::vector<GroupElement> base;
        for (long a = 0; a + len <= p.ambient_length; ++a)
            if (density >= 1.0 || u(rng) < density) base.push_back(GroupElement({a}));
        if (base.empty()) base.push_back(GroupElement({0}));
        return base;
    };

    t.shapes.push_back({interval_shape(1)});
    t.bases.push_back({t.ambient});
    t.shapes.push_back({interval_shape(mid / 2 + 1), interval_shape(mid)});
    t.bases.push_back({dense_base(mid / 2 + 1, p.base_density), dense_base(mid, p.base_density)});
    t.shapes.push_back({interval_shape(p.top_length)});
    t.bases.push_back({dense_base(p.top_length, p.base_density)});
    t.big_c = 2.5;
    return t;
}

}  // namespace meandim
