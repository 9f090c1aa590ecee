#pragma once

// Subshifts over product groups G1 x G2: windows, patterns, the 2^{-|g|_inf}
// ultrametric, shift actions, cylinders and exact pattern counting (closed
// form for full shifts, transfer automaton for fiber SFTs, backtracking for
// general SFTs).

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "meandim/core.hpp"
#include "meandim/group.hpp"

namespace meandim {

using Symbol = int;

struct Alphabet {
    std::vector<std::string> labels;

    Alphabet() = default;
    explicit Alphabet(int k) {
        for (int i = 0; i < k; ++i) labels.push_back(std::to_string(i));
    }
    explicit Alphabet(std::vector<std::string> names) : labels(std::move(names)) {}

    int size() const { return static_cast<int>(labels.size()); }
    Symbol index_of(const std::string& label) const {
        for (int i = 0; i < size(); ++i)
            if (labels[static_cast<std::size_t>(i)] == label) return i;
        throw precondition_error("unknown alphabet label '" + label + "'");
    }
};

// ---------------------------------------------------------------- windows --

struct Window {
    std::vector<GroupElement> cells;  // sorted, unique
    std::string provenance;
    std::unordered_map<GroupElement, std::size_t, ElementHash> idx;

    Window() = default;

    static Window from_cells(std::vector<GroupElement> raw, std::string provenance = "") {
        Window w;
        std::sort(raw.begin(), raw.end());
        raw.erase(std::unique(raw.begin(), raw.end()), raw.end());
        w.cells = std::move(raw);
        w.provenance = std::move(provenance);
        for (std::size_t i = 0; i < w.cells.size(); ++i) w.idx.emplace(w.cells[i], i);
        return w;
    }

    std::size_t size() const { return cells.size(); }
    bool contains(const GroupElement& g) const { return idx.count(g) != 0; }
    std::size_t index_of(const GroupElement& g) const {
        auto it = idx.find(g);
        if (it == idx.end()) throw precondition_error("cell not in window");
        return it->second;
    }
    bool subset_of(const Window& other) const {
        return std::all_of(cells.begin(), cells.end(),
                           [&](const GroupElement& g) { return other.contains(g); });
    }
};

struct Pattern {
    Window window;
    std::vector<Symbol> letters;  // aligned with window.cells

    Pattern() = default;
    Pattern(Window w, std::vector<Symbol> l) : window(std::move(w)), letters(std::move(l)) {
        if (letters.size() != window.size())
            throw precondition_error("pattern letters must cover exactly the window");
    }

    Symbol at(const GroupElement& cell) const { return letters[window.index_of(cell)]; }
    bool defined_on(const GroupElement& cell) const { return window.contains(cell); }

    friend bool operator==(const Pattern& a, const Pattern& b) {
        return a.window.cells == b.window.cells && a.letters == b.letters;
    }
};

// ----------------------------------------------------------- subshift spec --

enum class SubshiftKind { full_shift, fiber_sft, general_sft };

// A forbidden pattern for a general SFT: finite offset set with letters.
struct ForbiddenPattern {
    std::vector<GroupElement> offsets;
    std::vector<Symbol> letters;
};

struct SubshiftSpec {
    Alphabet alphabet;
    SubshiftKind kind = SubshiftKind::full_shift;
    std::vector<std::vector<Symbol>> forbidden_words;   // fiber_sft, along G2 = Z
    std::vector<ForbiddenPattern> forbidden_patterns;   // general_sft
    std::string name;

    static SubshiftSpec full_shift(Alphabet a) {
        SubshiftSpec s;
        s.alphabet = std::move(a);
        s.kind = SubshiftKind::full_shift;
        s.name = "full shift";
        return s;
    }
    static SubshiftSpec fiber_sft(Alphabet a, std::vector<std::vector<Symbol>> words) {
        SubshiftSpec s;
        s.alphabet = std::move(a);
        s.kind = SubshiftKind::fiber_sft;
        s.forbidden_words = std::move(words);
        s.name = "fiber SFT";
        for (const auto& w : s.forbidden_words) {
            if (w.empty()) throw precondition_error("forbidden word must be nonempty");
            for (Symbol c : w)
                if (c < 0 || c >= s.alphabet.size())
                    throw precondition_error("forbidden word letter outside alphabet");
        }
        return s;
    }
    static SubshiftSpec general_sft(Alphabet a, std::vector<ForbiddenPattern> pats) {
        SubshiftSpec s;
        s.alphabet = std::move(a);
        s.kind = SubshiftKind::general_sft;
        s.forbidden_patterns = std::move(pats);
        s.name = "general SFT";
        for (const auto& p : s.forbidden_patterns) {
            if (p.offsets.empty() || p.offsets.size() != p.letters.size())
                throw precondition_error("forbidden pattern needs matching offsets and letters");
            for (Symbol c : p.letters)
                if (c < 0 || c >= s.alphabet.size())
                    throw precondition_error("forbidden pattern letter outside alphabet");
        }
        return s;
    }

    // A letter that appears in no forbidden pattern extends any partial
    // assignment, making locally admissible counts globally exact.
    bool has_safe_symbol() const {
        if (kind != SubshiftKind::general_sft) return true;
        std::vector<char> used(static_cast<std::size_t>(alphabet.size()), 0);
        for (const auto& p : forbidden_patterns)
            for (Symbol c : p.letters) used[static_cast<std::size_t>(c)] = 1;
        return std::any_of(used.begin(), used.end(), [](char u) { return u == 0; });
    }
};

struct ShiftAction {
    int axis = 1;  // 1 or 2
    GroupElement element;
};

// ------------------------------------------------------------- the metric --

// Distance between two patterns scanned over the box ball of radius M:
// 2^{-min |g|_inf over disagreements}, or "indistinguishable at cap" when the
// patterns agree on the whole box (true distance < 2^{-M}).
struct MetricDistance {
    bool indistinguishable = false;  // agree on the whole inspected box
    int exponent = 0;                // valid when !indistinguishable

    double value() const {
        if (indistinguishable) throw precondition_error("distance below inspection cap has no value");
        return std::ldexp(1.0, -exponent);
    }
};

inline MetricDistance metric_distance(const Pattern& x, const Pattern& y, int depth_cap,
                                      const GroupSpec& product,
                                      const Limits& lim = default_limits()) {
    const BallTable b1 = build_ball(left_factor(product), depth_cap, lim);
    const BallTable b2 = build_ball(right_factor(product), depth_cap, lim);
    for (int r = 0; r <= depth_cap; ++r) {
        // shell |g|_inf = r: max of the factor lengths equals r
        for (std::size_t i = 0; i < b1.gamma(r); ++i) {
            const int l1 = b1.word_length_of(b1.elements[i]);
            const std::size_t j_begin = (l1 == r) ? 0 : b2.offsets[static_cast<std::size_t>(r)];
            for (std::size_t j = j_begin; j < b2.gamma(r); ++j) {
                const GroupElement cell = join(b1.elements[i], b2.elements[j]);
                if (!x.defined_on(cell) || !y.defined_on(cell))
                    throw precondition_error("patterns must cover the box ball of radius " +
                                             std::to_string(depth_cap));
                if (x.at(cell) != y.at(cell)) return MetricDistance{false, r};
            }
        }
    }
    return MetricDistance{true, depth_cap + 1};
}

// ------------------------------------------------------- dynamical windows --

// W = { (g1 g, g2) : l1(g1) <= M, g in F, l2(g2) <= M }: points agreeing on W
// are exactly the points with d^{sigma_1}_F distance < 2^{-M}.
inline Window dynamical_ball_window(const GroupSpec& product, const std::vector<GroupElement>& f_set,
                                    int depth, const Limits& lim = default_limits()) {
    if (depth < 0) throw precondition_error("negative window depth");
    const GroupSpec& g1 = left_factor(product);
    const BallTable b1 = build_ball(g1, depth, lim);
    const BallTable b2 = build_ball(right_factor(product), depth, lim);

    ElementSet g1_cells;
    for (const GroupElement& b : b1.elements)
        for (const GroupElement& f : f_set) g1_cells.insert(multiply(b, f, g1));
    if (g1_cells.size() * b2.size() > lim.window_cells)
        throw resource_error("dynamical ball window exceeds cell cap");

    std::vector<GroupElement> cells;
    cells.reserve(g1_cells.size() * b2.size());
    for (const GroupElement& a : g1_cells)
        for (const GroupElement& b : b2.elements) cells.push_back(join(a, b));
    return Window::from_cells(std::move(cells),
                              "B1(" + std::to_string(depth) + ")F x B2(" + std::to_string(depth) + ")");
}

// --------------------------------------------------------- fiber counting --

// Exact count of restrictions of bi-infinite admissible words to an interval,
// via the (m-1)-gram transfer automaton restricted to states with an infinite
// past resp. future. Counts use exact big integers.
class FiberCounter {
public:
    FiberCounter(int alphabet_size, std::vector<std::vector<Symbol>> forbidden)
        : k_(alphabet_size), forbidden_(std::move(forbidden)) {
        m_ = 1;
        for (const auto& w : forbidden_) m_ = std::max(m_, static_cast<int>(w.size()));
        if (m_ == 1) {
            allowed_letters_ = k_;
            banned_.assign(static_cast<std::size_t>(k_), 0);
            for (const auto& w : forbidden_) banned_[static_cast<std::size_t>(w[0])] = 1;
            allowed_letters_ = 0;
            for (char b : banned_)
                if (!b) ++allowed_letters_;
            return;
        }
        build_automaton();
    }

    // Number of length-L words that occur in some bi-infinite admissible word.
    BigInt count(long length) {
        if (length < 0) throw precondition_error("negative fiber length");
        auto it = cache_.find(length);
        if (it != cache_.end()) return it->second;
        BigInt result = compute(length);
        cache_.emplace(length, result);
        return result;
    }

    // Does the finite word avoid every forbidden word?
    bool locally_admissible(const std::vector<Symbol>& w) const {
        for (const auto& f : forbidden_) {
            if (f.size() > w.size()) continue;
            for (std::size_t i = 0; i + f.size() <= w.size(); ++i)
                if (std::equal(f.begin(), f.end(), w.begin() + static_cast<std::ptrdiff_t>(i)))
                    return false;
        }
        return true;
    }

    int max_forbidden_length() const { return m_; }

private:
    int k_;
    std::vector<std::vector<Symbol>> forbidden_;
    int m_ = 1;

    // m == 1 case
    std::vector<char> banned_;
    int allowed_letters_ = 0;

    // m >= 2 automaton over clean (m-1)-grams
    std::vector<std::vector<Symbol>> grams_;
    std::vector<std::vector<int>> next_;  // next_[state][letter] = state or -1
    std::vector<char> inf_past_, inf_future_;
    std::map<long, BigInt> cache_;

    void build_automaton() {
        const int glen = m_ - 1;
        double approx = 1;
        for (int i = 0; i < glen; ++i) approx *= k_;
        if (approx > (1 << 20))
            throw resource_error("fiber automaton state space too large");

        std::map<std::vector<Symbol>, int> id;
        std::vector<Symbol> word(static_cast<std::size_t>(glen), 0);
        while (true) {
            if (locally_admissible(word)) {
                id.emplace(word, static_cast<int>(grams_.size()));
                grams_.push_back(word);
            }
            int pos = glen - 1;
            while (pos >= 0 && word[static_cast<std::size_t>(pos)] == k_ - 1) {
                word[static_cast<std::size_t>(pos)] = 0;
                --pos;
            }
            if (pos < 0) break;
            ++word[static_cast<std::size_t>(pos)];
        }
        next_.assign(grams_.size(), std::vector<int>(static_cast<std::size_t>(k_), -1));
        for (std::size_t s = 0; s < grams_.size(); ++s) {
            for (Symbol c = 0; c < k_; ++c) {
                std::vector<Symbol> ext = grams_[s];
                ext.push_back(c);
                // only suffixes ending at the new letter can introduce a violation
                bool ok = true;
                for (const auto& f : forbidden_) {
                    if (f.size() > ext.size()) continue;
                    if (std::equal(f.begin(), f.end(), ext.end() - static_cast<std::ptrdiff_t>(f.size()))) {
                        ok = false;
                        break;
                    }
                }
                if (!ok) continue;
                std::vector<Symbol> tail(ext.begin() + 1, ext.end());
                auto it = id.find(tail);
                if (it != id.end()) next_[s][static_cast<std::size_t>(c)] = it->second;
            }
        }
        inf_future_ = essential_states(false);
        inf_past_ = essential_states(true);
    }

    // States with an infinite forward (or backward) path: iteratively strip
    // states with no outgoing (resp. incoming) edge among survivors.
    std::vector<char> essential_states(bool backward) const {
        std::vector<char> alive(grams_.size(), 1);
        bool changed = true;
        while (changed) {
            changed = false;
            std::vector<char> has_edge(grams_.size(), 0);
            for (std::size_t s = 0; s < grams_.size(); ++s) {
                if (!alive[s]) continue;
                for (Symbol c = 0; c < k_; ++c) {
                    const int t = next_[s][static_cast<std::size_t>(c)];
                    if (t >= 0 && alive[static_cast<std::size_t>(t)]) {
                        if (backward) has_edge[static_cast<std::size_t>(t)] = 1;  // t has a predecessor
                        else has_edge[s] = 1;                                     // s has a successor
                    }
                }
            }
            for (std::size_t s = 0; s < grams_.size(); ++s)
                if (alive[s] && !has_edge[s]) {
                    alive[s] = 0;
                    changed = true;
                }
        }
        return alive;
    }

    BigInt compute(long length) const {
        if (m_ == 1) {
            if (length == 0) return allowed_letters_ > 0 ? 1 : 0;
            if (allowed_letters_ == 0) return 0;
            return big_pow(static_cast<std::uint64_t>(allowed_letters_),
                           static_cast<std::size_t>(length));
        }
        const long glen = m_ - 1;
        bool any_biessential = false;
        for (std::size_t s = 0; s < grams_.size(); ++s)
            if (inf_past_[s] && inf_future_[s]) any_biessential = true;
        if (!any_biessential) return 0;  // empty fiber subshift
        if (length == 0) return 1;
        if (length < glen) {
            // short words: substrings of bi-essential grams
            std::map<std::vector<Symbol>, char> seen;
            for (std::size_t s = 0; s < grams_.size(); ++s) {
                if (!inf_past_[s] || !inf_future_[s]) continue;
                for (long i = 0; i + length <= glen; ++i)
                    seen.emplace(std::vector<Symbol>(grams_[s].begin() + i,
                                                     grams_[s].begin() + i + length),
                                 1);
            }
            return static_cast<std::uint64_t>(seen.size());
        }
        std::vector<BigInt> v(grams_.size());
        for (std::size_t s = 0; s < grams_.size(); ++s) v[s] = inf_past_[s] ? 1 : 0;
        for (long step = 0; step < length - glen; ++step) {
            std::vector<BigInt> w(grams_.size());
            for (std::size_t s = 0; s < grams_.size(); ++s) {
                if (v[s] == 0) continue;
                for (Symbol c = 0; c < k_; ++c) {
                    const int t = next_[s][static_cast<std::size_t>(c)];
                    if (t >= 0) w[static_cast<std::size_t>(t)] += v[s];
                }
            }
            v = std::move(w);
        }
        BigInt total = 0;
        for (std::size_t s = 0; s < grams_.size(); ++s)
            if (inf_future_[s]) total += v[s];
        return total;
    }
};

// -------------------------------------------------------- pattern counting --

struct CountResult {
    BigInt value;
    bool exact = true;  // false: locally admissible upper bound (general SFT)
};

namespace detail {

// Group window cells by their G1 component; G2 components must sit in Z.
inline std::map<GroupElement, std::vector<std::int64_t>> fiber_slices(const Window& w,
                                                                      const GroupSpec& product) {
    if (right_factor(product).kind != GroupKind::integer_lattice ||
        right_factor(product).lattice_dim != 1)
        throw incompatible_error("fiber SFT requires the G2 factor to be Z");
    std::map<GroupElement, std::vector<std::int64_t>> slices;
    for (const GroupElement& cell : w.cells)
        slices[project_left(cell, product)].push_back(cell.c.back());
    for (auto& [g1, coords] : slices) {
        std::sort(coords.begin(), coords.end());
        for (std::size_t i = 0; i + 1 < coords.size(); ++i)
            if (coords[i + 1] != coords[i] + 1)
                throw precondition_error("G2-slice of window is not an interval");
    }
    return slices;
}

inline BigInt backtrack_count(const SubshiftSpec& spec, const Window& w, const GroupSpec& product,
                              const Limits& lim) {
    if (w.size() > lim.backtrack_cells)
        throw resource_error("window exceeds backtracking cell cap");
    if (w.size() == 0) return 1;
    const int k = spec.alphabet.size();

    // occurrences: translate each forbidden pattern anywhere inside the window
    struct Occurrence {
        std::vector<std::pair<std::size_t, Symbol>> checks;  // (cell index, letter)
    };
    std::vector<std::vector<Occurrence>> by_last(w.size());
    for (const auto& fp : spec.forbidden_patterns) {
        ElementSet positions;
        for (const GroupElement& d : fp.offsets) {
            const GroupElement d_inv = inverse(d, product);
            for (const GroupElement& cell : w.cells) positions.insert(multiply(d_inv, cell, product));
        }
        for (const GroupElement& g : positions) {
            Occurrence occ;
            bool inside = true;
            for (std::size_t i = 0; i < fp.offsets.size(); ++i) {
                const GroupElement cell = multiply(fp.offsets[i], g, product);
                if (!w.contains(cell)) { inside = false; break; }
                occ.checks.emplace_back(w.index_of(cell), fp.letters[i]);
            }
            if (!inside) continue;
            std::sort(occ.checks.begin(), occ.checks.end());
            by_last[occ.checks.back().first].push_back(std::move(occ));
        }
    }

    std::vector<Symbol> assign(w.size(), -1);
    BigInt total = 0;
    const std::size_t n = w.size();
    // iterative DFS over cells in window order
    std::size_t depth = 0;
    assign[0] = -1;
    while (true) {
        if (assign[depth] + 1 >= k) {
            assign[depth] = -1;
            if (depth == 0) break;
            --depth;
            continue;
        }
        ++assign[depth];
        bool ok = true;
        for (const Occurrence& occ : by_last[depth]) {
            bool matches = true;
            for (const auto& [ci, letter] : occ.checks)
                if (assign[ci] != letter) { matches = false; break; }
            if (matches) { ok = false; break; }
        }
        if (!ok) continue;
        if (depth + 1 == n) {
            ++total;
        } else {
            ++depth;
        }
    }
    return total;
}

}  // namespace detail

// |pi_W(X)|: exact for full shifts and fiber SFTs; for general SFTs the count
// of locally admissible patterns, exact (flagged) only with a safe symbol.
inline CountResult count_patterns(const SubshiftSpec& spec, const Window& w,
                                  const GroupSpec& product, const Limits& lim = default_limits()) {
    if (w.size() > lim.window_cells) throw resource_error("window exceeds cell cap");
    switch (spec.kind) {
        case SubshiftKind::full_shift:
            return {big_pow(static_cast<std::uint64_t>(spec.alphabet.size()), w.size()), true};
        case SubshiftKind::fiber_sft: {
            FiberCounter counter(spec.alphabet.size(), spec.forbidden_words);
            const auto slices = detail::fiber_slices(w, product);
            if (slices.empty()) return {counter.count(0), true};
            BigInt total = 1;
            for (const auto& [g1, coords] : slices) {
                total *= counter.count(static_cast<long>(coords.size()));
                if (total == 0) break;
            }
            return {total, true};
        }
        case SubshiftKind::general_sft:
            return {detail::backtrack_count(spec, w, product, lim), spec.has_safe_symbol()};
    }
    throw error("unreachable subshift kind");
}

// --------------------------------------------------- cylinders and shifts --

inline Pattern cylinder_of(const Pattern& x, const Window& w) {
    std::vector<Symbol> letters;
    letters.reserve(w.size());
    for (const GroupElement& cell : w.cells) {
        if (!x.defined_on(cell)) throw precondition_error("pattern not defined on the whole window");
        letters.push_back(x.at(cell));
    }
    return Pattern(w, std::move(letters));
}

inline bool same_cylinder(const Pattern& a, const Pattern& b, const Window& w) {
    return cylinder_of(a, w) == cylinder_of(b, w);
}

// (sigma_{1,g} x)_{(g1,g2)} = x_{(g1 g, g2)}: the result lives on the pulled
// back window {(a g^{-1}, b)} with the letters carried along.
inline Pattern apply_shift(const Pattern& p, const ShiftAction& action, const GroupSpec& product) {
    if (action.axis != 1 && action.axis != 2) throw precondition_error("shift axis must be 1 or 2");
    const GroupSpec& factor = action.axis == 1 ? left_factor(product) : right_factor(product);
    const GroupElement g_inv = inverse(action.element, factor);

    std::vector<std::pair<GroupElement, Symbol>> moved;
    moved.reserve(p.window.size());
    for (std::size_t i = 0; i < p.window.size(); ++i) {
        const GroupElement& cell = p.window.cells[i];
        const GroupElement a = project_left(cell, product);
        const GroupElement b = project_right(cell, product);
        const GroupElement target = action.axis == 1
                                        ? join(multiply(a, g_inv, factor), b)
                                        : join(a, multiply(b, g_inv, factor));
        moved.emplace_back(target, p.letters[i]);
    }
    std::sort(moved.begin(), moved.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    std::vector<GroupElement> cells;
    std::vector<Symbol> letters;
    for (auto& [cell, letter] : moved) {
        cells.push_back(std::move(cell));
        letters.push_back(letter);
    }
    Window w = Window::from_cells(cells, p.window.provenance);
    return Pattern(std::move(w), std::move(letters));
}

}  // namespace meandim
