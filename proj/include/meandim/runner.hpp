#pragma once

// Orchestration for the command-line tool: a validated run configuration, the
// per-subcommand pipelines, and deterministic report assembly. The CLI is a
// thin argument parser over this header, so tests can drive the exact same
// paths in-process.

#include <algorithm>
#include <chrono>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "meandim/config.hpp"
#include "meandim/covering.hpp"
#include "meandim/dimension.hpp"
#include "meandim/info_theory.hpp"
#include "meandim/report.hpp"

namespace meandim {

struct RunConfig {
    std::string subcommand;
    std::string spec_path;      // group subcommand
    std::string group_path;
    std::string shift_path;
    std::string measure_path;
    std::string instance_path;  // covering
    std::string generate_preset;
    std::string window_desc;    // count subcommand, e.g. "ball:N=2,M=1"
    std::vector<int> n_list, m_list;
    int n_max = 8;
    int n_radius = 4096;        // Folner radius for rdim / verify-t2
    std::vector<double> eps_list;
    double delta = 0.1;
    std::uint64_t seed = 0;
    int jobs = 1;
    int restarts = 8;
    bool enumerate = false;
    bool tempered = false;
    std::string out_format = "json";
    std::string output_path;
    bool include_timing = true;

    void validate() const {
        if (jobs < 1) throw precondition_error("--jobs must be at least 1");
        for (int n : n_list)
            if (n < 0) throw precondition_error("N values must be nonnegative");
        for (int m : m_list)
            if (m < 0) throw precondition_error("M values must be nonnegative");
        if (out_format != "csv" && out_format != "json")
            throw precondition_error("--out must be csv or json");
    }
};

namespace detail {

struct Loaded {
    ConfigNode node;
    std::string canonical;
};

inline Loaded load(const std::string& path) {
    Loaded l;
    l.node = parse_config_file(path);
    l.canonical = l.node.canonical_string();
    return l;
}

inline void hash_mix(std::uint64_t& h, const std::string& s) {
    h = fnv1a64(s.data(), s.size(), h);
}

inline GroupSpec product_group_from(const ConfigNode& node, const std::string& path) {
    GroupSpec g = load_group_spec(node);
    if (!g.is_product())
        throw incompatible_error("group in '" + path + "' must be a direct product G1 x G2");
    return g;
}

inline void check_shift_group(const SubshiftSpec& shift, const GroupSpec& product,
                              const std::string& shift_path, const std::string& group_path) {
    if (shift.kind == SubshiftKind::fiber_sft && !g2_is_line(product))
        throw incompatible_error("fiber SFT in '" + shift_path + "' needs the G2 factor of '" +
                                 group_path + "' to be Z");
}

struct WindowRequest {
    std::string kind;  // ball | box | sball
    int n = 0, m = 0;
};

inline WindowRequest parse_window_desc(const std::string& desc) {
    const auto colon = desc.find(':');
    if (colon == std::string::npos)
        throw precondition_error("window descriptor needs '<kind>:<params>', got '" + desc + "'");
    WindowRequest w;
    w.kind = desc.substr(0, colon);
    std::string params = desc.substr(colon + 1);
    std::replace(params.begin(), params.end(), ',', ' ');
    std::istringstream ss(params);
    std::string tok;
    while (ss >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos)
            throw precondition_error("window parameter '" + tok + "' needs key=value");
        const std::string key = tok.substr(0, eq);
        const int value = std::stoi(tok.substr(eq + 1));
        if (key == "N" || key == "n") w.n = value;
        else if (key == "M" || key == "m") w.m = value;
        else throw precondition_error("unknown window parameter '" + key + "'");
    }
    if (w.kind != "ball" && w.kind != "box" && w.kind != "sball")
        throw precondition_error("unknown window kind '" + w.kind + "'");
    return w;
}

inline ConvergenceTable theorem2_column(const Theorem2Report& rep, const std::string& name,
                                        double Theorem2Row::*field, int n_radius) {
    ConvergenceTable t;
    t.estimator = name;
    t.target = rep.target;
    t.target_note = rep.target ? "c * h_mu" : "";
    for (const auto& row : rep.rows)
        t.rows.push_back({n_radius, row.depth, row.*field, true});
    return t;
}

}  // namespace detail

inline Report run(const RunConfig& cfg) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    Report rep;
    rep.subcommand = cfg.subcommand;
    rep.seed = cfg.seed;
    std::uint64_t hash = 1469598103934665603ULL;
    detail::hash_mix(hash, cfg.subcommand);
    {
        std::ostringstream params;
        params << cfg.n_max << '|' << cfg.n_radius << '|' << cfg.delta << '|' << cfg.seed << '|'
               << cfg.window_desc << '|' << cfg.generate_preset;
        for (int n : cfg.n_list) params << 'n' << n;
        for (int m : cfg.m_list) params << 'm' << m;
        for (double e : cfg.eps_list) params << 'e' << e;
        detail::hash_mix(hash, params.str());
    }

    if (cfg.subcommand == "group") {
        const auto spec_file = detail::load(cfg.spec_path);
        detail::hash_mix(hash, spec_file.canonical);
        const GroupSpec g = load_group_spec(spec_file.node);
        const GrowthTable gt = growth_table(g, cfg.n_max);
        rep.notes.emplace_back("group", g.name);

        ConvergenceTable gamma;
        gamma.estimator = "gamma";
        for (int n = 0; n <= cfg.n_max; ++n)
            gamma.rows.push_back({n, 0, static_cast<double>(gt.sizes[static_cast<std::size_t>(n)]), true});
        rep.tables.push_back(std::move(gamma));
        rep.verdicts.push_back({"degree_fit", std::nullopt, gt.degree_fit, 0});

        if (cfg.tempered) {
            const auto w = tempered_prefix(g, cfg.n_max);
            ConvergenceTable tt;
            tt.estimator = "tempered_ratio";
            for (std::size_t i = 0; i < w.per_n.size(); ++i)
                tt.rows.push_back({static_cast<long>(i + 2), 0, w.per_n[i].value(), true});
            rep.tables.push_back(std::move(tt));
            rep.verdicts.push_back({"tempered_witness_C", std::nullopt, w.max_ratio.value(), 0});
        }
        if (cfg.enumerate) {
            std::ostringstream enumeration;
            const std::size_t cap = std::min<std::size_t>(gt.ball.elements.size(), 4096);
            for (std::size_t i = 0; i < cap; ++i) {
                if (i) enumeration << ' ';
                enumeration << '(';
                const auto& e = gt.ball.elements[i];
                for (std::size_t c = 0; c < e.c.size(); ++c) {
                    if (c) enumeration << ' ';
                    enumeration << e.c[c];
                }
                enumeration << ')';
            }
            rep.notes.emplace_back("enumeration", enumeration.str());
        }
    } else if (cfg.subcommand == "count") {
        const auto group_file = detail::load(cfg.group_path);
        const auto shift_file = detail::load(cfg.shift_path);
        detail::hash_mix(hash, group_file.canonical);
        detail::hash_mix(hash, shift_file.canonical);
        const GroupSpec g = detail::product_group_from(group_file.node, cfg.group_path);
        const SubshiftSpec shift = load_subshift_spec(shift_file.node);
        detail::check_shift_group(shift, g, cfg.shift_path, cfg.group_path);

        const auto w = detail::parse_window_desc(cfg.window_desc);
        Window window;
        if (w.kind == "ball") {
            window = dynamical_ball_window(g, ball(left_factor(g), w.n), w.m);
        } else if (w.kind == "box") {
            window = Window::from_cells(box_ball(g, w.m), "box M=" + std::to_string(w.m));
        } else {
            window = Window::from_cells(ball(g, w.n), "B_S(" + std::to_string(w.n) + ")");
        }
        const CountResult c = count_patterns(shift, window, g);
        rep.notes.emplace_back("window", window.provenance);
        rep.notes.emplace_back("cells", std::to_string(window.size()));
        rep.notes.emplace_back("count", c.value.str());
        rep.notes.emplace_back("exact", c.exact ? "true" : "false (locally admissible upper bound)");
        ConvergenceTable t;
        t.estimator = "log2_count";
        t.rows.push_back({w.n, w.m, c.value == 0 ? 0.0 : log2_big(c.value), c.exact});
        rep.tables.push_back(std::move(t));
    } else if (cfg.subcommand == "entropy") {
        const auto group_file = detail::load(cfg.group_path);
        const auto shift_file = detail::load(cfg.shift_path);
        detail::hash_mix(hash, group_file.canonical);
        detail::hash_mix(hash, shift_file.canonical);
        const GroupSpec g = detail::product_group_from(group_file.node, cfg.group_path);
        const SubshiftSpec shift = load_subshift_spec(shift_file.node);
        detail::check_shift_group(shift, g, cfg.shift_path, cfg.group_path);
        std::vector<int> n_list = cfg.n_list.empty() ? std::vector<int>{1, 2, 4, 8} : cfg.n_list;

        if (!cfg.measure_path.empty()) {
            const auto measure_file = detail::load(cfg.measure_path);
            detail::hash_mix(hash, measure_file.canonical);
            const MeasureSpec m = load_measure_spec(measure_file.node);
            rep.tables.push_back(measure_entropy(m, shift, g, n_list));
        } else {
            rep.tables.push_back(h_top_estimate(shift, g, n_list));
        }
        const auto& t = rep.tables.back();
        if (t.target)
            rep.verdicts.push_back({t.estimator, t.target, t.rows.back().value,
                                    std::abs(t.rows.back().value - *t.target)});
    } else if (cfg.subcommand == "mdim" || cfg.subcommand == "hdim" ||
               cfg.subcommand == "verify-t1") {
        const auto group_file = detail::load(cfg.group_path);
        const auto shift_file = detail::load(cfg.shift_path);
        detail::hash_mix(hash, group_file.canonical);
        detail::hash_mix(hash, shift_file.canonical);
        const GroupSpec g = detail::product_group_from(group_file.node, cfg.group_path);
        const SubshiftSpec shift = load_subshift_spec(shift_file.node);
        detail::check_shift_group(shift, g, cfg.shift_path, cfg.group_path);
        std::optional<MeasureSpec> measure;
        if (!cfg.measure_path.empty()) {
            const auto measure_file = detail::load(cfg.measure_path);
            detail::hash_mix(hash, measure_file.canonical);
            measure = load_measure_spec(measure_file.node);
            validate_measure_on(*measure, shift);
        }
        const std::vector<int> m_list = cfg.m_list.empty() ? std::vector<int>{4, 8, 16} : cfg.m_list;
        const std::vector<int> n_list =
            cfg.n_list.empty() ? std::vector<int>{8, 32, 128} : cfg.n_list;

        const Theorem1Report t1 = verify_theorem1(shift, g, m_list, n_list, measure,
                                                  default_limits(), cfg.jobs);
        if (cfg.subcommand == "mdim") {
            rep.tables.push_back(t1.mdim);
        } else if (cfg.subcommand == "hdim") {
            rep.tables.push_back(t1.hdim_upper);
            if (t1.has_mass_table) rep.tables.push_back(t1.mass_lower);
        } else {
            rep.tables.push_back(t1.mdim);
            rep.tables.push_back(t1.hdim_upper);
            if (t1.has_mass_table) rep.tables.push_back(t1.mass_lower);
            ConvergenceTable ratios;
            ratios.estimator = "g2_growth_ratio";
            for (std::size_t i = 0; i < t1.g2_constants.ratios.size(); ++i)
                ratios.rows.push_back({static_cast<long>(i + 1), 0, t1.g2_constants.ratios[i], true});
            rep.tables.push_back(std::move(ratios));
            std::size_t violations = 0;
            if (t1.has_mass_table)
                for (std::size_t i = 0; i < t1.mass_lower.rows.size(); ++i)
                    if (t1.mass_lower.rows[i].value > t1.hdim_upper.rows[i].value + 1e-9) ++violations;
            rep.verdicts.push_back({"mass_leq_upper_violations", 0.0,
                                    static_cast<double>(violations),
                                    static_cast<double>(violations)});
        }
        rep.verdicts.push_back({"mdim_at_largest_budget", t1.target, t1.achieved, t1.deviation});
        rep.notes.emplace_back("c1_proxy", detail::format_double(t1.g2_constants.c1));
        rep.notes.emplace_back("c2_proxy", detail::format_double(t1.g2_constants.c2));
        rep.notes.emplace_back("c_limit", detail::format_double(t1.g2_constants.c_limit));
        if (t1.g2_constants.degree_warning)
            rep.notes.emplace_back("warning", "deg(G2) does not look like 1; c may not exist");
    } else if (cfg.subcommand == "rdim") {
        const auto group_file = detail::load(cfg.group_path);
        const auto shift_file = detail::load(cfg.shift_path);
        const auto measure_file = detail::load(cfg.measure_path);
        detail::hash_mix(hash, group_file.canonical);
        detail::hash_mix(hash, shift_file.canonical);
        detail::hash_mix(hash, measure_file.canonical);
        const GroupSpec g = detail::product_group_from(group_file.node, cfg.group_path);
        const SubshiftSpec shift = load_subshift_spec(shift_file.node);
        detail::check_shift_group(shift, g, cfg.shift_path, cfg.group_path);
        const MeasureSpec m = load_measure_spec(measure_file.node);
        validate_measure_on(m, shift);
        if (cfg.eps_list.empty()) throw precondition_error("rdim needs --eps-list");

        ConvergenceTable upper, lower, upper_norm, lower_norm, loginv;
        upper.estimator = "rd_upper_bits";
        lower.estimator = "rd_lower_bits";
        upper_norm.estimator = "rd_upper_per_log";
        lower_norm.estimator = "rd_lower_per_log";
        loginv.estimator = "log2_inv_eps";
        const int n = cfg.n_list.empty() ? cfg.n_radius : cfg.n_list.front();
        for (double eps : cfg.eps_list) {
            const RdBound up = rd_upper(m, g, n, eps);
            const RdBound lo = rd_lower(m, g, n, eps, cfg.delta);
            const double li = -std::log2(eps);
            upper.rows.push_back({n, up.depth, up.bits, true});
            lower.rows.push_back({n, lo.depth, lo.bits, true});
            upper_norm.rows.push_back({n, up.depth, up.bits / li, true});
            lower_norm.rows.push_back({n, lo.depth, lo.bits / li, true});
            loginv.rows.push_back({n, lo.depth, li, true});
        }
        const GrowthConstants gc = growth_constants(right_factor(g), 128);
        const double target = gc.c_limit * entropy_rate(m);
        upper_norm.target = target;
        lower_norm.target = target;
        rep.tables.push_back(std::move(upper));
        rep.tables.push_back(std::move(lower));
        rep.tables.push_back(std::move(upper_norm));
        rep.tables.push_back(std::move(lower_norm));
        rep.tables.push_back(std::move(loginv));
        rep.notes.emplace_back("delta", detail::format_double(cfg.delta));
    } else if (cfg.subcommand == "verify-t2") {
        const auto group_file = detail::load(cfg.group_path);
        const auto shift_file = detail::load(cfg.shift_path);
        const auto measure_file = detail::load(cfg.measure_path);
        detail::hash_mix(hash, group_file.canonical);
        detail::hash_mix(hash, shift_file.canonical);
        detail::hash_mix(hash, measure_file.canonical);
        const GroupSpec g = detail::product_group_from(group_file.node, cfg.group_path);
        const SubshiftSpec shift = load_subshift_spec(shift_file.node);
        detail::check_shift_group(shift, g, cfg.shift_path, cfg.group_path);
        const MeasureSpec m = load_measure_spec(measure_file.node);

        const std::vector<int> m_list =
            cfg.m_list.empty() ? std::vector<int>{8, 16, 32, 64} : cfg.m_list;
        const Theorem2Report t2 = verify_theorem2(m, shift, g, cfg.delta, m_list, cfg.n_radius);
        rep.tables.push_back(detail::theorem2_column(t2, "rd_upper_bits", &Theorem2Row::upper_bits,
                                                     cfg.n_radius));
        rep.tables.push_back(detail::theorem2_column(t2, "rd_lower_bits", &Theorem2Row::lower_bits,
                                                     cfg.n_radius));
        rep.tables.push_back(detail::theorem2_column(t2, "rd_upper_per_log",
                                                     &Theorem2Row::upper_norm, cfg.n_radius));
        rep.tables.push_back(detail::theorem2_column(t2, "rd_lower_per_log_matched",
                                                     &Theorem2Row::lower_norm_matched, cfg.n_radius));
        rep.tables.push_back(detail::theorem2_column(t2, "rd_lower_per_log_tight",
                                                     &Theorem2Row::lower_norm_tight, cfg.n_radius));
        rep.notes.emplace_back("delta", detail::format_double(t2.delta));
        rep.notes.emplace_back("h_mu", detail::format_double(t2.h_mu));
        rep.notes.emplace_back("c_limit", detail::format_double(t2.c_estimate));
        if (!t2.rows.empty()) {
            const auto& last = t2.rows.back();
            rep.verdicts.push_back({"bracket_upper", t2.target, last.upper_norm,
                                    t2.target ? std::abs(last.upper_norm - *t2.target) : 0});
            rep.verdicts.push_back({"bracket_lower_matched", t2.target, last.lower_norm_matched,
                                    t2.target ? std::abs(last.lower_norm_matched - *t2.target) : 0});
            rep.verdicts.push_back({"bracket_width_matched", 0.0,
                                    last.upper_norm - last.lower_norm_matched,
                                    last.upper_norm - last.lower_norm_matched});
        }
    } else if (cfg.subcommand == "covering") {
        TranslateArray inst;
        if (!cfg.instance_path.empty()) {
            const auto inst_file = detail::load(cfg.instance_path);
            detail::hash_mix(hash, inst_file.canonical);
            inst = load_translate_array(inst_file.node, cfg.seed);
        } else if (cfg.generate_preset == "intervals") {
            IntervalInstanceParams p;
            p.seed = cfg.seed;
            inst = make_interval_instance(p);
        } else if (cfg.generate_preset == "intervals-sparse") {
            IntervalInstanceParams p;
            p.base_density = 0.5;
            p.singleton_level = true;
            p.delta = 0.002;
            p.seed = cfg.seed;
            inst = make_interval_instance(p);
        } else if (cfg.generate_preset == "tower") {
            TowerInstanceParams p;
            p.seed = cfg.seed;
            inst = make_tower_instance(p);
        } else {
            throw precondition_error("covering needs --instance FILE or --generate preset");
        }
        const HypothesisReport hyp = check_hypotheses(inst);
        rep.notes.emplace_back("hypotheses_ok", hyp.all_ok() ? "true" : "false");
        for (const std::string& f : hyp.failures) rep.notes.emplace_back("hypothesis_failure", f);
        rep.verdicts.push_back({"alpha", std::nullopt, hyp.alpha, 0});
        if (hyp.all_ok()) {
            const SelectionResult sel = select_subfamily(inst, cfg.seed, cfg.restarts);
            const bool verified = verify_selection(inst, sel);
            rep.notes.emplace_back("chosen_translates", std::to_string(sel.chosen.size()));
            rep.notes.emplace_back("restarts_used", std::to_string(sel.restarts_used));
            rep.notes.emplace_back("selection_verified", verified ? "true" : "false");
            rep.verdicts.push_back({"epsilon0", std::nullopt, sel.epsilon0, 0});
            rep.verdicts.push_back(
                {"coverage_fraction",
                 sel.coverage_target / static_cast<double>(inst.ambient.size()),
                 sel.coverage_fraction,
                 std::abs(sel.coverage_fraction -
                          sel.coverage_target / static_cast<double>(inst.ambient.size()))});
            rep.verdicts.push_back({"met_coverage_bound", 1.0, sel.met_bound ? 1.0 : 0.0,
                                    sel.met_bound ? 0.0 : 1.0});
        }
    } else {
        throw precondition_error("unknown subcommand '" + cfg.subcommand + "'");
    }

    rep.config_hash = hash;
    rep.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                      .count();
    return rep;
}

}  // namespace meandim
