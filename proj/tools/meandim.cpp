// Command-line front end: subcommands over the library pipelines, with
// deterministic CSV/JSON reports and machine-readable errors.

#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "meandim/meandim.hpp"

namespace {

using meandim::RunConfig;

void add_common(CLI::App* cmd, RunConfig& cfg) {
    cmd->add_option("--out", cfg.out_format, "output format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--output", cfg.output_path, "write the report to this path instead of stdout");
    cmd->add_option("--seed", cfg.seed, "seed for randomized procedures");
    cmd->add_option("--jobs", cfg.jobs, "worker threads for grid estimators");
    cmd->add_flag_function(
        "--no-timing", [&cfg](std::int64_t) { cfg.include_timing = false; },
        "omit the wall-clock field for byte-stable output");
}

void emit(const meandim::Report& report, const RunConfig& cfg) {
    const std::string payload = meandim::emit_report(report, cfg.out_format, cfg.include_timing);
    if (cfg.output_path.empty()) {
        std::cout << payload;
        return;
    }
    std::ofstream out(cfg.output_path, std::ios::binary | std::ios::trunc);
    if (!out) throw meandim::error("cannot open output path '" + cfg.output_path + "'");
    out << payload;
}

std::vector<int> to_int_list(const std::vector<std::string>& raw, const std::string& flag) {
    std::vector<int> out;
    for (const auto& chunk : raw) {
        std::string token;
        std::istringstream ss(chunk);
        while (std::getline(ss, token, ',')) {
            if (token.empty()) continue;
            try {
                out.push_back(std::stoi(token));
            } catch (const std::exception&) {
                throw meandim::precondition_error(flag + " has a non-integer item '" + token + "'");
            }
        }
    }
    return out;
}

std::vector<double> to_double_list(const std::vector<std::string>& raw, const std::string& flag) {
    std::vector<double> out;
    for (const auto& chunk : raw) {
        std::string token;
        std::istringstream ss(chunk);
        while (std::getline(ss, token, ',')) {
            if (token.empty()) continue;
            try {
                out.push_back(std::stod(token));
            } catch (const std::exception&) {
                throw meandim::precondition_error(flag + " has a non-numeric item '" + token + "'");
            }
        }
    }
    return out;
}

int fail(const std::string& type, const std::string& message, int code) {
    nlohmann::ordered_json err;
    err["error"]["type"] = type;
    err["error"]["message"] = message;
    std::cout << err.dump(2) << "\n";
    std::cerr << "meandim: " << message << "\n";
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"word geometry, subshift counting and dimension estimation over product groups"};
    app.set_version_flag("--version", std::string("meandim ") + std::string(meandim::version) +
                                          " (config format 1)");
    app.require_subcommand(1);

    RunConfig cfg;
    std::vector<std::string> n_raw, m_raw, eps_raw;

    auto* group = app.add_subcommand("group", "growth table, degree fit, Folner diagnostics");
    group->add_option("--spec", cfg.spec_path, "group config file")->required();
    group->add_option("--n-max", cfg.n_max, "maximum ball radius");
    group->add_flag("--enumerate", cfg.enumerate, "include the element enumeration");
    group->add_flag("--tempered", cfg.tempered, "include temperedness ratios");
    add_common(group, cfg);

    auto* count = app.add_subcommand("count", "exact pattern counts over a window");
    count->add_option("--group", cfg.group_path, "product group config")->required();
    count->add_option("--shift", cfg.shift_path, "subshift config")->required();
    count->add_option("--window", cfg.window_desc, "window descriptor, e.g. ball:N=2,M=1")
        ->required();
    add_common(count, cfg);

    auto* entropy = app.add_subcommand("entropy", "topological or measure entropy tables");
    entropy->add_option("--group", cfg.group_path)->required();
    entropy->add_option("--shift", cfg.shift_path)->required();
    entropy->add_option("--measure", cfg.measure_path, "measure config (switches to h_mu)");
    entropy->add_option("--n-list", n_raw, "window radii");
    add_common(entropy, cfg);

    auto* mdim = app.add_subcommand("mdim", "metric mean dimension estimate grid");
    mdim->add_option("--group", cfg.group_path)->required();
    mdim->add_option("--shift", cfg.shift_path)->required();
    mdim->add_option("--N-list", n_raw, "Folner radii");
    mdim->add_option("--M-list", m_raw, "depth exponents");
    add_common(mdim, cfg);

    auto* hdim = app.add_subcommand("hdim", "scale-Hausdorff upper and mass lower bounds");
    hdim->add_option("--group", cfg.group_path)->required();
    hdim->add_option("--shift", cfg.shift_path)->required();
    hdim->add_option("--measure", cfg.measure_path, "mass-distribution measure (default: max entropy)");
    hdim->add_option("--N-list", n_raw);
    hdim->add_option("--M-list", m_raw);
    add_common(hdim, cfg);

    auto* rdim = app.add_subcommand("rdim", "certified rate-distortion bounds per epsilon");
    rdim->add_option("--group", cfg.group_path)->required();
    rdim->add_option("--shift", cfg.shift_path)->required();
    rdim->add_option("--measure", cfg.measure_path)->required();
    rdim->add_option("--eps-list", eps_raw, "distortion levels")->required();
    rdim->add_option("--delta", cfg.delta, "mismatch budget in (0, 1/2)");
    rdim->add_option("--N", cfg.n_radius, "Folner radius");
    add_common(rdim, cfg);

    auto* covering = app.add_subcommand("covering", "covering lemma instances and selection");
    covering->add_option("--instance", cfg.instance_path, "instance config file");
    covering->add_option("--generate", cfg.generate_preset,
                         "instance preset: intervals | intervals-sparse | tower");
    covering->add_option("--restarts", cfg.restarts, "randomized restarts");
    add_common(covering, cfg);

    auto* t1 = app.add_subcommand("verify-t1", "mean dimension sandwich report");
    t1->add_option("--group", cfg.group_path)->required();
    t1->add_option("--shift", cfg.shift_path)->required();
    t1->add_option("--measure", cfg.measure_path);
    t1->add_option("--N-list", n_raw);
    t1->add_option("--M-list", m_raw);
    add_common(t1, cfg);

    auto* t2 = app.add_subcommand("verify-t2", "rate distortion sandwich report");
    t2->add_option("--group", cfg.group_path)->required();
    t2->add_option("--shift", cfg.shift_path)->required();
    t2->add_option("--measure", cfg.measure_path)->required();
    t2->add_option("--delta", cfg.delta);
    t2->add_option("--M-list", m_raw);
    t2->add_option("--N", cfg.n_radius, "Folner radius");
    add_common(t2, cfg);

    CLI11_PARSE(app, argc, argv);

    try {
        cfg.subcommand = app.get_subcommands().front()->get_name();
        cfg.n_list = to_int_list(n_raw, "--n-list");
        cfg.m_list = to_int_list(m_raw, "--M-list");
        cfg.eps_list = to_double_list(eps_raw, "--eps-list");
        const meandim::Report report = meandim::run(cfg);
        emit(report, cfg);
        return 0;
    } catch (const meandim::config_error& e) {
        return fail("config_error", e.what(), 2);
    } catch (const meandim::incompatible_error& e) {
        return fail("incompatible_error", e.what(), 3);
    } catch (const meandim::resource_error& e) {
        return fail("resource_error", e.what(), 4);
    } catch (const meandim::search_limit_error& e) {
        return fail("search_limit_error", e.what(), 5);
    } catch (const meandim::precondition_error& e) {
        return fail("precondition_error", e.what(), 6);
    } catch (const meandim::error& e) {
        return fail("error", e.what(), 1);
    } catch (const std::exception& e) {
        return fail("internal_error", e.what(), 1);
    }
}
