// entsac command-line front end. Talks to the core exclusively through the C API
// in entsac.h; flag overrides are merged into the config document before the
// call so persisted artifacts stay self-describing.
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "entsac.h"

namespace {

// 0 = success, 1 = usage/file/config problems, 2 = numeric or validation
// failures inside the core.
int exit_code_for(int status) {
    switch (status) {
        case ENTSAC_OK:
            return 0;
        case ENTSAC_ERR_INVALID_ARG:
        case ENTSAC_ERR_IO:
        case ENTSAC_ERR_CONFIG:
            return 1;
        default:
            return 2;
    }
}

int report_failure(int status) {
    std::cerr << "error (" << entsac_status_name(status) << "): " << entsac_last_error()
              << "\n";
    return exit_code_for(status);
}

std::optional<std::string> read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) return std::nullopt;
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TrainOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> variant;
    std::optional<double> target_entropy;
    std::optional<double> alpha0;
    std::optional<std::uint64_t> steps;
    bool override_entropy_bound = false;
};

std::string apply_overrides(const std::string& config_json, const TrainOverrides& o) {
    nlohmann::json doc = nlohmann::json::parse(config_json);
    if (o.seed) doc["seed"] = *o.seed;
    if (o.variant) doc["variant"] = *o.variant;
    if (o.target_entropy) doc["target_entropy"] = *o.target_entropy;
    if (o.alpha0) doc["alpha0"] = *o.alpha0;
    if (o.steps) doc["total_steps"] = *o.steps;
    if (o.override_entropy_bound) doc["override_entropy_bound"] = true;
    return doc.dump(2);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"entsac — soft actor-critic with a target-entropy-corrected Bellman backup"};
    app.require_subcommand(1);

    // train
    auto* train_cmd = app.add_subcommand("train", "run a training experiment from a config file");
    std::string train_config_path;
    std::string train_out = "run";
    TrainOverrides overrides;
    std::uint64_t ov_seed = 0, ov_steps = 0;
    double ov_h0 = 0.0, ov_alpha0 = 0.0;
    std::string ov_variant;
    train_cmd->add_option("--config", train_config_path, "config JSON path")->required();
    auto* seed_opt = train_cmd->add_option("--seed", ov_seed, "override the seed");
    auto* variant_opt =
        train_cmd->add_option("--variant", ov_variant, "corrected|missing_target")
            ->check(CLI::IsMember({"corrected", "missing_target"}));
    auto* h0_opt =
        train_cmd->add_option("--target-entropy", ov_h0, "override the target entropy H0");
    auto* alpha0_opt = train_cmd->add_option("--alpha0", ov_alpha0, "override the initial alpha");
    auto* steps_opt = train_cmd->add_option("--steps", ov_steps, "override total env steps");
    train_cmd->add_flag("--override-entropy-bound", overrides.override_entropy_bound,
                        "proceed despite H0 > log|A| (with a warning)");
    train_cmd->add_option("--out", train_out, "run directory (default: ./run)");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a finished run's final checkpoint");
    std::string eval_run;
    int eval_episodes = 10;
    std::uint64_t eval_seed = 0;
    std::string eval_trajectory;
    eval_cmd->add_option("--run", eval_run, "run directory")->required();
    eval_cmd->add_option("--episodes", eval_episodes, "evaluation episodes (default 10)");
    eval_cmd->add_option("--seed", eval_seed, "evaluation seed (default 0)");
    eval_cmd->add_option("--dump-trajectory", eval_trajectory,
                         "optional CSV trajectory dump path");

    // verify
    auto* verify_cmd =
        app.add_subcommand("verify", "tabular duality check: brute-force p* vs dual d*");
    std::string verify_mdp = "random";
    double verify_h0 = 0.3;
    int verify_grid = 201;
    std::uint64_t verify_seed = 0;
    verify_cmd->add_option("--mdp", verify_mdp, "MDP JSON path, or 'random' (default)");
    verify_cmd->add_option("--h0", verify_h0, "target entropy (default 0.3)");
    verify_cmd->add_option("--grid", verify_grid, "simplex grid resolution (default 201)");
    verify_cmd->add_option("--seed", verify_seed, "seed for the random MDP");

    // fig1
    auto* fig1_cmd = app.add_subcommand(
        "fig1", "paired corrected vs missing_target runs (H0=0.5, alpha0=1) + comparison chart");
    std::string fig1_out;
    std::uint64_t fig1_seed = 0, fig1_steps = 0;
    fig1_cmd->add_option("--out", fig1_out, "output directory")->required();
    auto* fig1_seed_opt = fig1_cmd->add_option("--seed", fig1_seed, "seed for both runs");
    auto* fig1_steps_opt = fig1_cmd->add_option("--steps", fig1_steps, "env steps per run");

    // plot
    auto* plot_cmd = app.add_subcommand("plot", "render metrics columns to an SVG line chart");
    std::string plot_run;
    std::vector<std::string> plot_columns = {"alpha"};
    std::string plot_out;
    plot_cmd->add_option("--run", plot_run, "run directory")->required();
    plot_cmd->add_option("--columns", plot_columns, "metrics columns (default: alpha)");
    plot_cmd->add_option("--out", plot_out, "output SVG path (default: RUN/plot.svg)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e);
        return 0;
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    if (train_cmd->parsed()) {
        auto config_text = read_file(train_config_path);
        if (!config_text) {
            std::cerr << "error: cannot read config file '" << train_config_path << "'\n";
            return 1;
        }
        if (*seed_opt) overrides.seed = ov_seed;
        if (*variant_opt) overrides.variant = ov_variant;
        if (*h0_opt) overrides.target_entropy = ov_h0;
        if (*alpha0_opt) overrides.alpha0 = ov_alpha0;
        if (*steps_opt) overrides.steps = ov_steps;
        std::string merged;
        try {
            merged = apply_overrides(*config_text, overrides);
        } catch (const nlohmann::json::exception& e) {
            std::cerr << "error: config file '" << train_config_path << "': " << e.what() << "\n";
            return 1;
        }
        char* outcome = nullptr;
        int status = entsac_train(merged.c_str(), train_out.c_str(), &outcome);
        if (status != ENTSAC_OK) return report_failure(status);
        std::cout << outcome << "\n";
        entsac_string_free(outcome);
        return 0;
    }

    if (eval_cmd->parsed()) {
        char* stats = nullptr;
        int status = entsac_evaluate(eval_run.c_str(), eval_episodes, eval_seed,
                                     eval_trajectory.empty() ? nullptr : eval_trajectory.c_str(),
                                     &stats);
        if (status != ENTSAC_OK) return report_failure(status);
        std::cout << stats << "\n";
        entsac_string_free(stats);
        return 0;
    }

    if (verify_cmd->parsed()) {
        std::string mdp_text;
        const char* mdp_json = nullptr;
        if (verify_mdp != "random") {
            auto text = read_file(verify_mdp);
            if (!text) {
                std::cerr << "error: cannot read MDP file '" << verify_mdp << "'\n";
                return 1;
            }
            mdp_text = *text;
            mdp_json = mdp_text.c_str();
        }
        char* report = nullptr;
        int status =
            entsac_verify(mdp_json, verify_h0, verify_grid, verify_seed, /*random_horizon=*/2,
                          &report);
        if (status != ENTSAC_OK) return report_failure(status);
        std::cout << report << "\n";
        entsac_string_free(report);
        return 0;
    }

    if (fig1_cmd->parsed()) {
        char* base_config = nullptr;
        int status = entsac_default_config(&base_config);
        if (status != ENTSAC_OK) return report_failure(status);
        std::string base = base_config;
        entsac_string_free(base_config);

        TrainOverrides fig1_overrides;
        if (*fig1_seed_opt) fig1_overrides.seed = fig1_seed;
        if (*fig1_steps_opt) fig1_overrides.steps = fig1_steps;
        base = apply_overrides(base, fig1_overrides);

        char* summary = nullptr;
        status = entsac_fig1(base.c_str(), fig1_out.c_str(), &summary);
        if (status != ENTSAC_OK) return report_failure(status);
        std::cout << summary << "\n";
        entsac_string_free(summary);
        return 0;
    }

    if (plot_cmd->parsed()) {
        std::string columns;
        for (const auto& c : plot_columns) {
            if (!columns.empty()) columns.push_back(',');
            columns += c;
        }
        std::string out = plot_out.empty() ? plot_run + "/plot.svg" : plot_out;
        int status = entsac_plot(plot_run.c_str(), columns.c_str(), out.c_str());
        if (status != ENTSAC_OK) return report_failure(status);
        std::cout << out << "\n";
        return 0;
    }

    return 1;
}
