#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "jano/experiments.hpp"
#include "jano/io.hpp"
#include "jano/report.hpp"
#include "jano/rng.hpp"

namespace {

using namespace jano;
using nlohmann::ordered_json;

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    int64_t seed_override = -1;
    uint32_t workers = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "run configuration (JSON)")->required();
    cmd->add_option("--out", args.out_dir, "output directory")->required();
    cmd->add_option("--seed", args.seed_override, "override the config seed");
    cmd->add_option("--workers", args.workers, "worker threads (overrides JANO_WORKERS)");
}

RunConfig load_config(const CommonArgs& args) {
    if (args.workers > 0) setenv("JANO_WORKERS", std::to_string(args.workers).c_str(), 1);
    RunConfig cfg = RunConfig::parse_file(args.config_path);
    if (args.seed_override >= 0) cfg.seed = static_cast<uint64_t>(args.seed_override);
    return cfg;
}

std::string scene_dir(uint32_t index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "scene_%03u", index);
    return buf;
}

int cmd_simulate(const CommonArgs& args) {
    const RunConfig cfg = load_config(args);
    OutputManifest out(args.out_dir, "simulate");
    const std::vector<SceneSpec> scenes = cfg.resolve_scenes();

    CsvTable table({"scene", "steps", "mode", "seed", "dir"});
    for (uint32_t i = 0; i < scenes.size(); ++i) {
        const uint64_t seed = splitmix64(cfg.seed ^ (0xa11ce00ULL + i));
        const DenoisingRun run = make_trajectory(scenes[i], cfg.trajectory, seed);
        const std::string dir = scene_dir(i);
        std::filesystem::create_directories(out.dir() / dir);
        save_latent(run.clean, out.resolve(dir + "/clean.jlat"));
        out.record(out.resolve(dir + "/clean.jlat"));
        save_latent(run.noise, out.resolve(dir + "/noise.jlat"));
        out.record(out.resolve(dir + "/noise.jlat"));
        for (uint32_t k = 1; k <= run.step_count(); ++k) {
            char name[48];
            std::snprintf(name, sizeof(name), "%s/step_%03u.jlat", dir.c_str(), k);
            save_latent(run.step(k), out.resolve(name));
            out.record(out.resolve(name));
        }
        table.add_row({std::to_string(i), std::to_string(run.step_count()),
                       cfg.trajectory.mode == TrajectoryMode::Interpolate ? "interpolate"
                                                                          : "oracle-rollout",
                       std::to_string(seed), dir});
    }
    out.write_csv("runs.csv", table);
    out.finalize();
    std::cout << "simulate: wrote " << scenes.size() << " trajectories to " << args.out_dir
              << "\n";
    return 0;
}

int cmd_analyze(const CommonArgs& args) {
    const RunConfig cfg = load_config(args);
    const AnalyzerConfig& analyzer = cfg.require_analyzer();
    OutputManifest out(args.out_dir, "analyze");
    const std::vector<SceneSpec> scenes = cfg.resolve_scenes();

    const SuiteAnalysis suite = analyze_suite(scenes, cfg.trajectory, analyzer, cfg.seed);

    CsvTable blocks({"scene", "block_id", "fi", "hi", "wi", "analyzer", "fft_gt", "conv_gt",
                     "fft_baseline", "level_analyzer", "level_reference"});
    for (const SceneAnalysis& s : suite.scenes) {
        const std::vector<int> lp = quantile_levels(s.analyzer_norm, kEqualLevelFractions);
        const std::vector<int> lr = quantile_levels(s.fft_gt, kEqualLevelFractions);
        for (uint32_t b = 0; b < s.grid.block_count(); ++b) {
            const BlockCoord c = s.grid.coord(b);
            blocks.add_row({std::to_string(s.scene_index), std::to_string(b), std::to_string(c.fi),
                            std::to_string(c.hi), std::to_string(c.wi),
                            fmt_double(s.analyzer_norm[b]), fmt_double(s.fft_gt[b]),
                            fmt_double(s.conv_gt[b]), fmt_double(s.fft_baseline[b]),
                            std::to_string(lp[b]), std::to_string(lr[b])});
        }
    }
    out.write_csv("blocks.csv", blocks);

    CsvTable per_scene({"scene", "acc_analyzer", "acc_baseline", "pearson_fft", "spearman_fft",
                        "pearson_conv", "spearman_conv"});
    for (const SceneAnalysis& s : suite.scenes)
        per_scene.add_row({std::to_string(s.scene_index), fmt_double(s.acc_analyzer),
                           fmt_double(s.acc_baseline), fmt_double(s.corr_fft.pearson),
                           fmt_double(s.corr_fft.spearman), fmt_double(s.corr_conv.pearson),
                           fmt_double(s.corr_conv.spearman)});
    out.write_csv("scenes.csv", per_scene);

    ordered_json summary;
    summary["scenes"] = suite.scenes.size();
    summary["median_acc_analyzer"] = suite.median_acc_analyzer;
    summary["median_acc_baseline"] = suite.median_acc_baseline;
    summary["pooled_spearman_fft"] = suite.pooled_rho_fft;
    summary["pooled_spearman_conv"] = suite.pooled_rho_conv;
    summary["pooled_pearson_conv"] = suite.pooled_r_conv;
    summary["permutation_p_conv"] = suite.pvalue_conv;
    out.write_text("summary.json", summary.dump(2) + "\n");
    out.finalize();
    std::cout << "analyze: median accuracy " << suite.median_acc_analyzer << " (baseline "
              << suite.median_acc_baseline << "), pooled spearman vs convergence "
              << suite.pooled_rho_conv << " (p=" << suite.pvalue_conv << ")\n";
    return 0;
}

int cmd_run(const CommonArgs& args) {
    const RunConfig cfg = load_config(args);
    const AnalyzerConfig& analyzer = cfg.require_analyzer();
    const ScheduleConfig& schedule = cfg.require_schedule();
    OutputManifest out(args.out_dir, "run");
    const std::vector<SceneSpec> scenes = cfg.resolve_scenes();

    CsvTable timing({"scene", "step", "phase", "active_tokens", "ms", "level1_ms", "level2_ms",
                     "level3_ms"});
    CsvTable plan_table({"scene", "step", "phase", "active_blocks", "active_ids"});
    CsvTable results({"scene", "token_step_fraction", "modeled_speedup", "rel_l2_vs_full",
                      "cache_bytes", "level1_blocks", "level2_blocks", "level3_blocks"});
    ordered_json summary = ordered_json::array();

    for (uint32_t i = 0; i < scenes.size(); ++i) {
        const uint64_t seed = splitmix64(cfg.seed ^ (0x52554eULL + i));
        const RunExperiment exp =
            run_experiment(scenes[i], cfg.trajectory, analyzer, schedule,
                           cfg.model ? &*cfg.model : nullptr, seed);

        for (const StepTiming& st : exp.adaptive.result.state.timing)
            timing.add_row({std::to_string(i), std::to_string(st.step), phase_name(st.phase),
                            std::to_string(st.active_tokens), fmt_double(st.ms),
                            fmt_double(st.level_ms[0]), fmt_double(st.level_ms[1]),
                            fmt_double(st.level_ms[2])});
        const StepPlan& plan = exp.adaptive.result.plan;
        for (uint32_t k = 1; k <= plan.total_steps; ++k) {
            std::string ids;
            for (uint32_t b : plan.active(k)) {
                if (!ids.empty()) ids += ' ';
                ids += std::to_string(b);
            }
            plan_table.add_row({std::to_string(i), std::to_string(k), phase_name(plan.phase(k)),
                                std::to_string(plan.active(k).size()), ids});
        }
        const LevelMap& levels = exp.adaptive.result.levels;
        results.add_row({std::to_string(i), fmt_double(exp.token_step_fraction),
                         fmt_double(1.0 / exp.token_step_fraction), fmt_double(exp.final_rel_l2),
                         std::to_string(exp.adaptive.result.state.cache_bytes),
                         std::to_string(levels.count(Level::Static)),
                         std::to_string(levels.count(Level::Moderate)),
                         std::to_string(levels.count(Level::Active))});

        ordered_json s;
        s["scene"] = i;
        s["speedup_wall"] = exp.speedup_wall;
        s["token_step_fraction"] = exp.token_step_fraction;
        s["modeled_speedup"] = 1.0 / exp.token_step_fraction;
        s["rel_l2_vs_full"] = exp.final_rel_l2;
        s["wall_ms_full"] = exp.reference.wall_ms;
        s["wall_ms_adaptive"] = exp.adaptive.wall_ms;
        s["cache_bytes"] = exp.adaptive.result.state.cache_bytes;
        summary.push_back(s);
    }
    out.write_csv("results.csv", results);
    out.write_csv("plan.csv", plan_table);
    out.write_csv("timing/breakdown.csv", timing);
    out.write_text("summary.json", summary.dump(2) + "\n");
    out.finalize();
    std::cout << "run: " << scenes.size() << " scene(s) complete\n";
    return 0;
}

int cmd_ablate(const CommonArgs& args) {
    RunConfig cfg = load_config(args);
    const AnalyzerConfig& analyzer = cfg.require_analyzer();
    const ScheduleConfig& schedule = cfg.require_schedule();
    if (cfg.trajectory.mode != TrajectoryMode::OracleRollout)
        throw ConfigError("config error at <config>.trajectory.mode: ablate requires oracle-rollout");
    OutputManifest out(args.out_dir, "ablate");
    const std::vector<SceneSpec> scenes = cfg.resolve_scenes();

    CsvTable table({"scene", "ratio", "arm", "frozen_blocks", "token_step_fraction", "rel_l2",
                    "flops_speedup"});
    CsvTable timing({"scene", "ratio", "arm", "wall_ms"});
    bool aware_never_worse = true;
    for (uint32_t i = 0; i < scenes.size(); ++i) {
        const uint64_t seed = splitmix64(cfg.seed ^ (0xab1a7eULL + i));
        const AblateExperiment exp = ablate_experiment(scenes[i], cfg.trajectory, analyzer,
                                                       schedule, cfg.ablate.mask_ratios, seed);
        timing.add_row({std::to_string(i), "0", "full", fmt_double(exp.wall_ms_full)});
        for (const AblateArm& arm : exp.arms) {
            table.add_row({std::to_string(i), fmt_double(arm.ratio), "random",
                           std::to_string(arm.random_frozen), fmt_double(arm.fraction_random),
                           fmt_double(arm.err_random), fmt_double(arm.flops_speedup_random)});
            table.add_row({std::to_string(i), fmt_double(arm.ratio), "aware", "",
                           fmt_double(arm.fraction_aware), fmt_double(arm.err_aware),
                           fmt_double(arm.flops_speedup_aware)});
            timing.add_row({std::to_string(i), fmt_double(arm.ratio), "random",
                            fmt_double(arm.wall_ms_random)});
            timing.add_row({std::to_string(i), fmt_double(arm.ratio), "aware",
                            fmt_double(arm.wall_ms_aware)});
            if (arm.err_aware > arm.err_random && arm.err_aware > 1e-5) aware_never_worse = false;
        }
    }
    out.write_csv("ablate.csv", table);
    out.write_csv("timing/walls.csv", timing);
    ordered_json summary;
    summary["scenes"] = scenes.size();
    summary["aware_never_worse"] = aware_never_worse;
    out.write_text("summary.json", summary.dump(2) + "\n");
    out.finalize();
    std::cout << "ablate: aware_never_worse=" << (aware_never_worse ? "true" : "false") << "\n";
    return 0;
}

int cmd_constancy(const CommonArgs& args) {
    const RunConfig cfg = load_config(args);
    OutputManifest out(args.out_dir, "constancy");
    const ConstancyExperiment exp = constancy_experiment(cfg.constancy, cfg.seed);

    CsvTable table({"trial", "kind", "t", "value"});
    for (size_t g = 0; g < exp.grid.size(); ++g)
        table.add_row({"0", "pointmass-same-target", fmt_double(exp.grid[g]),
                       fmt_double(exp.pointmass_profile[g])});
    for (size_t tr = 0; tr < exp.trials.size(); ++tr)
        for (size_t g = 0; g < exp.grid.size(); ++g) {
            table.add_row({std::to_string(tr), "same-component", fmt_double(exp.grid[g]),
                           fmt_double(exp.trials[tr].same_component[g])});
            table.add_row({std::to_string(tr), "cross-component", fmt_double(exp.grid[g]),
                           fmt_double(exp.trials[tr].cross_component[g])});
        }
    out.write_csv("profiles.csv", table);

    ordered_json summary;
    summary["trials"] = exp.trials.size();
    summary["pointmass_max_deviation"] = exp.pointmass_max_deviation;
    summary["max_same_std_over_mean"] = exp.max_same_std_over_mean;
    summary["frac_cross_exceeds"] = exp.frac_cross_exceeds;
    summary["same_flat"] = exp.max_same_std_over_mean <= 0.05;
    summary["cross_grows"] = exp.frac_cross_exceeds >= 0.95;
    out.write_text("summary.json", summary.dump(2) + "\n");
    out.finalize();
    std::cout << "constancy: max same std/mean " << exp.max_same_std_over_mean
              << ", cross exceeds in " << exp.frac_cross_exceeds * 100 << "% of trials\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"jano: region-aware diffusion acceleration testbed"};
    app.require_subcommand(1);

    CommonArgs args;
    CLI::App* simulate = app.add_subcommand("simulate", "render scenes and persist trajectories");
    CLI::App* analyze = app.add_subcommand("analyze", "complexity maps, ground truths, correlations");
    CLI::App* run = app.add_subcommand("run", "interleaved pipeline with timing breakdown");
    CLI::App* ablate = app.add_subcommand("ablate", "random vs convergence-aware masking");
    CLI::App* constancy = app.add_subcommand("constancy", "velocity-difference profiles");
    for (CLI::App* cmd : {simulate, analyze, run, ablate, constancy}) add_common(cmd, args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(args);
        if (analyze->parsed()) return cmd_analyze(args);
        if (run->parsed()) return cmd_run(args);
        if (ablate->parsed()) return cmd_ablate(args);
        if (constancy->parsed()) return cmd_constancy(args);
    } catch (const jano::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const jano::BudgetInfeasibleError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
