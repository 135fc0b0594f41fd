// Command-line front end for the pipeline stages.

#include <functional>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mosaic/config.hpp"
#include "mosaic/errors.hpp"
#include "mosaic/pipeline.hpp"

namespace {

struct Overrides {
    std::optional<std::string> out;
    std::optional<unsigned> seed;
    std::optional<int> parallelism;
};

// Precedence: command-line flag > config file > built-in default.
mosaic::config::PipelineConfig resolve(const std::string& config_path,
                                       const Overrides& ov) {
    mosaic::config::PipelineConfig cfg = mosaic::config::load_config(config_path);
    if (ov.out) cfg.out_dir = *ov.out;
    if (ov.seed) {
        cfg.seed = *ov.seed;
        cfg.train.seed = *ov.seed;
    }
    if (ov.parallelism) cfg.backend.parallelism = *ov.parallelism;
    cfg.validate();
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mosaic: alpha-driven stock movement prediction pipeline"};
    app.require_subcommand(1);

    std::string config_path;
    Overrides ov;
    std::string out_flag;
    unsigned seed_flag = 0;
    int parallelism_flag = 0;

    app.add_option("--config", config_path, "Pipeline config (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    auto* out_opt = app.add_option("--out", out_flag, "Output directory override");
    auto* seed_opt = app.add_option("--seed", seed_flag, "RNG seed override");
    auto* par_opt =
        app.add_option("--parallelism", parallelism_flag, "Backend parallelism override");

    using Command =
        std::function<void(const mosaic::config::PipelineConfig&, std::string&)>;
    struct Sub {
        const char* name;
        const char* help;
        Command run;
    };
    const Sub subs[] = {
        {"ingest", "Load prices and news, report counts", mosaic::pipeline::cmd_ingest},
        {"build-dataset", "Write samples, prompts, and a manifest",
         mosaic::pipeline::cmd_build_dataset},
        {"run-experts", "Evaluate the expert pool over all samples",
         mosaic::pipeline::cmd_run_experts},
        {"scrape", "Collect rearview rationales into instruction records",
         mosaic::pipeline::cmd_scrape},
        {"train", "Fit the token-weighted toy model", mosaic::pipeline::cmd_train},
        {"eval", "Score predictions and rationale faithfulness",
         mosaic::pipeline::cmd_eval},
        {"sweep", "Sweep the weighting temperature", mosaic::pipeline::cmd_sweep},
    };

    const Sub* chosen = nullptr;
    for (const Sub& s : subs) {
        CLI::App* sub = app.add_subcommand(s.name, s.help);
        sub->fallthrough();  // lets --config etc. appear after the subcommand
        sub->callback([&chosen, &s] { chosen = &s; });
    }

    CLI11_PARSE(app, argc, argv);

    if (out_opt->count()) ov.out = out_flag;
    if (seed_opt->count()) ov.seed = seed_flag;
    if (par_opt->count()) ov.parallelism = parallelism_flag;

    try {
        mosaic::config::PipelineConfig cfg = resolve(config_path, ov);
        std::string report;
        chosen->run(cfg, report);
        std::cout << report;
        return 0;
    } catch (const mosaic::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 2;
    }
}
