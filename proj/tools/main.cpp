// SPDX-License-Identifier: Apache-2.0
//
// rfss command-line tool: generate simulated spectrum datasets, evaluate
// interpolation baselines, verify the interpolation error bound, replicate
// the reflection-point proximity study, render spectra, and split datasets.
//
// Exit codes: 0 success, 2 usage error, 3 data error, 4 numeric/domain error.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "rfss/errors.hpp"
#include "rfss/metrics.hpp"
#include "rfss/pipeline.hpp"

namespace {

using namespace rfss;

int run(int argc, char **argv) {
    CLI::App app{"rfss - RF spatial-spectrum simulation and interpolation toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", pipeline::kToolVersion);

    std::uint64_t seed = 0;
    unsigned threads = 1;
    auto *seed_option =
        app.add_option("--seed", seed, "Run seed (generate defaults to the scene seed)");
    app.add_option("--threads", threads, "Worker threads for per-target parallelism")
        ->check(CLI::Range(1u, 256u));

    // generate
    auto *generate = app.add_subcommand("generate", "Simulate spectra for transmitters");
    pipeline::GenerateOptions gen_opts;
    std::string gen_scene, gen_out, gen_txlist;
    generate->add_option("--scene", gen_scene, "Scene config path")->required();
    generate->add_option("--count", gen_opts.count, "Number of random transmitters");
    generate->add_option("--tx-list", gen_txlist, "Explicit transmitter list (x y z per line)");
    generate->add_option("--max-order", gen_opts.max_order, "Maximum reflection order");
    generate->add_option("--out", gen_out, "Output dataset path")->required();

    // eval
    auto *eval = app.add_subcommand("eval", "Evaluate a prediction method on a dataset");
    pipeline::EvalOptions eval_opts;
    std::string eval_dataset, eval_out, eval_method = "knn";
    eval->add_option("--dataset", eval_dataset, "RFSS dataset path")->required();
    eval->add_option("--method", eval_method, "knn | barycentric | knndl")->required();
    eval->add_option("-L,--neighbors", eval_opts.neighbor_count, "Neighbor count");
    eval->add_option("--train-fraction", eval_opts.train_fraction, "Train split fraction");
    eval->add_option("--iterations", eval_opts.iterations, "knndl training iterations");
    eval->add_option("--learning-rate", eval_opts.learning_rate, "knndl learning rate");
    eval->add_option("--out", eval_out, "Report path")->required();

    // theorem
    auto *theorem = app.add_subcommand("theorem", "Verify the interpolation error bound");
    pipeline::TheoremOptions theorem_opts;
    std::string theorem_field = "quadratic", theorem_scene, theorem_out;
    theorem->add_option("--field", theorem_field, "quadratic | freespace");
    theorem->add_option("--scene", theorem_scene, "Scene config (freespace field)");
    theorem->add_option("--trials", theorem_opts.trials, "Seeded targets");
    theorem->add_option("--radius", theorem_opts.radius, "Neighborhood radius delta (m)");
    theorem->add_option("--out", theorem_out, "Report path")->required();

    // obs1
    auto *obs1 = app.add_subcommand("obs1", "Reflection-point proximity study");
    pipeline::Obs1Options obs1_opts;
    std::string obs1_scene, obs1_out;
    obs1->add_option("--scene", obs1_scene, "Scene config path")->required();
    obs1->add_option("--pairs", obs1_opts.pairs, "Transmitter pairs");
    obs1->add_option("--separation", obs1_opts.separation_m, "Max pair separation (m)");
    obs1->add_option("--out", obs1_out, "Report path")->required();

    // render
    auto *render = app.add_subcommand("render", "Export one spectrum as a PGM image");
    pipeline::RenderOptions render_opts;
    std::string render_dataset, render_out;
    render->add_option("--dataset", render_dataset, "RFSS dataset path")->required();
    render->add_option("--index", render_opts.record_index, "Record index");
    render->add_option("--gamma", render_opts.gamma, "Gamma correction");
    render->add_option("--out", render_out, "Output PGM path")->required();

    // split
    auto *split = app.add_subcommand("split", "Write the train/test assignment");
    pipeline::SplitOptions split_opts;
    std::string split_dataset, split_out;
    split->add_option("--dataset", split_dataset, "RFSS dataset path")->required();
    split->add_option("--train-fraction", split_opts.train_fraction, "Train split fraction");
    split->add_option("--out", split_out, "Report path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (generate->parsed()) {
        gen_opts.scene_path = gen_scene;
        gen_opts.tx_list_path = gen_txlist;
        gen_opts.out_path = gen_out;
        if (seed_option->count() > 0)
            gen_opts.seed = seed;
        gen_opts.threads = threads;
        const pipeline::GenerateResult result = pipeline::cmd_generate(gen_opts);
        std::cout << "dataset " << result.dataset_path.string() << " (" << result.record_count
                  << " records)\nmanifest " << result.manifest_path.string() << "\n";
    } else if (eval->parsed()) {
        eval_opts.dataset_path = eval_dataset;
        eval_opts.method = pipeline::eval_method_from_name(eval_method);
        eval_opts.seed = seed;
        eval_opts.threads = threads;
        eval_opts.out_path = eval_out;
        const pipeline::EvalResult result = pipeline::cmd_eval(eval_opts);
        std::cout << "report " << result.report_path.string() << "\ntargets "
                  << result.target_count << "\nmean mse " << pipeline::format_number(result.mean_mse)
                  << "\nmean psnr_db " << pipeline::format_number(result.mean_psnr_db)
                  << "\nmean ssim " << pipeline::format_number(result.mean_ssim) << "\n";
    } else if (theorem->parsed()) {
        if (theorem_field == "quadratic")
            theorem_opts.field = pipeline::TheoremField::quadratic;
        else if (theorem_field == "freespace")
            theorem_opts.field = pipeline::TheoremField::freespace;
        else
            throw CLI::ValidationError("--field", "expected quadratic or freespace");
        if (theorem_opts.field == pipeline::TheoremField::freespace && theorem_scene.empty())
            throw CLI::ValidationError("--scene", "required for the freespace field");
        theorem_opts.scene_path = theorem_scene;
        theorem_opts.seed = seed;
        theorem_opts.threads = threads;
        theorem_opts.out_path = theorem_out;
        const pipeline::TheoremResult result = pipeline::cmd_theorem(theorem_opts);
        std::cout << "report " << result.report_path.string() << "\nsatisfied_fraction "
                  << pipeline::format_number(result.satisfied_fraction) << "\nratio_median "
                  << pipeline::format_number(result.ratio_median) << "\n";
    } else if (obs1->parsed()) {
        obs1_opts.scene_path = obs1_scene;
        obs1_opts.seed = seed;
        obs1_opts.threads = threads;
        obs1_opts.out_path = obs1_out;
        const pipeline::Obs1Result result = pipeline::cmd_obs1(obs1_opts);
        std::cout << "report " << result.report_path.string() << "\nmatched "
                  << result.matched_count << "\nfraction_below_0.1m "
                  << pipeline::format_number(result.fraction_below_threshold) << "\n";
    } else if (render->parsed()) {
        render_opts.dataset_path = render_dataset;
        render_opts.out_path = render_out;
        const pipeline::RenderResult result = pipeline::cmd_render(render_opts);
        std::cout << "image " << result.image_path.string() << "\n";
    } else if (split->parsed()) {
        split_opts.dataset_path = split_dataset;
        split_opts.seed = seed;
        split_opts.out_path = split_out;
        const pipeline::SplitResult result = pipeline::cmd_split(split_opts);
        std::cout << "report " << result.report_path.string() << "\ntrain " << result.train_count
                  << "\ntest " << result.test_count << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    try {
        return run(argc, argv);
    } catch (const CLI::Error &e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const rfss::DataError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const rfss::DomainError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::invalid_argument &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::out_of_range &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
