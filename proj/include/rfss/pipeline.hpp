// SPDX-License-Identifier: Apache-2.0
//
// Experiment pipelines behind the CLI subcommands. Every command writes its
// primary output plus a run manifest; rerunning a command with the same
// configuration (or replaying its manifest) reproduces the outputs
// byte-identically, independent of the thread count.

#ifndef RFSS_PIPELINE_HPP
#define RFSS_PIPELINE_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rfss/datastore.hpp"

namespace rfss::pipeline {

inline constexpr const char *kToolVersion = "0.1.0";

// Distributes [0, n) across `threads` workers; item order in any output
// container is index-determined, so results do not depend on the schedule.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)> &fn);

struct Manifest {
    std::vector<std::pair<std::string, std::string>> fields;

    void set(const std::string &key, const std::string &value);
    const std::string *find(const std::string &key) const;
    void write(const std::filesystem::path &path) const;
    static Manifest read(const std::filesystem::path &path);
};

struct GenerateOptions {
    std::filesystem::path scene_path;
    std::size_t count = 0;                  // random placements, ignored with a tx list
    std::filesystem::path tx_list_path;     // optional explicit transmitter list
    std::size_t max_order = 2;
    std::filesystem::path out_path;
    std::optional<std::uint64_t> seed;      // overrides the scene seed
    unsigned threads = 1;
};

struct GenerateResult {
    std::filesystem::path dataset_path;
    std::filesystem::path manifest_path;
    std::size_t record_count = 0;
};

GenerateResult cmd_generate(const GenerateOptions &opts);

enum class EvalMethod { knn, barycentric, knndl };

EvalMethod eval_method_from_name(const std::string &name);
std::string eval_method_name(EvalMethod method);

struct EvalOptions {
    std::filesystem::path dataset_path;
    EvalMethod method = EvalMethod::knn;
    std::size_t neighbor_count = 6;
    double train_fraction = 0.8;
    std::uint64_t seed = 0;
    std::size_t iterations = 200;   // knndl
    double learning_rate = 0.05;    // knndl
    std::filesystem::path out_path;
    unsigned threads = 1;
};

struct EvalResult {
    std::filesystem::path report_path;
    std::filesystem::path manifest_path;
    std::filesystem::path traces_path; // knndl only, empty otherwise
    std::size_t target_count = 0;
    double mean_mse = 0.0;
    double mean_psnr_db = 0.0; // over finite rows
    double mean_ssim = 0.0;
    std::size_t psnr_sentinels = 0;
};

EvalResult cmd_eval(const EvalOptions &opts);

enum class TheoremField { quadratic, freespace };

struct TheoremOptions {
    TheoremField field = TheoremField::quadratic;
    std::filesystem::path scene_path; // required for the freespace field
    std::size_t trials = 100;
    double radius = 0.05;             // neighborhood radius delta
    std::uint64_t seed = 0;
    std::filesystem::path out_path;
    unsigned threads = 1;
};

struct TheoremResult {
    std::filesystem::path report_path;
    std::filesystem::path manifest_path;
    std::size_t trials = 0;
    double satisfied_fraction = 0.0; // over determinate reports at radius delta
    double ratio_median = 0.0;       // median eps(delta) / eps(delta/2)
    double max_curvature_error = 0.0; // |K - analytic| when the field knows K
};

TheoremResult cmd_theorem(const TheoremOptions &opts);

struct Obs1Options {
    std::filesystem::path scene_path;
    std::size_t pairs = 500;
    double separation_m = 0.05;
    std::uint64_t seed = 0;
    std::filesystem::path out_path;
    unsigned threads = 1;
};

struct Obs1Result {
    std::filesystem::path report_path;
    std::filesystem::path manifest_path;
    std::size_t matched_count = 0;
    double fraction_below_threshold = 0.0; // below 0.1 m; NaN when nothing matched
};

Obs1Result cmd_obs1(const Obs1Options &opts);

struct RenderOptions {
    std::filesystem::path dataset_path;
    std::size_t record_index = 0;
    double gamma = 1.0;
    std::filesystem::path out_path;
};

struct RenderResult {
    std::filesystem::path image_path;
    std::filesystem::path manifest_path;
};

RenderResult cmd_render(const RenderOptions &opts);

struct SplitOptions {
    std::filesystem::path dataset_path;
    double train_fraction = 0.8;
    std::uint64_t seed = 0;
    std::filesystem::path out_path;
};

struct SplitResult {
    std::filesystem::path report_path;
    std::filesystem::path manifest_path;
    std::size_t train_count = 0;
    std::size_t test_count = 0;
};

SplitResult cmd_split(const SplitOptions &opts);

// Re-runs the command recorded in a manifest; outputs land on the recorded
// paths again.
void replay_manifest(const std::filesystem::path &manifest_path);

std::filesystem::path manifest_path_for(const std::filesystem::path &out_path);

// %.9g formatting used by every report column.
std::string format_number(double value);

} // namespace rfss::pipeline

#endif
