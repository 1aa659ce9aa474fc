// SPDX-License-Identifier: Apache-2.0

#include "rfss/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include "rfss/errors.hpp"
#include "rfss/interp.hpp"
#include "rfss/knndl.hpp"
#include "rfss/metrics.hpp"
#include "rfss/rng.hpp"

namespace rfss::pipeline {
namespace {

using Clock = std::chrono::steady_clock;

void write_text_atomic(const std::filesystem::path &path, const std::string &content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw DataError("cannot open " + tmp.string() + " for writing");
        out << content;
        if (!out)
            throw DataError("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string format_u64(std::uint64_t v) { return std::to_string(v); }

long long elapsed_ms(Clock::time_point start) {
    return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start).count();
}

// Minimum clearance for random transmitter placement, from box faces,
// reflectors, and the receiver.
constexpr double kPlacementClearance = 0.1;
constexpr int kPlacementAttempts = 10000;

double point_rectangle_distance(const raytrace::Reflector &r, const Vec3 &p) {
    const PlaneFrame f = r.frame();
    const Vec3 rel = p - r.point;
    const double du = std::clamp(rel.dot(f.u), -r.half_width_u, r.half_width_u);
    const double dv = std::clamp(rel.dot(f.v), -r.half_width_v, r.half_width_v);
    const Vec3 closest = r.point + f.u * du + f.v * dv;
    return distance(p, closest);
}

Vec3 place_transmitter(const raytrace::Scene &scene, SplitMix64 &rng) {
    const Vec3 lo = scene.box_min + Vec3{kPlacementClearance, kPlacementClearance,
                                         kPlacementClearance};
    const Vec3 hi = scene.box_max - Vec3{kPlacementClearance, kPlacementClearance,
                                         kPlacementClearance};
    if (!(lo.x < hi.x && lo.y < hi.y && lo.z < hi.z))
        throw DomainError("generate: box too small for the placement clearance");

    for (int attempt = 0; attempt < kPlacementAttempts; ++attempt) {
        const Vec3 p{rng.uniform(lo.x, hi.x), rng.uniform(lo.y, hi.y), rng.uniform(lo.z, hi.z)};
        if (distance(p, scene.receiver_pos) < kPlacementClearance)
            continue;
        bool clear = true;
        for (const raytrace::Reflector &r : scene.reflectors)
            if (point_rectangle_distance(r, p) < kPlacementClearance) {
                clear = false;
                break;
            }
        if (clear)
            return p;
    }
    throw DomainError("generate: no clear transmitter placement after 10000 samples");
}

std::vector<Vec3> read_tx_list(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in)
        throw DataError("generate: cannot open transmitter list " + path.string());
    std::vector<Vec3> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t comment = line.find('#');
        if (comment != std::string::npos)
            line.resize(comment);
        std::istringstream tokens(line);
        Vec3 p;
        if (!(tokens >> p.x))
            continue;
        if (!(tokens >> p.y >> p.z))
            throw DataError("generate: malformed transmitter on line " + std::to_string(line_no));
        out.push_back(p);
    }
    if (out.empty())
        throw DataError("generate: transmitter list is empty");
    return out;
}

} // namespace

std::string format_number(double value) {
    if (std::isinf(value))
        return value > 0.0 ? "inf" : "-inf";
    char buffer[48];
    std::snprintf(buffer, sizeof(buffer), "%.9g", value);
    return buffer;
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)> &fn) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (std::size_t i = t; i < n; i += workers)
                    fn(i);
            } catch (...) {
                const std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
            }
        });
    }
    for (std::thread &th : pool)
        th.join();
    if (failure)
        std::rethrow_exception(failure);
}

void Manifest::set(const std::string &key, const std::string &value) {
    fields.emplace_back(key, value);
}

const std::string *Manifest::find(const std::string &key) const {
    for (const auto &[k, v] : fields)
        if (k == key)
            return &v;
    return nullptr;
}

void Manifest::write(const std::filesystem::path &path) const {
    std::string text;
    for (const auto &[k, v] : fields)
        text += k + "\t" + v + "\n";
    write_text_atomic(path, text);
}

Manifest Manifest::read(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in)
        throw DataError("manifest: cannot open " + path.string());
    Manifest m;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        const std::size_t tab = line.find('\t');
        if (tab == std::string::npos)
            throw DataError("manifest: malformed line '" + line + "'");
        m.fields.emplace_back(line.substr(0, tab), line.substr(tab + 1));
    }
    return m;
}

std::filesystem::path manifest_path_for(const std::filesystem::path &out_path) {
    return out_path.string() + ".manifest";
}

GenerateResult cmd_generate(const GenerateOptions &opts) {
    const auto start = Clock::now();
    raytrace::Scene scene = datastore::load_scene_file(opts.scene_path);
    const std::uint64_t seed = opts.seed.value_or(scene.seed);

    std::vector<Vec3> transmitters;
    const bool explicit_list = !opts.tx_list_path.empty();
    if (explicit_list) {
        transmitters = read_tx_list(opts.tx_list_path);
    } else {
        if (opts.count == 0)
            throw std::invalid_argument("generate: transmitter count must be at least 1");
        transmitters.resize(opts.count);
        // Each placement draws from its own derived stream, so parallel and
        // serial generation agree.
        for (std::size_t i = 0; i < opts.count; ++i) {
            SplitMix64 rng(derive_seed(seed, i));
            transmitters[i] = place_transmitter(scene, rng);
        }
    }

    std::vector<Grid> spectra(transmitters.size());
    parallel_for(transmitters.size(), opts.threads, [&](std::size_t i) {
        spectra[i] = raytrace::simulate_spectrum(scene, transmitters[i], opts.max_order);
    });

    datastore::SpectrumDataset ds;
    ds.frequency_hz = scene.rf.frequency_hz;
    ds.scene_hash = scene.scene_hash;
    for (std::size_t i = 0; i < transmitters.size(); ++i)
        datastore::append_record(ds, transmitters[i], spectra[i]);
    datastore::save_dataset_file(ds, opts.out_path);

    Manifest manifest;
    manifest.set("command", "generate");
    manifest.set("tool_version", kToolVersion);
    manifest.set("scene", opts.scene_path.string());
    manifest.set("scene_hash", format_u64(scene.scene_hash));
    manifest.set("seed", format_u64(seed));
    manifest.set("tx_list", explicit_list ? opts.tx_list_path.string() : "");
    manifest.set("count", std::to_string(transmitters.size()));
    manifest.set("max_order", std::to_string(opts.max_order));
    manifest.set("threads", std::to_string(opts.threads));
    manifest.set("out", opts.out_path.string());
    manifest.set("duration_ms", std::to_string(elapsed_ms(start)));
    const std::filesystem::path manifest_path = manifest_path_for(opts.out_path);
    manifest.write(manifest_path);

    return {opts.out_path, manifest_path, transmitters.size()};
}

EvalMethod eval_method_from_name(const std::string &name) {
    if (name == "knn")
        return EvalMethod::knn;
    if (name == "barycentric")
        return EvalMethod::barycentric;
    if (name == "knndl")
        return EvalMethod::knndl;
    throw std::invalid_argument("eval: unknown method '" + name + "'");
}

std::string eval_method_name(EvalMethod method) {
    switch (method) {
    case EvalMethod::knn:
        return "knn";
    case EvalMethod::barycentric:
        return "barycentric";
    case EvalMethod::knndl:
        return "knndl";
    }
    return "?";
}

EvalResult cmd_eval(const EvalOptions &opts) {
    const auto start = Clock::now();
    const datastore::SpectrumDataset ds = datastore::load_dataset_file(opts.dataset_path);
    const datastore::SplitIndices indices =
        datastore::split(ds.records.size(), {opts.train_fraction, opts.seed});
    if (opts.neighbor_count == 0 || opts.neighbor_count > indices.train.size())
        throw std::invalid_argument("eval: neighbor count exceeds the train split");

    std::vector<Vec3> train_positions;
    train_positions.reserve(indices.train.size());
    for (std::size_t idx : indices.train)
        train_positions.push_back(ds.records[idx].position);

    struct Row {
        std::size_t record = 0;
        Vec3 position{};
        metrics::MetricReport report;
        std::vector<double> trace; // knndl only
    };
    std::vector<Row> rows(indices.test.size());

    parallel_for(indices.test.size(), opts.threads, [&](std::size_t t) {
        const std::size_t record_idx = indices.test[t];
        const datastore::DatasetRecord &record = ds.records[record_idx];

        const std::vector<std::size_t> picked =
            interp::knn(train_positions, record.position, opts.neighbor_count);
        interp::NeighborSet neighbors;
        neighbors.target = record.position;
        for (std::size_t p : picked) {
            neighbors.positions.push_back(train_positions[p]);
            neighbors.spectra.push_back(ds.records[indices.train[p]].spectrum);
        }

        Row row;
        row.record = record_idx;
        row.position = record.position;
        Grid predicted;
        switch (opts.method) {
        case EvalMethod::knn:
            predicted = interp::knn_average(neighbors);
            break;
        case EvalMethod::barycentric:
            predicted = interp::interpolate_spectrum(
                neighbors, interp::barycentric_weights(neighbors.positions, record.position));
            break;
        case EvalMethod::knndl: {
            knndl::TrainConfig config;
            config.iterations = opts.iterations;
            config.learning_rate = opts.learning_rate;
            config.seed = derive_seed(opts.seed, record_idx);
            knndl::TrainResult trained = knndl::train(neighbors, record.spectrum, config);
            predicted = knndl::predict(trained.weights, neighbors);
            row.trace = std::move(trained.loss_trace);
            break;
        }
        }
        row.report = metrics::compare(predicted, record.spectrum);
        rows[t] = std::move(row);
    });

    double sum_mse = 0.0, sum_psnr = 0.0, sum_ssim = 0.0;
    std::size_t sentinels = 0;
    for (const Row &row : rows) {
        sum_mse += row.report.mse;
        sum_ssim += row.report.ssim;
        if (metrics::is_psnr_sentinel(row.report.psnr_db))
            ++sentinels;
        else
            sum_psnr += row.report.psnr_db;
    }
    const double n = static_cast<double>(rows.size());
    const double finite = static_cast<double>(rows.size() - sentinels);

    EvalResult result;
    result.target_count = rows.size();
    result.mean_mse = sum_mse / n;
    result.mean_ssim = sum_ssim / n;
    result.mean_psnr_db = finite > 0.0 ? sum_psnr / finite : metrics::kPsnrSentinel;
    result.psnr_sentinels = sentinels;

    std::string report = "record\ttx_x\ttx_y\ttx_z\tmse\tpsnr_db\tssim\tlpips\n";
    for (const Row &row : rows) {
        report += std::to_string(row.record) + "\t" + format_number(row.position.x) + "\t" +
                  format_number(row.position.y) + "\t" + format_number(row.position.z) + "\t" +
                  format_number(row.report.mse) + "\t" + format_number(row.report.psnr_db) +
                  "\t" + format_number(row.report.ssim) + "\t" + metrics::MetricReport::lpips +
                  "\n";
    }
    report += "mean\t-\t-\t-\t" + format_number(result.mean_mse) + "\t" +
              format_number(result.mean_psnr_db) + "\t" + format_number(result.mean_ssim) +
              "\tunsupported\n";
    report += "psnr_sentinels\t" + std::to_string(sentinels) + "\n";
    write_text_atomic(opts.out_path, report);

    std::filesystem::path traces_path;
    if (opts.method == EvalMethod::knndl) {
        traces_path = opts.out_path.string() + ".traces";
        std::string traces = "record\titeration\tloss\n";
        for (const Row &row : rows)
            for (std::size_t i = 0; i < row.trace.size(); ++i)
                traces += std::to_string(row.record) + "\t" + std::to_string(i) + "\t" +
                          format_number(row.trace[i]) + "\n";
        write_text_atomic(traces_path, traces);
    }

    Manifest manifest;
    manifest.set("command", "eval");
    manifest.set("tool_version", kToolVersion);
    manifest.set("dataset", opts.dataset_path.string());
    manifest.set("method", eval_method_name(opts.method));
    manifest.set("neighbors", std::to_string(opts.neighbor_count));
    manifest.set("train_fraction", format_number(opts.train_fraction));
    manifest.set("seed", format_u64(opts.seed));
    manifest.set("iterations", std::to_string(opts.iterations));
    manifest.set("learning_rate", format_number(opts.learning_rate));
    manifest.set("threads", std::to_string(opts.threads));
    manifest.set("out", opts.out_path.string());
    manifest.set("duration_ms", std::to_string(elapsed_ms(start)));
    const std::filesystem::path manifest_path = manifest_path_for(opts.out_path);
    manifest.write(manifest_path);

    result.report_path = opts.out_path;
    result.manifest_path = manifest_path;
    result.traces_path = traces_path;
    return result;
}

namespace {

class QuadraticField final : public interp::FieldOracle {
  public:
    Grid evaluate(const Vec3 &p) const override {
        return Grid(channel::kAzimuthCells, channel::kElevationCells, p.squared_norm());
    }
    bool has_analytic_hessian() const override { return true; }
    double analytic_curvature() const override { return 1.0; } // Hessian 2I
};

class FreespaceField final : public interp::FieldOracle {
  public:
    explicit FreespaceField(raytrace::Scene scene) : scene_(std::move(scene)) {}
    Grid evaluate(const Vec3 &p) const override {
        return raytrace::simulate_spectrum(scene_, p, 0);
    }

  private:
    raytrace::Scene scene_;
};

// Unit regular-tetrahedron directions.
const Vec3 kTetrahedron[4] = {
    Vec3{1.0, 1.0, 1.0} / std::numbers::sqrt3,
    Vec3{1.0, -1.0, -1.0} / std::numbers::sqrt3,
    Vec3{-1.0, 1.0, -1.0} / std::numbers::sqrt3,
    Vec3{-1.0, -1.0, 1.0} / std::numbers::sqrt3,
};

Vec3 rotate_by_quaternion(const Vec3 &v, double w, double x, double y, double z) {
    // v' = v + 2 q x (q x v + w v), q = (x, y, z)
    const Vec3 q{x, y, z};
    const Vec3 t = q.cross(v) * 2.0;
    return v + t * w + q.cross(t);
}

// Four neighbors at distance `radius` around the target, shaped as a randomly
// rotated regular tetrahedron; the target sits at the centroid.
std::vector<Vec3> tetra_neighbors(const Vec3 &target, double radius, SplitMix64 &rng) {
    double w, x, y, z, norm2;
    do {
        w = rng.uniform(-1.0, 1.0);
        x = rng.uniform(-1.0, 1.0);
        y = rng.uniform(-1.0, 1.0);
        z = rng.uniform(-1.0, 1.0);
        norm2 = w * w + x * x + y * y + z * z;
    } while (norm2 < 1e-4 || norm2 > 1.0);
    const double inv = 1.0 / std::sqrt(norm2);
    w *= inv;
    x *= inv;
    y *= inv;
    z *= inv;

    std::vector<Vec3> out;
    out.reserve(4);
    for (const Vec3 &v : kTetrahedron)
        out.push_back(target + rotate_by_quaternion(v, w, x, y, z) * radius);
    return out;
}

double median_of(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n == 0)
        return std::numeric_limits<double>::quiet_NaN();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

} // namespace

TheoremResult cmd_theorem(const TheoremOptions &opts) {
    const auto start = Clock::now();
    if (opts.trials == 0)
        throw std::invalid_argument("theorem: need at least one trial");

    std::unique_ptr<interp::FieldOracle> oracle;
    Vec3 sample_lo, sample_hi;
    double hessian_step = 0.02;
    bool avoid_receiver = false;
    Vec3 receiver{};
    if (opts.field == TheoremField::quadratic) {
        oracle = std::make_unique<QuadraticField>();
        sample_lo = {-1.0, -1.0, -1.0};
        sample_hi = {1.0, 1.0, 1.0};
    } else {
        raytrace::Scene scene = datastore::load_scene_file(opts.scene_path);
        // Keep targets, their neighbors, and the Hessian stencil inside the
        // box and away from the receiver.
        const double margin = 0.1 + 2.0 * opts.radius;
        sample_lo = scene.box_min + Vec3{margin, margin, margin};
        sample_hi = scene.box_max - Vec3{margin, margin, margin};
        if (!(sample_lo.x < sample_hi.x && sample_lo.y < sample_hi.y &&
              sample_lo.z < sample_hi.z))
            throw DomainError("theorem: box too small for the requested radius");
        hessian_step = scene.rf.wavelength_m / 4.0;
        avoid_receiver = true;
        receiver = scene.receiver_pos;
        oracle = std::make_unique<FreespaceField>(std::move(scene));
    }

    struct Trial {
        interp::ErrorBoundReport full;
        interp::ErrorBoundReport half;
    };
    std::vector<Trial> trials(opts.trials);

    parallel_for(opts.trials, opts.threads, [&](std::size_t t) {
        SplitMix64 rng(derive_seed(opts.seed, t));
        Vec3 target;
        do {
            target = {rng.uniform(sample_lo.x, sample_hi.x),
                      rng.uniform(sample_lo.y, sample_hi.y),
                      rng.uniform(sample_lo.z, sample_hi.z)};
        } while (avoid_receiver && distance(target, receiver) < 0.5);

        const std::vector<Vec3> full = tetra_neighbors(target, opts.radius, rng);
        std::vector<Vec3> half;
        half.reserve(4);
        for (const Vec3 &p : full)
            half.push_back(target + (p - target) * 0.5);

        trials[t].full = interp::error_bound_check(*oracle, target, 4, full, hessian_step);
        trials[t].half = interp::error_bound_check(*oracle, target, 4, half, hessian_step);
    });

    std::vector<double> ratios;
    std::size_t determinate = 0, satisfied = 0;
    double max_curvature_error = 0.0;
    for (const Trial &t : trials) {
        if (t.half.error > 0.0)
            ratios.push_back(t.full.error / t.half.error);
        if (t.full.satisfied.has_value()) {
            ++determinate;
            if (*t.full.satisfied)
                ++satisfied;
        }
        if (oracle->has_analytic_hessian())
            max_curvature_error = std::max(
                max_curvature_error, std::abs(t.full.curvature - oracle->analytic_curvature()));
    }

    TheoremResult result;
    result.trials = opts.trials;
    result.satisfied_fraction =
        determinate > 0 ? static_cast<double>(satisfied) / static_cast<double>(determinate)
                        : std::numeric_limits<double>::quiet_NaN();
    result.ratio_median = median_of(ratios);
    result.max_curvature_error = max_curvature_error;

    std::string report =
        "trial\tradius\terror\terror_half\tratio\tcurvature\tbound\tsatisfied\n";
    for (std::size_t t = 0; t < trials.size(); ++t) {
        const interp::ErrorBoundReport &full = trials[t].full;
        const interp::ErrorBoundReport &half = trials[t].half;
        const double ratio = half.error > 0.0 ? full.error / half.error
                                              : std::numeric_limits<double>::quiet_NaN();
        const std::string flag = full.satisfied.has_value()
                                     ? (*full.satisfied ? "yes" : "no")
                                     : "indeterminate";
        report += std::to_string(t) + "\t" + format_number(full.radius) + "\t" +
                  format_number(full.error) + "\t" + format_number(half.error) + "\t" +
                  format_number(ratio) + "\t" + format_number(full.curvature) + "\t" +
                  format_number(full.bound()) + "\t" + flag + "\n";
    }
    report += "satisfied_fraction\t" + format_number(result.satisfied_fraction) + "\n";
    report += "ratio_median\t" + format_number(result.ratio_median) + "\n";
    write_text_atomic(opts.out_path, report);

    Manifest manifest;
    manifest.set("command", "theorem");
    manifest.set("tool_version", kToolVersion);
    manifest.set("field", opts.field == TheoremField::quadratic ? "quadratic" : "freespace");
    manifest.set("scene", opts.scene_path.string());
    manifest.set("trials", std::to_string(opts.trials));
    manifest.set("radius", format_number(opts.radius));
    manifest.set("seed", format_u64(opts.seed));
    manifest.set("threads", std::to_string(opts.threads));
    manifest.set("out", opts.out_path.string());
    manifest.set("duration_ms", std::to_string(elapsed_ms(start)));
    const std::filesystem::path manifest_path = manifest_path_for(opts.out_path);
    manifest.write(manifest_path);

    result.report_path = opts.out_path;
    result.manifest_path = manifest_path;
    return result;
}

Obs1Result cmd_obs1(const Obs1Options &opts) {
    const auto start = Clock::now();
    if (opts.pairs == 0 || !(opts.separation_m > 0.0))
        throw std::invalid_argument("obs1: pairs and separation must be positive");
    const raytrace::Scene scene = datastore::load_scene_file(opts.scene_path);

    std::vector<std::vector<double>> per_pair(opts.pairs);
    parallel_for(opts.pairs, opts.threads, [&](std::size_t pair) {
        SplitMix64 rng(derive_seed(opts.seed, pair));
        const Vec3 tx1 = place_transmitter(scene, rng);
        Vec3 tx2;
        for (int attempt = 0;; ++attempt) {
            if (attempt >= kPlacementAttempts)
                throw DomainError("obs1: no valid second transmitter placement");
            // Random offset of length <= separation, uniform direction.
            Vec3 dir;
            double norm2;
            do {
                dir = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
                norm2 = dir.squared_norm();
            } while (norm2 < 1e-6 || norm2 > 1.0);
            tx2 = tx1 + dir.normalized() * (opts.separation_m * rng.next_double());
            if (scene.inside_box(tx2) && distance(tx2, scene.receiver_pos) >= 1e-6 &&
                distance(tx1, tx2) > 1e-12)
                break;
        }

        const std::vector<raytrace::PropagationPath> paths1 =
            raytrace::enumerate_paths(scene, tx1, 1);
        const std::vector<raytrace::PropagationPath> paths2 =
            raytrace::enumerate_paths(scene, tx2, 1);
        for (const raytrace::PropagationPath &a : paths1) {
            if (a.order() != 1)
                continue;
            for (const raytrace::PropagationPath &b : paths2) {
                if (b.order() == 1 && b.reflector_ids == a.reflector_ids) {
                    per_pair[pair].push_back(raytrace::reflection_point_distance(a, b));
                    break;
                }
            }
        }
    });

    std::vector<double> distances;
    for (const std::vector<double> &d : per_pair)
        distances.insert(distances.end(), d.begin(), d.end());

    constexpr double kThreshold = 0.1;
    constexpr double kBinWidth = 0.01;
    constexpr std::size_t kBins = 20; // covers [0, 0.2); one overflow row
    std::vector<std::size_t> histogram(kBins + 1, 0);
    std::size_t below = 0;
    for (double d : distances) {
        const std::size_t bin = std::min<std::size_t>(
            static_cast<std::size_t>(std::floor(d / kBinWidth)), kBins);
        ++histogram[bin];
        if (d < kThreshold)
            ++below;
    }

    Obs1Result result;
    result.matched_count = distances.size();
    result.fraction_below_threshold =
        distances.empty() ? std::numeric_limits<double>::quiet_NaN()
                          : static_cast<double>(below) / static_cast<double>(distances.size());

    std::string report = "bin_lo_m\tbin_hi_m\tcount\n";
    if (distances.empty()) {
        report += "notice\tno order-1 paths matched\t0\n";
    } else {
        for (std::size_t b = 0; b < kBins; ++b)
            report += format_number(static_cast<double>(b) * kBinWidth) + "\t" +
                      format_number(static_cast<double>(b + 1) * kBinWidth) + "\t" +
                      std::to_string(histogram[b]) + "\n";
        report += format_number(static_cast<double>(kBins) * kBinWidth) + "\tinf\t" +
                  std::to_string(histogram[kBins]) + "\n";
    }
    report += "matched_distances\t" + std::to_string(result.matched_count) + "\n";
    report += "fraction_below_0.1m\t" + format_number(result.fraction_below_threshold) + "\n";
    write_text_atomic(opts.out_path, report);

    Manifest manifest;
    manifest.set("command", "obs1");
    manifest.set("tool_version", kToolVersion);
    manifest.set("scene", opts.scene_path.string());
    manifest.set("pairs", std::to_string(opts.pairs));
    manifest.set("separation", format_number(opts.separation_m));
    manifest.set("seed", format_u64(opts.seed));
    manifest.set("threads", std::to_string(opts.threads));
    manifest.set("out", opts.out_path.string());
    manifest.set("duration_ms", std::to_string(elapsed_ms(start)));
    const std::filesystem::path manifest_path = manifest_path_for(opts.out_path);
    manifest.write(manifest_path);

    result.report_path = opts.out_path;
    result.manifest_path = manifest_path;
    return result;
}

RenderResult cmd_render(const RenderOptions &opts) {
    const auto start = Clock::now();
    const datastore::SpectrumDataset ds = datastore::load_dataset_file(opts.dataset_path);
    if (opts.record_index >= ds.records.size())
        throw std::out_of_range("render: record index " + std::to_string(opts.record_index) +
                                " out of range (dataset holds " +
                                std::to_string(ds.records.size()) + ")");
    const std::string pgm =
        datastore::render_pgm(ds.records[opts.record_index].spectrum, opts.gamma);
    write_text_atomic(opts.out_path, pgm);

    Manifest manifest;
    manifest.set("command", "render");
    manifest.set("tool_version", kToolVersion);
    manifest.set("dataset", opts.dataset_path.string());
    manifest.set("record", std::to_string(opts.record_index));
    manifest.set("gamma", format_number(opts.gamma));
    manifest.set("out", opts.out_path.string());
    manifest.set("duration_ms", std::to_string(elapsed_ms(start)));
    const std::filesystem::path manifest_path = manifest_path_for(opts.out_path);
    manifest.write(manifest_path);

    return {opts.out_path, manifest_path};
}

SplitResult cmd_split(const SplitOptions &opts) {
    const auto start = Clock::now();
    const datastore::SpectrumDataset ds = datastore::load_dataset_file(opts.dataset_path);
    const datastore::SplitIndices indices =
        datastore::split(ds.records.size(), {opts.train_fraction, opts.seed});

    std::vector<const char *> assignment(ds.records.size(), "test");
    for (std::size_t idx : indices.train)
        assignment[idx] = "train";
    std::string report = "record\tset\n";
    for (std::size_t i = 0; i < assignment.size(); ++i)
        report += std::to_string(i) + "\t" + assignment[i] + "\n";
    write_text_atomic(opts.out_path, report);

    Manifest manifest;
    manifest.set("command", "split");
    manifest.set("tool_version", kToolVersion);
    manifest.set("dataset", opts.dataset_path.string());
    manifest.set("train_fraction", format_number(opts.train_fraction));
    manifest.set("seed", format_u64(opts.seed));
    manifest.set("out", opts.out_path.string());
    manifest.set("duration_ms", std::to_string(elapsed_ms(start)));
    const std::filesystem::path manifest_path = manifest_path_for(opts.out_path);
    manifest.write(manifest_path);

    return {opts.out_path, manifest_path, indices.train.size(), indices.test.size()};
}

void replay_manifest(const std::filesystem::path &manifest_path) {
    const Manifest m = Manifest::read(manifest_path);
    const std::string *command = m.find("command");
    if (!command)
        throw DataError("manifest: missing command field");
    const auto text = [&](const char *key) {
        const std::string *v = m.find(key);
        if (!v)
            throw DataError(std::string("manifest: missing field '") + key + "'");
        return *v;
    };
    const auto number = [&](const char *key) { return std::stod(text(key)); };
    const auto integer = [&](const char *key) { return std::stoull(text(key)); };

    if (*command == "generate") {
        GenerateOptions opts;
        opts.scene_path = text("scene");
        opts.seed = integer("seed");
        opts.tx_list_path = text("tx_list");
        opts.count = integer("count");
        opts.max_order = integer("max_order");
        opts.threads = static_cast<unsigned>(integer("threads"));
        opts.out_path = text("out");
        cmd_generate(opts);
    } else if (*command == "eval") {
        EvalOptions opts;
        opts.dataset_path = text("dataset");
        opts.method = eval_method_from_name(text("method"));
        opts.neighbor_count = integer("neighbors");
        opts.train_fraction = number("train_fraction");
        opts.seed = integer("seed");
        opts.iterations = integer("iterations");
        opts.learning_rate = number("learning_rate");
        opts.threads = static_cast<unsigned>(integer("threads"));
        opts.out_path = text("out");
        cmd_eval(opts);
    } else if (*command == "theorem") {
        TheoremOptions opts;
        opts.field = text("field") == "quadratic" ? TheoremField::quadratic
                                                  : TheoremField::freespace;
        opts.scene_path = text("scene");
        opts.trials = integer("trials");
        opts.radius = number("radius");
        opts.seed = integer("seed");
        opts.threads = static_cast<unsigned>(integer("threads"));
        opts.out_path = text("out");
        cmd_theorem(opts);
    } else if (*command == "obs1") {
        Obs1Options opts;
        opts.scene_path = text("scene");
        opts.pairs = integer("pairs");
        opts.separation_m = number("separation");
        opts.seed = integer("seed");
        opts.threads = static_cast<unsigned>(integer("threads"));
        opts.out_path = text("out");
        cmd_obs1(opts);
    } else if (*command == "render") {
        RenderOptions opts;
        opts.dataset_path = text("dataset");
        opts.record_index = integer("record");
        opts.gamma = number("gamma");
        opts.out_path = text("out");
        cmd_render(opts);
    } else if (*command == "split") {
        SplitOptions opts;
        opts.dataset_path = text("dataset");
        opts.train_fraction = number("train_fraction");
        opts.seed = integer("seed");
        opts.out_path = text("out");
        cmd_split(opts);
    } else {
        throw DataError("manifest: unknown command '" + *command + "'");
    }
}

} // namespace rfss::pipeline
