// SPDX-License-Identifier: Apache-2.0
//
// Persistence: the RFSS binary spectrum-dataset format, deterministic
// train/test splitting, PGM export, and the scene configuration parser.

#ifndef RFSS_DATASTORE_HPP
#define RFSS_DATASTORE_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "rfss/geometry.hpp"
#include "rfss/grid.hpp"
#include "rfss/raytrace.hpp"

namespace rfss::datastore {

inline constexpr std::uint32_t kFormatVersion = 1;

struct DatasetRecord {
    Vec3 position{};
    Grid spectrum;
};

// Power values are held at float32 precision (the on-disk resolution), so a
// dataset assembled through append_record round-trips bit-identically.
struct SpectrumDataset {
    std::uint32_t azimuth_cells = 0;
    std::uint32_t elevation_cells = 0;
    double frequency_hz = 0.0;
    std::uint64_t scene_hash = 0;
    std::vector<DatasetRecord> records;

    void validate() const;
};

// Quantizes the spectrum to float32 and appends it.
void append_record(SpectrumDataset &ds, const Vec3 &position, const Grid &spectrum);

// RFSS binary layout, all integers and floats little-endian:
//   "RFSS" | u32 version | u32 N_a | u32 N_e | u32 record count |
//   f64 frequency | u64 scene hash |
//   per record: 3 x f64 position, N_a*N_e x f32 power (azimuth-major).
void save_dataset(const SpectrumDataset &ds, std::ostream &out);
SpectrumDataset load_dataset(std::istream &in);

// File variants; writes go to a temporary and are renamed into place.
void save_dataset_file(const SpectrumDataset &ds, const std::filesystem::path &path);
SpectrumDataset load_dataset_file(const std::filesystem::path &path);

struct SplitSpec {
    double train_fraction = 0.8; // strictly in (0, 1)
    std::uint64_t seed = 0;
};

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

// Seeded uniform shuffle; the first floor(fraction * n) indices train.
SplitIndices split(std::size_t record_count, const SplitSpec &spec);

// Binary PGM (P5), width = azimuth cells, height = elevation cells, maxval
// 65535, pixel = round(65535 * (cell / max)^gamma). Elevation increases
// upward (top row = highest elevation).
std::string render_pgm(const Grid &spectrum, double gamma = 1.0);

std::uint64_t fnv1a64(std::string_view bytes);

// Hash of the scene text after whitespace/comment normalization.
std::uint64_t scene_text_hash(std::string_view text);

// Parses the documented scene schema ([rf], [array], [box], [receiver],
// optional [seed] and repeated [reflector] sections). Violations raise
// SceneSyntaxError / SceneMissingFieldError / SceneInvariantError with the
// offending line number.
raytrace::Scene parse_scene(std::string_view text);

raytrace::Scene load_scene_file(const std::filesystem::path &path);

} // namespace rfss::datastore

#endif
