// SPDX-License-Identifier: Apache-2.0

#include "rfss/datastore.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "rfss/errors.hpp"
#include "rfss/rng.hpp"

namespace rfss::datastore {
namespace {

static_assert(std::endian::native == std::endian::little,
              "serialization assumes a little-endian host");

template <typename T> void write_raw(std::ostream &out, T value) {
    out.write(reinterpret_cast<const char *>(&value), sizeof(T));
}

template <typename T> bool read_raw(std::istream &in, T &value) {
    in.read(reinterpret_cast<char *>(&value), sizeof(T));
    return in.gcount() == sizeof(T);
}

} // namespace

void SpectrumDataset::validate() const {
    if (records.empty())
        throw DataError("SpectrumDataset: need at least one record");
    if (azimuth_cells == 0 || elevation_cells == 0)
        throw DataError("SpectrumDataset: grid dimensions must be positive");
    for (const DatasetRecord &r : records)
        if (r.spectrum.rows() != azimuth_cells || r.spectrum.cols() != elevation_cells)
            throw DataError("SpectrumDataset: record spectrum shape mismatch");
}

void append_record(SpectrumDataset &ds, const Vec3 &position, const Grid &spectrum) {
    if (ds.records.empty() && ds.azimuth_cells == 0) {
        ds.azimuth_cells = static_cast<std::uint32_t>(spectrum.rows());
        ds.elevation_cells = static_cast<std::uint32_t>(spectrum.cols());
    }
    DatasetRecord record;
    record.position = position;
    record.spectrum = Grid(spectrum.rows(), spectrum.cols());
    for (std::size_t i = 0; i < spectrum.size(); ++i)
        record.spectrum[i] = static_cast<double>(static_cast<float>(spectrum[i]));
    ds.records.push_back(std::move(record));
}

void save_dataset(const SpectrumDataset &ds, std::ostream &out) {
    ds.validate();
    out.write("RFSS", 4);
    write_raw<std::uint32_t>(out, kFormatVersion);
    write_raw<std::uint32_t>(out, ds.azimuth_cells);
    write_raw<std::uint32_t>(out, ds.elevation_cells);
    write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(ds.records.size()));
    write_raw<double>(out, ds.frequency_hz);
    write_raw<std::uint64_t>(out, ds.scene_hash);
    for (const DatasetRecord &r : ds.records) {
        write_raw<double>(out, r.position.x);
        write_raw<double>(out, r.position.y);
        write_raw<double>(out, r.position.z);
        for (double v : r.spectrum.values())
            write_raw<float>(out, static_cast<float>(v));
    }
    if (!out)
        throw DataError("save_dataset: write failed");
}

SpectrumDataset load_dataset(std::istream &in) {
    char magic[4];
    in.read(magic, 4);
    if (in.gcount() != 4 || std::memcmp(magic, "RFSS", 4) != 0)
        throw MagicError("load_dataset: bad magic bytes");

    std::uint32_t version = 0;
    if (!read_raw(in, version))
        throw TruncationError("load_dataset: truncated header", 0);
    if (version != kFormatVersion)
        throw FormatVersionError("load_dataset: unsupported format version " +
                                 std::to_string(version));

    SpectrumDataset ds;
    std::uint32_t record_count = 0;
    if (!read_raw(in, ds.azimuth_cells) || !read_raw(in, ds.elevation_cells) ||
        !read_raw(in, record_count) || !read_raw(in, ds.frequency_hz) ||
        !read_raw(in, ds.scene_hash))
        throw TruncationError("load_dataset: truncated header", 0);
    if (record_count == 0)
        throw DataError("load_dataset: dataset holds no records");
    if (!std::isfinite(ds.frequency_hz))
        throw NonFiniteError("load_dataset: non-finite frequency");

    const std::size_t cells =
        static_cast<std::size_t>(ds.azimuth_cells) * ds.elevation_cells;
    ds.records.reserve(record_count);
    for (std::uint32_t rec = 0; rec < record_count; ++rec) {
        DatasetRecord record;
        if (!read_raw(in, record.position.x) || !read_raw(in, record.position.y) ||
            !read_raw(in, record.position.z))
            throw TruncationError("load_dataset: truncated in record " + std::to_string(rec),
                                  rec);
        if (!std::isfinite(record.position.x) || !std::isfinite(record.position.y) ||
            !std::isfinite(record.position.z))
            throw NonFiniteError("load_dataset: non-finite position in record " +
                                 std::to_string(rec));
        record.spectrum = Grid(ds.azimuth_cells, ds.elevation_cells);
        for (std::size_t i = 0; i < cells; ++i) {
            float v = 0.0f;
            if (!read_raw(in, v))
                throw TruncationError("load_dataset: truncated in record " + std::to_string(rec),
                                      rec);
            if (!std::isfinite(v))
                throw NonFiniteError("load_dataset: non-finite power in record " +
                                     std::to_string(rec));
            record.spectrum[i] = static_cast<double>(v);
        }
        ds.records.push_back(std::move(record));
    }
    return ds;
}

void save_dataset_file(const SpectrumDataset &ds, const std::filesystem::path &path) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw DataError("save_dataset_file: cannot open " + tmp.string());
        save_dataset(ds, out);
    }
    std::filesystem::rename(tmp, path);
}

SpectrumDataset load_dataset_file(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DataError("load_dataset_file: cannot open " + path.string());
    return load_dataset(in);
}

SplitIndices split(std::size_t record_count, const SplitSpec &spec) {
    if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
        throw std::invalid_argument("split: train fraction must lie strictly in (0, 1)");

    std::vector<std::size_t> order(record_count);
    for (std::size_t i = 0; i < record_count; ++i)
        order[i] = i;
    SplitMix64 rng(spec.seed);
    for (std::size_t i = record_count; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.next_below(i));
        std::swap(order[i - 1], order[j]);
    }

    const std::size_t train_count =
        static_cast<std::size_t>(std::floor(spec.train_fraction * static_cast<double>(record_count)));
    SplitIndices out;
    out.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(train_count));
    out.test.assign(order.begin() + static_cast<std::ptrdiff_t>(train_count), order.end());
    return out;
}

std::string render_pgm(const Grid &spectrum, double gamma) {
    if (!(gamma > 0.0))
        throw std::invalid_argument("render_pgm: gamma must be positive");
    const std::size_t width = spectrum.rows();   // azimuth
    const std::size_t height = spectrum.cols();  // elevation

    std::string out = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n65535\n";
    out.reserve(out.size() + 2 * width * height);

    const double peak = spectrum.max_value();
    for (std::size_t row = 0; row < height; ++row) {
        const std::size_t e = height - 1 - row;
        for (std::size_t a = 0; a < width; ++a) {
            long value = 0;
            if (peak > 0.0)
                value = std::lround(65535.0 * std::pow(spectrum(a, e) / peak, gamma));
            value = std::clamp(value, 0L, 65535L);
            out.push_back(static_cast<char>((value >> 8) & 0xFF)); // 16-bit samples, MSB first
            out.push_back(static_cast<char>(value & 0xFF));
        }
    }
    return out;
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t hash = 0xCBF29CE484222325ULL;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 0x100000001B3ULL;
    }
    return hash;
}

std::uint64_t scene_text_hash(std::string_view text) {
    // Canonical form: comments stripped, tokens separated by single spaces,
    // empty lines dropped, lines joined with '\n'.
    std::string canonical;
    std::istringstream stream{std::string(text)};
    std::string line;
    while (std::getline(stream, line)) {
        const std::size_t comment = line.find('#');
        if (comment != std::string::npos)
            line.resize(comment);
        std::istringstream tokens(line);
        std::string token, rebuilt;
        while (tokens >> token) {
            if (!rebuilt.empty())
                rebuilt.push_back(' ');
            rebuilt += token;
        }
        if (rebuilt.empty())
            continue;
        canonical += rebuilt;
        canonical.push_back('\n');
    }
    return fnv1a64(canonical);
}

namespace {

struct SceneLine {
    std::size_t number = 0;
    std::string section;
    std::string key;
    std::vector<std::string> tokens;
};

double parse_number(const std::string &token, std::size_t line_no) {
    if (token == "inf")
        return std::numeric_limits<double>::infinity();
    try {
        std::size_t used = 0;
        const double v = std::stod(token, &used);
        if (used != token.size())
            throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception &) {
        throw SceneSyntaxError("scene: invalid number '" + token + "'", line_no);
    }
}

Vec3 parse_vec3(const SceneLine &line) {
    if (line.tokens.size() != 3)
        throw SceneSyntaxError("scene: '" + line.key + "' expects three numbers", line.number);
    return {parse_number(line.tokens[0], line.number), parse_number(line.tokens[1], line.number),
            parse_number(line.tokens[2], line.number)};
}

double parse_scalar(const SceneLine &line) {
    if (line.tokens.size() != 1)
        throw SceneSyntaxError("scene: '" + line.key + "' expects one value", line.number);
    return parse_number(line.tokens[0], line.number);
}

// Normals within 1e-6 of unit length are normalized silently.
Vec3 require_unit(const Vec3 &v, std::size_t line_no, const std::string &what) {
    const double n = v.norm();
    if (std::abs(n - 1.0) > 1e-6)
        throw SceneInvariantError("scene: " + what + " must be unit length (norm " +
                                      std::to_string(n) + ")",
                                  line_no);
    return v / n;
}

} // namespace

raytrace::Scene parse_scene(std::string_view text) {
    std::istringstream stream{std::string(text)};
    std::string raw;
    std::size_t line_no = 0;
    std::string section;

    std::vector<SceneLine> entries;
    std::vector<std::size_t> reflector_starts; // entry index where each [reflector] begins
    while (std::getline(stream, raw)) {
        ++line_no;
        const std::size_t comment = raw.find('#');
        if (comment != std::string::npos)
            raw.resize(comment);
        std::istringstream tokens(raw);
        std::string first;
        if (!(tokens >> first))
            continue;
        if (first.front() == '[') {
            if (first.back() != ']')
                throw SceneSyntaxError("scene: malformed section header", line_no);
            section = first.substr(1, first.size() - 2);
            static const char *known[] = {"rf", "array", "box", "receiver", "seed", "reflector"};
            if (std::find_if(std::begin(known), std::end(known),
                             [&](const char *k) { return section == k; }) == std::end(known))
                throw SceneSyntaxError("scene: unknown section [" + section + "]", line_no);
            if (section == "reflector")
                reflector_starts.push_back(entries.size());
            continue;
        }
        if (section.empty())
            throw SceneSyntaxError("scene: key outside any section", line_no);

        SceneLine entry;
        entry.number = line_no;
        entry.section = section;
        entry.key = first;
        std::string eq;
        if (!(tokens >> eq) || eq != "=")
            throw SceneSyntaxError("scene: expected 'key = value'", line_no);
        std::string tok;
        while (tokens >> tok)
            entry.tokens.push_back(tok);
        if (entry.tokens.empty())
            throw SceneSyntaxError("scene: missing value after '='", line_no);
        entries.push_back(std::move(entry));
    }

    const auto find_entry = [&](const std::string &sec,
                                const std::string &key) -> const SceneLine * {
        for (const SceneLine &e : entries)
            if (e.section == sec && e.key == key)
                return &e;
        return nullptr;
    };
    const auto require_entry = [&](const std::string &sec, const std::string &key) {
        const SceneLine *e = find_entry(sec, key);
        if (!e)
            throw SceneMissingFieldError("scene: missing '" + key + "' in [" + sec + "]", 0);
        return e;
    };

    raytrace::Scene scene;
    scene.rf = RFParams::from_frequency(parse_scalar(*require_entry("rf", "frequency_hz")));

    const double rows = parse_scalar(*require_entry("array", "rows"));
    const double cols = parse_scalar(*require_entry("array", "cols"));
    if (rows < 1.0 || cols < 1.0 || rows != std::floor(rows) || cols != std::floor(cols))
        throw SceneInvariantError("scene: array rows/cols must be positive integers",
                                  require_entry("array", "rows")->number);
    scene.array.rows = static_cast<std::size_t>(rows);
    scene.array.cols = static_cast<std::size_t>(cols);

    const SceneLine *spacing = require_entry("array", "spacing");
    if (spacing->tokens.size() == 1 && spacing->tokens[0] == "half_wavelength")
        scene.array.spacing_m = scene.rf.wavelength_m / 2.0;
    else
        scene.array.spacing_m = parse_scalar(*spacing);
    if (!(scene.array.spacing_m > 0.0))
        throw SceneInvariantError("scene: array spacing must be positive", spacing->number);

    if (const SceneLine *normal = find_entry("array", "normal"))
        scene.array.normal = require_unit(parse_vec3(*normal), normal->number, "array normal");

    scene.box_min = parse_vec3(*require_entry("box", "min"));
    scene.box_max = parse_vec3(*require_entry("box", "max"));
    if (!(scene.box_min.x < scene.box_max.x && scene.box_min.y < scene.box_max.y &&
          scene.box_min.z < scene.box_max.z))
        throw SceneInvariantError("scene: box min must be strictly below box max",
                                  require_entry("box", "min")->number);

    scene.receiver_pos = parse_vec3(*require_entry("receiver", "position"));
    scene.array.origin = scene.receiver_pos;

    if (const SceneLine *seed = find_entry("seed", "value")) {
        if (seed->tokens.size() != 1)
            throw SceneSyntaxError("scene: seed expects one value", seed->number);
        try {
            scene.seed = std::stoull(seed->tokens[0]);
        } catch (const std::exception &) {
            throw SceneSyntaxError("scene: invalid seed '" + seed->tokens[0] + "'", seed->number);
        }
    }

    for (std::size_t r = 0; r < reflector_starts.size(); ++r) {
        const std::size_t begin = reflector_starts[r];
        const std::size_t end =
            r + 1 < reflector_starts.size() ? reflector_starts[r + 1] : entries.size();
        const auto local = [&](const std::string &key) -> const SceneLine * {
            for (std::size_t i = begin; i < end; ++i)
                if (entries[i].section == "reflector" && entries[i].key == key)
                    return &entries[i];
            return nullptr;
        };
        const auto local_require = [&](const std::string &key) {
            const SceneLine *e = local(key);
            if (!e)
                throw SceneMissingFieldError("scene: reflector " + std::to_string(r) +
                                                 " missing '" + key + "'",
                                             0);
            return e;
        };

        raytrace::Reflector reflector;
        reflector.point = parse_vec3(*local_require("point"));
        const SceneLine *normal = local_require("normal");
        reflector.normal = require_unit(parse_vec3(*normal), normal->number,
                                        "reflector " + std::to_string(r) + " normal");
        const double gre = parse_scalar(*local_require("gamma_re"));
        const double gim = parse_scalar(*local_require("gamma_im"));
        reflector.reflection_coeff = {gre, gim};
        if (std::abs(reflector.reflection_coeff) > 1.0 + 1e-12)
            throw SceneInvariantError("scene: reflector " + std::to_string(r) +
                                          " has |gamma| > 1",
                                      local_require("gamma_re")->number);
        const SceneLine *widths = local_require("half_widths");
        if (widths->tokens.size() != 2)
            throw SceneSyntaxError("scene: 'half_widths' expects two values", widths->number);
        reflector.half_width_u = parse_number(widths->tokens[0], widths->number);
        reflector.half_width_v = parse_number(widths->tokens[1], widths->number);
        if (!(reflector.half_width_u > 0.0) || !(reflector.half_width_v > 0.0))
            throw SceneInvariantError("scene: reflector " + std::to_string(r) +
                                          " half-widths must be positive",
                                      widths->number);
        scene.reflectors.push_back(reflector);
    }

    scene.scene_hash = scene_text_hash(text);
    try {
        scene.validate();
    } catch (const std::invalid_argument &e) {
        throw SceneInvariantError(std::string("scene: ") + e.what(), 0);
    }
    return scene;
}

raytrace::Scene load_scene_file(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in)
        throw DataError("load_scene_file: cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_scene(buffer.str());
}

} // namespace rfss::datastore
