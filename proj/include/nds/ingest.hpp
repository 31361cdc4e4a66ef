#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nds/core.hpp"
#include "nds/errors.hpp"
#include "nds/synth.hpp"

namespace nds {

// Binary layout, all little-endian:
//   magic "NDS1" | version u16 | d u32 | count u64 | N_c u32     (22 bytes)
//   then count records: label u32 | run_id u32 | d x float32
inline constexpr char kFeatureMagic[4] = {'N', 'D', 'S', '1'};
inline constexpr std::uint16_t kFeatureVersion = 1;
inline constexpr std::size_t kFeatureHeaderBytes = 22;

struct FeatureFileHeader {
    std::uint16_t version = kFeatureVersion;
    std::uint32_t d = 0;
    std::uint64_t count = 0;
    std::uint32_t n_classes = 0;
};

namespace detail {

template <typename T>
inline void put_le(std::string& out, T value) {
    for (std::size_t i = 0; i < sizeof(T); ++i)
        out.push_back(static_cast<char>((value >> (8 * i)) & 0xff));
}

template <typename T>
inline T get_le(const unsigned char* p) {
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
        value |= static_cast<T>(static_cast<std::uint64_t>(p[i]) << (8 * i));
    return value;
}

inline void put_f32_le(std::string& out, float f) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    put_le(out, bits);
}

inline float get_f32_le(const unsigned char* p) {
    const std::uint32_t bits = get_le<std::uint32_t>(p);
    float f;
    std::memcpy(&f, &bits, 4);
    return f;
}

}  // namespace detail

inline std::uint64_t fnv1a64(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 14695981039346656037ULL;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open '" + path + "' for reading");
    std::string bytes((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
    if (in.bad()) throw io_error("read failure on '" + path + "'");
    return bytes;
}

inline std::string digest_hex(const std::string& bytes) {
    const std::uint64_t h = fnv1a64(bytes.data(), bytes.size());
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

inline std::string encode_feature_file(const StreamView& stream) {
    std::string out;
    out.reserve(kFeatureHeaderBytes + stream.size() * (8 + 4 * stream.d));
    out.append(kFeatureMagic, 4);
    detail::put_le(out, kFeatureVersion);
    detail::put_le(out, static_cast<std::uint32_t>(stream.d));
    detail::put_le(out, static_cast<std::uint64_t>(stream.size()));
    detail::put_le(out, stream.n_classes);
    for (const auto& s : stream.samples) {
        if (s.features.size() != stream.d)
            throw format_error("feature length disagrees with stream dimension");
        detail::put_le(out, s.label);
        detail::put_le(out, s.run_id);
        for (float f : s.features) detail::put_f32_le(out, f);
    }
    return out;
}

inline void write_feature_file(const StreamView& stream, const std::string& path) {
    if (stream.d == 0) throw format_error("write_feature_file: dimension must be > 0");
    if (stream.n_classes == 0)
        throw format_error("write_feature_file: class count must be > 0");
    const std::string bytes = encode_feature_file(stream);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open '" + path + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw io_error("write failure on '" + path + "'");
}

// Inverse of write. The macro plan does not live in this file; attach it from
// a manifest if needed.
inline StreamView read_feature_file(const std::string& path) {
    const std::string bytes = read_file_bytes(path);
    if (bytes.size() < kFeatureHeaderBytes)
        throw corruption_error("'" + path + "': file shorter than the 22-byte header");
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    if (std::memcmp(p, kFeatureMagic, 4) != 0)
        throw format_error("'" + path + "': bad magic, not a feature file");
    const auto version = detail::get_le<std::uint16_t>(p + 4);
    if (version != kFeatureVersion)
        throw version_error("'" + path + "': unsupported version " +
                            std::to_string(version));
    const auto d = detail::get_le<std::uint32_t>(p + 6);
    const auto count = detail::get_le<std::uint64_t>(p + 10);
    const auto n_classes = detail::get_le<std::uint32_t>(p + 18);
    if (d == 0) throw format_error("'" + path + "': zero feature dimension");
    if (n_classes == 0) throw format_error("'" + path + "': zero class count");

    const std::uint64_t expected = kFeatureHeaderBytes + count * (8 + 4ull * d);
    if (bytes.size() != expected)
        throw corruption_error("'" + path + "': expected " + std::to_string(expected) +
                               " bytes for " + std::to_string(count) +
                               " records, found " + std::to_string(bytes.size()));

    StreamView stream;
    stream.d = d;
    stream.n_classes = n_classes;
    stream.samples.resize(count);
    const unsigned char* rec = p + kFeatureHeaderBytes;
    for (std::uint64_t i = 0; i < count; ++i) {
        auto& s = stream.samples[i];
        s.id = i;
        s.label = detail::get_le<std::uint32_t>(rec);
        s.run_id = detail::get_le<std::uint32_t>(rec + 4);
        if (s.label >= n_classes)
            throw corruption_error("'" + path + "': record " + std::to_string(i) +
                                   " label " + std::to_string(s.label) +
                                   " out of range");
        s.features.resize(d);
        for (std::uint32_t k = 0; k < d; ++k)
            s.features[k] = detail::get_f32_le(rec + 8 + 4ull * k);
        rec += 8 + 4ull * d;
    }
    return stream;
}

struct StreamManifest {
    std::string features;  // feature file path, relative to the manifest
    std::string digest;    // fnv1a-64 hex of the feature file bytes
    std::size_t d = 0;
    std::uint32_t n_classes = 0;
    std::string split;  // "train" or "test"
    std::vector<MacroExperienceDescriptor> macros;
    std::optional<StreamSpec> spec;  // generator parameters if synthetic
};

inline void to_json(nlohmann::json& j, const StreamSpec& s) {
    j = nlohmann::json{{"n_classes", s.n_classes},
                       {"d", s.d},
                       {"n_macros", s.n_macros},
                       {"samples_per_macro", s.samples_per_macro},
                       {"zipf_s", s.zipf_s},
                       {"run_length", {s.run_length.min, s.run_length.max}},
                       {"rho", s.rho},
                       {"sigma", s.sigma},
                       {"cluster_sep", s.cluster_sep},
                       {"drift_scale", s.drift_scale},
                       {"p_absent", s.p_absent},
                       {"interleave", s.interleave},
                       {"permute_ranks", s.permute_ranks},
                       {"test_samples_per_macro", s.test_samples_per_macro},
                       {"n_test_conditions", s.n_test_conditions},
                       {"test_from_runs", s.test_from_runs},
                       {"seed", s.seed}};
}

inline void from_json(const nlohmann::json& j, StreamSpec& s) {
    StreamSpec defaults;
    s.n_classes = j.value("n_classes", defaults.n_classes);
    s.d = j.value("d", defaults.d);
    s.n_macros = j.value("n_macros", defaults.n_macros);
    s.samples_per_macro = j.value("samples_per_macro", defaults.samples_per_macro);
    s.zipf_s = j.value("zipf_s", defaults.zipf_s);
    if (j.contains("run_length")) {
        const auto& rl = j.at("run_length");
        s.run_length.min = rl.at(0).get<std::size_t>();
        s.run_length.max = rl.at(1).get<std::size_t>();
    }
    s.rho = j.value("rho", defaults.rho);
    s.sigma = j.value("sigma", defaults.sigma);
    s.cluster_sep = j.value("cluster_sep", defaults.cluster_sep);
    s.drift_scale = j.value("drift_scale", defaults.drift_scale);
    s.p_absent = j.value("p_absent", defaults.p_absent);
    s.interleave = j.value("interleave", defaults.interleave);
    s.permute_ranks = j.value("permute_ranks", defaults.permute_ranks);
    s.test_samples_per_macro =
        j.value("test_samples_per_macro", defaults.test_samples_per_macro);
    s.n_test_conditions = j.value("n_test_conditions", defaults.n_test_conditions);
    s.test_from_runs = j.value("test_from_runs", defaults.test_from_runs);
    s.seed = j.value("seed", defaults.seed);
}

inline nlohmann::json manifest_to_json(const StreamManifest& m) {
    nlohmann::json j;
    j["features"] = m.features;
    j["digest"] = m.digest;
    j["d"] = m.d;
    j["N_c"] = m.n_classes;
    j["split"] = m.split;
    j["macros"] = nlohmann::json::array();
    for (const auto& me : m.macros) {
        nlohmann::json entry;
        entry["start"] = me.start;
        entry["end"] = me.end;
        entry["proportions"] = me.class_proportions;
        entry["drift_tag"] = me.drift_tag;
        j["macros"].push_back(std::move(entry));
    }
    if (m.spec) j["spec"] = *m.spec;
    return j;
}

inline void save_manifest(const StreamManifest& m, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw io_error("cannot open '" + path + "' for writing");
    out << manifest_to_json(m).dump(2) << '\n';
    if (!out) throw io_error("write failure on '" + path + "'");
}

// Parses and validates a manifest: schema, interval partition, and the digest
// of the referenced feature file (resolved relative to the manifest).
inline StreamManifest load_manifest(const std::string& path) {
    const std::string text = read_file_bytes(path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw format_error("'" + path + "': " + e.what());
    }
    StreamManifest m;
    try {
        m.features = j.at("features").get<std::string>();
        m.digest = j.at("digest").get<std::string>();
        m.d = j.at("d").get<std::size_t>();
        m.n_classes = j.at("N_c").get<std::uint32_t>();
        m.split = j.at("split").get<std::string>();
        for (const auto& entry : j.at("macros")) {
            MacroExperienceDescriptor me;
            me.start = entry.at("start").get<std::size_t>();
            me.end = entry.at("end").get<std::size_t>();
            me.class_proportions = entry.at("proportions").get<std::vector<double>>();
            me.drift_tag = entry.value("drift_tag", std::string{});
            m.macros.push_back(std::move(me));
        }
        if (j.contains("spec")) m.spec = j.at("spec").get<StreamSpec>();
    } catch (const nlohmann::json::exception& e) {
        throw format_error("'" + path + "': " + e.what());
    }

    const auto feature_path =
        (std::filesystem::path(path).parent_path() / m.features).string();
    const std::string bytes = read_file_bytes(feature_path);
    const std::string actual = digest_hex(bytes);
    if (actual != m.digest)
        throw digest_error("'" + path + "': digest " + m.digest +
                           " does not match feature file (" + actual +
                           "), manifest is stale");

    // intervals must partition [0, count)
    const std::uint64_t count =
        bytes.size() >= kFeatureHeaderBytes
            ? detail::get_le<std::uint64_t>(
                  reinterpret_cast<const unsigned char*>(bytes.data()) + 10)
            : 0;
    std::size_t cursor = 0;
    for (const auto& me : m.macros) {
        if (me.start != cursor || me.end <= me.start)
            throw format_error("'" + path + "': macro intervals do not partition the stream");
        cursor = me.end;
    }
    if (!m.macros.empty() && cursor != count)
        throw format_error("'" + path + "': macro intervals cover " +
                           std::to_string(cursor) + " of " + std::to_string(count) +
                           " records");
    return m;
}

// Convenience: feature file + manifest in one step, digest filled in.
inline StreamManifest write_stream_bundle(const StreamView& stream,
                                          const std::string& dir,
                                          const std::string& basename,
                                          const std::string& split,
                                          const std::optional<StreamSpec>& spec = {}) {
    std::filesystem::create_directories(dir);
    const std::string feature_name = basename + ".nds";
    const auto feature_path = (std::filesystem::path(dir) / feature_name).string();
    write_feature_file(stream, feature_path);

    StreamManifest m;
    m.features = feature_name;
    m.digest = digest_hex(encode_feature_file(stream));
    m.d = stream.d;
    m.n_classes = stream.n_classes;
    m.split = split;
    m.macros = stream.macro_plan;
    m.spec = spec;
    save_manifest(m, (std::filesystem::path(dir) / (basename + ".json")).string());
    return m;
}

// Manifest + feature file -> in-memory stream with the macro plan attached.
inline StreamView load_stream(const std::string& manifest_path) {
    const StreamManifest m = load_manifest(manifest_path);
    const auto feature_path =
        (std::filesystem::path(manifest_path).parent_path() / m.features).string();
    StreamView stream = read_feature_file(feature_path);
    if (stream.d != m.d || stream.n_classes != m.n_classes)
        throw format_error("'" + manifest_path +
                           "': header disagrees with manifest (d or class count)");
    stream.macro_plan = m.macros;
    return stream;
}

}  // namespace nds
