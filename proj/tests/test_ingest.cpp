#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "nds/ingest.hpp"
#include "nds/synth.hpp"

using namespace nds;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
    const auto dir = fs::temp_directory_path() / "nds_ingest_tests";
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

StreamView small_synthetic() {
    StreamSpec spec;
    spec.n_classes = 4;
    spec.d = 6;
    spec.n_macros = 3;
    spec.samples_per_macro = 100;
    spec.test_samples_per_macro = 10;
    spec.seed = 99;
    return generate_stream(spec).train;
}

}  // namespace

TEST_CASE("feature file size follows the documented layout") {
    const auto dir = scratch_dir();
    auto stream = small_synthetic();
    const auto path = (dir / "train.nds").string();
    write_feature_file(stream, path);
    const auto size = fs::file_size(path);
    CHECK(size == 22 + stream.size() * (8 + 4 * stream.d));
}

TEST_CASE("write then read reproduces every bit of the stream") {
    const auto dir = scratch_dir();
    auto stream = small_synthetic();
    const auto path = (dir / "round.nds").string();
    write_feature_file(stream, path);
    auto back = read_feature_file(path);
    REQUIRE(back.size() == stream.size());
    CHECK(back.d == stream.d);
    CHECK(back.n_classes == stream.n_classes);
    for (std::size_t i = 0; i < stream.size(); ++i) {
        CHECK(back.samples[i].id == i);
        CHECK(back.samples[i].label == stream.samples[i].label);
        CHECK(back.samples[i].run_id == stream.samples[i].run_id);
        CHECK(back.samples[i].features == stream.samples[i].features);  // exact
    }
    CHECK(back.macro_plan.empty());
}

TEST_CASE("empty stream writes a header-only file") {
    const auto dir = scratch_dir();
    StreamView empty;
    empty.d = 5;
    empty.n_classes = 3;
    const auto path = (dir / "empty.nds").string();
    write_feature_file(empty, path);
    CHECK(fs::file_size(path) == 22);
    auto back = read_feature_file(path);
    CHECK(back.size() == 0);
    CHECK(back.d == 5);
    CHECK(back.n_classes == 3);
}

TEST_CASE("corrupt magic is rejected without a partial stream") {
    const auto dir = scratch_dir();
    auto stream = small_synthetic();
    const auto path = (dir / "bad_magic.nds").string();
    write_feature_file(stream, path);
    {
        std::fstream f(path, std::ios::binary | std::ios::in | std::ios::out);
        f.write("XXXX", 4);
    }
    CHECK_THROWS_AS(read_feature_file(path), format_error);
}

TEST_CASE("version mismatch is reported as unsupported") {
    const auto dir = scratch_dir();
    auto stream = small_synthetic();
    const auto path = (dir / "bad_version.nds").string();
    write_feature_file(stream, path);
    {
        std::fstream f(path, std::ios::binary | std::ios::in | std::ios::out);
        f.seekp(4);
        const char v2[2] = {2, 0};
        f.write(v2, 2);
    }
    CHECK_THROWS_AS(read_feature_file(path), version_error);
}

TEST_CASE("truncated file names expected and actual byte counts") {
    const auto dir = scratch_dir();
    auto stream = small_synthetic();
    const auto path = (dir / "short.nds").string();
    write_feature_file(stream, path);
    const auto full = fs::file_size(path);
    fs::resize_file(path, full - 13);
    try {
        read_feature_file(path);
        FAIL("expected corruption_error");
    } catch (const corruption_error& e) {
        const std::string msg = e.what();
        CHECK(msg.find(std::to_string(full)) != std::string::npos);
        CHECK(msg.find(std::to_string(full - 13)) != std::string::npos);
    }
}

TEST_CASE("missing file raises an io error with the path") {
    try {
        read_feature_file("/nonexistent/nowhere.nds");
        FAIL("expected io_error");
    } catch (const io_error& e) {
        CHECK(std::string(e.what()).find("nowhere.nds") != std::string::npos);
    }
}

TEST_CASE("manifest round trip preserves every field") {
    const auto dir = scratch_dir();
    StreamSpec spec;
    spec.n_classes = 5;
    spec.d = 4;
    spec.n_macros = 9;
    spec.samples_per_macro = 50;
    spec.test_samples_per_macro = 10;
    spec.p_absent = 0.1;
    spec.seed = 7;
    auto gs = generate_stream(spec);
    auto m = write_stream_bundle(gs.train, dir.string(), "train", "train", spec);

    auto loaded = load_manifest((dir / "train.json").string());
    CHECK(loaded.features == m.features);
    CHECK(loaded.digest == m.digest);
    CHECK(loaded.d == m.d);
    CHECK(loaded.n_classes == m.n_classes);
    CHECK(loaded.split == "train");
    REQUIRE(loaded.macros.size() == 9);
    std::size_t cursor = 0;
    for (std::size_t e = 0; e < 9; ++e) {
        CHECK(loaded.macros[e].start == cursor);
        cursor = loaded.macros[e].end;
        CHECK(loaded.macros[e].drift_tag == m.macros[e].drift_tag);
        for (std::size_t c = 0; c < 5; ++c)
            CHECK(loaded.macros[e].class_proportions[c] ==
                  m.macros[e].class_proportions[c]);
    }
    CHECK(cursor == gs.train.size());
    REQUIRE(loaded.spec.has_value());
    CHECK(loaded.spec->seed == 7);
    CHECK(loaded.spec->p_absent == Approx(0.1));
    CHECK(loaded.spec->run_length.min == spec.run_length.min);
}

TEST_CASE("editing the feature file invalidates the manifest") {
    const auto dir = scratch_dir();
    auto stream = small_synthetic();
    write_stream_bundle(stream, dir.string(), "tampered", "train");
    {
        std::fstream f(dir / "tampered.nds",
                       std::ios::binary | std::ios::in | std::ios::out);
        f.seekp(40);
        f.put('\x7f');
    }
    CHECK_THROWS_AS(load_manifest((dir / "tampered.json").string()), digest_error);
}

TEST_CASE("malformed manifest json is a format error") {
    const auto dir = scratch_dir();
    const auto path = (dir / "broken.json").string();
    std::ofstream(path) << "{ not json ";
    CHECK_THROWS_AS(load_manifest(path), format_error);

    std::ofstream(path, std::ios::trunc) << "{\"features\": \"x.nds\"}";
    CHECK_THROWS_AS(load_manifest(path), format_error);  // missing keys
}

TEST_CASE("load_stream attaches the manifest macro plan") {
    const auto dir = scratch_dir();
    auto stream = small_synthetic();
    write_stream_bundle(stream, dir.string(), "full", "train");
    auto back = load_stream((dir / "full.json").string());
    REQUIRE(back.macro_plan.size() == stream.macro_plan.size());
    for (std::size_t e = 0; e < stream.macro_plan.size(); ++e) {
        CHECK(back.macro_plan[e].start == stream.macro_plan[e].start);
        CHECK(back.macro_plan[e].end == stream.macro_plan[e].end);
    }
    REQUIRE(back.size() == stream.size());
    CHECK(back.samples[17].features == stream.samples[17].features);
}

TEST_CASE("digest is content-sensitive and stable") {
    auto stream = small_synthetic();
    const auto bytes = encode_feature_file(stream);
    CHECK(digest_hex(bytes) == digest_hex(bytes));
    auto copy = bytes;
    copy[50] = static_cast<char>(copy[50] ^ 0x01);
    CHECK(digest_hex(bytes) != digest_hex(copy));
    CHECK(digest_hex(bytes).size() == 16);
}

TEST_CASE("out-of-range label in a record is corruption") {
    const auto dir = scratch_dir();
    auto stream = small_synthetic();
    const auto path = (dir / "bad_label.nds").string();
    write_feature_file(stream, path);
    {
        std::fstream f(path, std::ios::binary | std::ios::in | std::ios::out);
        f.seekp(22);  // first record's label
        const unsigned char big[4] = {0xff, 0xff, 0x00, 0x00};
        f.write(reinterpret_cast<const char*>(big), 4);
    }
    CHECK_THROWS_AS(read_feature_file(path), corruption_error);
}
