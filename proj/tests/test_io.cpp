#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "hut/checkpoint.hpp"
#include "hut/config.hpp"
#include "hut/rng.hpp"
#include "hut/train.hpp"
#include "test_util.hpp"

using namespace hut;
using testutil::check_matrix_eq;
using testutil::read_file;
namespace fs = std::filesystem;

namespace {

struct ScratchDir {
    fs::path dir;
    ScratchDir() : dir(fs::current_path() / "io_scratch") { fs::create_directories(dir); }
    ~ScratchDir() {
        std::error_code ec;
        fs::remove_all(dir, ec);
    }
    std::string file(const char* name) const { return (dir / name).string(); }
};

void write_bytes(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    REQUIRE(bool(out));
}

}  // namespace

TEST_CASE("checkpoint bytes are the documented format, exactly") {
    ScratchDir scratch;
    Checkpoint ck;
    ck.seed = 42;
    ck.config = {{"method", "hut"}};
    Matrix w(1, 2);
    w.at(0, 0) = 1.0;
    w.at(0, 1) = -2.0;
    ck.tensors.emplace_back("w", w);

    const std::string path = scratch.file("golden.ckpt");
    save_checkpoint(ck, path);

    std::string want =
        "HUTCKPT 1\n"
        "seed 42\n"
        "config method hut\n"
        "tensors 1\n"
        "tensor w 1 2\n"
        "data\n";
    // 1.0 and -2.0 as little-endian binary64
    const char one[8] = {0, 0, 0, 0, 0, 0, '\xF0', '\x3F'};
    const char minus_two[8] = {0, 0, 0, 0, 0, 0, 0, '\xC0'};
    want.append(one, 8);
    want.append(minus_two, 8);

    CHECK(read_file(path) == want);
}

TEST_CASE("checkpoint round-trip and config ordering") {
    ScratchDir scratch;
    Checkpoint ck;
    ck.seed = 7;
    ck.config = {{"zeta", "1"}, {"alpha", "2"}};  // saved sorted by key
    ck.tensors.emplace_back("a", gaussian_matrix(3, 4, 0.0, 1.0, 5));
    ck.tensors.emplace_back("b", gaussian_matrix(1, 1, 0.0, 1.0, 6));

    const std::string path = scratch.file("roundtrip.ckpt");
    save_checkpoint(ck, path);
    const Checkpoint back = load_checkpoint(path);

    CHECK(back.seed == 7);
    REQUIRE(back.config.size() == 2);
    CHECK(back.config[0] == std::pair<std::string, std::string>("alpha", "2"));
    CHECK(back.config[1] == std::pair<std::string, std::string>("zeta", "1"));
    REQUIRE(back.tensors.size() == 2);
    CHECK(back.tensors[0].first == "a");
    check_matrix_eq(back.tensors[0].second, ck.tensors[0].second);
    check_matrix_eq(back.tensors[1].second, ck.tensors[1].second);

    // saving the loaded checkpoint reproduces the file byte for byte
    const std::string copy = scratch.file("roundtrip2.ckpt");
    save_checkpoint(back, copy);
    CHECK(read_file(copy) == read_file(path));
}

TEST_CASE("checkpoint loader rejects damaged files") {
    ScratchDir scratch;
    Checkpoint ck;
    ck.seed = 1;
    ck.tensors.emplace_back("w", Matrix(2, 2, 1.0));
    const std::string path = scratch.file("victim.ckpt");
    save_checkpoint(ck, path);
    const std::string good = read_file(path);

    SUBCASE("truncated payload") {
        write_bytes(path, good.substr(0, good.size() - 3));
        try {
            (void)load_checkpoint(path);
            FAIL("expected runtime_error");
        } catch (const std::runtime_error& e) {
            CHECK(std::string(e.what()).find("truncated") != std::string::npos);
        }
    }
    SUBCASE("trailing garbage") {
        write_bytes(path, good + "x");
        CHECK_THROWS_AS(load_checkpoint(path), std::runtime_error);
    }
    SUBCASE("wrong magic") {
        std::string bad = good;
        bad[0] = 'X';
        write_bytes(path, bad);
        CHECK_THROWS_AS(load_checkpoint(path), std::runtime_error);
    }
    SUBCASE("unsupported version") {
        std::string bad = good;
        bad[8] = '9';  // "HUTCKPT 9"
        write_bytes(path, bad);
        CHECK_THROWS_AS(load_checkpoint(path), std::runtime_error);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(load_checkpoint(scratch.file("nope.ckpt")), std::runtime_error);
    }
}

TEST_CASE("checkpoint writer rejects unserializable names") {
    ScratchDir scratch;
    Checkpoint ck;
    ck.seed = 1;
    ck.tensors.emplace_back("has space", Matrix(1, 1, 0.0));
    CHECK_THROWS_AS(save_checkpoint(ck, scratch.file("bad.ckpt")), std::runtime_error);

    ck.tensors.clear();
    ck.config = {{"key", "with\nnewline"}};
    CHECK_THROWS_AS(save_checkpoint(ck, scratch.file("bad2.ckpt")), std::runtime_error);
}

TEST_CASE("config files: comments, case, junk detection") {
    ScratchDir scratch;
    const std::string path = scratch.file("run.cfg");
    write_bytes(path,
                "# experiment setup\n"
                "METHOD = hut\n"
                "\n"
                "targets = wq,wv   # the pair that matters\n"
                "rank = 4\n"
                "lr = 0.05\n");
    const ConfigMap kv = parse_config_file(path);
    CHECK(kv.at("method") == "hut");
    CHECK(kv.at("targets") == "wq,wv");
    CHECK(kv.at("rank") == "4");
    CHECK(kv.at("lr") == "0.05");

    SUBCASE("unknown keys are named") {
        write_bytes(path, "rnak = 4\n");  // typo'd "rank"
        try {
            (void)parse_config_file(path);
            FAIL("expected invalid_argument");
        } catch (const std::invalid_argument& e) {
            const std::string msg = e.what();
            CHECK(msg.find("rnak") != std::string::npos);
            CHECK(msg.find("line 1") != std::string::npos);
        }
    }
    SUBCASE("missing separator") {
        write_bytes(path, "rank 4\n");
        CHECK_THROWS_AS((void)parse_config_file(path), std::invalid_argument);
    }
    SUBCASE("empty value") {
        write_bytes(path, "rank =\n");
        CHECK_THROWS_AS((void)parse_config_file(path), std::invalid_argument);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS((void)parse_config_file(scratch.file("ghost.cfg")),
                        std::runtime_error);
    }
}

TEST_CASE("config map to train config: defaults, overrides, validation") {
    ConfigMap kv;
    kv["method"] = "hut";
    kv["targets"] = "wv";
    kv["width"] = "24";
    TrainConfig cfg = make_train_config(kv);
    CHECK(cfg.method == Method::Hut);
    CHECK(cfg.rank == 8);  // regression-task default
    CHECK(cfg.task.d == 24);
    REQUIRE(cfg.targets.size() == 1);
    CHECK(cfg.targets[0] == WeightTarget::Wv);

    kv["task"] = "tokens";
    cfg = make_train_config(kv);
    CHECK(cfg.task.kind == TaskKind::Tokens);
    CHECK(cfg.rank == 4);  // classification default is smaller

    kv["rank"] = "2";  // explicit rank beats either default
    cfg = make_train_config(kv);
    CHECK(cfg.rank == 2);

    SUBCASE("frozen control spelling") {
        ConfigMap frozen;
        frozen["method"] = "none";
        frozen["targets"] = "none";
        const TrainConfig fc = make_train_config(frozen);
        CHECK(fc.method == Method::None);
        CHECK(fc.targets.empty());
    }
    SUBCASE("value junk is rejected with the key name") {
        kv["rank"] = "8x";
        try {
            (void)make_train_config(kv);
            FAIL("expected invalid_argument");
        } catch (const std::invalid_argument& e) {
            CHECK(std::string(e.what()).find("rank") != std::string::npos);
        }
    }
    SUBCASE("unknown key is rejected") {
        kv["mystery"] = "1";
        CHECK_THROWS_AS((void)make_train_config(kv), std::invalid_argument);
    }
    SUBCASE("range violations surface from validate()") {
        kv["rank"] = "0";
        CHECK_THROWS_AS((void)make_train_config(kv), std::invalid_argument);
        kv["rank"] = "4";
        kv["lr"] = "-1";
        CHECK_THROWS_AS((void)make_train_config(kv), std::invalid_argument);
        kv["lr"] = "0.1";
        kv["method"] = "sorcery";
        CHECK_THROWS_AS((void)make_train_config(kv), std::invalid_argument);
    }
}

TEST_CASE("overrides win and the snapshot round-trips") {
    ConfigMap base;
    base["rank"] = "8";
    base["lr"] = "0.01";
    ConfigMap overrides;
    overrides["lr"] = "0.2";
    merge_config(base, overrides);
    CHECK(base.at("rank") == "8");
    CHECK(base.at("lr") == "0.2");

    TrainConfig cfg;
    cfg.method = Method::Lora;
    cfg.targets = {WeightTarget::Wk, WeightTarget::Wo};
    cfg.rank = 3;
    cfg.lr = 0.125;
    cfg.seed = 99;
    cfg.task.kind = TaskKind::Tokens;
    cfg.task.classes = 5;
    const ConfigMap snap = train_config_to_map(cfg);
    const TrainConfig back = make_train_config(snap);
    CHECK(train_config_to_map(back) == snap);
    CHECK(back.method == Method::Lora);
    CHECK(back.rank == 3);
    CHECK(back.lr == 0.125);
    CHECK(back.task.classes == 5);
}
