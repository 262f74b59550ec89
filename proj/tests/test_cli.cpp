// End-to-end tests that drive the compiled CLI binary the way a user would
// and assert on its files and exit codes.  HUT_CLI_PATH is injected by the
// build so the test always finds the matching binary.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "hut/checkpoint.hpp"
#include "hut/kernels.hpp"
#include "test_util.hpp"

#ifdef __unix__
#include <sys/wait.h>
#endif

using hut::testutil::read_file;
namespace fs = std::filesystem;

namespace {

const fs::path kScratch = fs::current_path() / "cli_scratch";

struct RunResult {
    int exit_code;
    std::string output;  // stdout + stderr
};

RunResult run_cli(const std::string& args, const std::string& env_prefix = "") {
    static int counter = 0;
    const fs::path log = kScratch / ("log" + std::to_string(counter++) + ".txt");
    fs::create_directories(kScratch);
    const std::string cmd = env_prefix + std::string(HUT_CLI_PATH) + " " + args + " > " +
                            log.string() + " 2>&1";
    const int raw = std::system(cmd.c_str());
#ifdef __unix__
    const int code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
#else
    const int code = raw;
#endif
    return {code, read_file(log.string())};
}

std::string out_dir(const char* name) { return (kScratch / name).string(); }

std::size_t count_lines(const std::string& s) {
    std::size_t n = 0;
    for (char c : s) {
        if (c == '\n') ++n;
    }
    return n;
}

}  // namespace

TEST_CASE("validate passes and the planted counter bug is caught") {
    const RunResult ok = run_cli("validate --out " + out_dir("v1"));
    INFO(ok.output);
    CHECK(ok.exit_code == 0);
    CHECK(ok.output.find("properties passed") != std::string::npos);
    CHECK(ok.output.find("[FAIL]") == std::string::npos);

    const RunResult bad =
        run_cli("validate --out " + out_dir("v2") + " --inject-counter-skew");
    CHECK(bad.exit_code != 0);
    CHECK(bad.output.find("[FAIL] flops-exactness") != std::string::npos);
}

TEST_CASE("cost table is reproducible byte for byte") {
    const std::string args = "flops --dims 4,8,16 --ranks 1,2 --batches 1,3 --seed 5";
    CHECK(run_cli(args + " --out " + out_dir("f1")).exit_code == 0);
    CHECK(run_cli(args + " --out " + out_dir("f2")).exit_code == 0);
    const std::string csv1 = read_file(out_dir("f1") + "/flops.csv");
    CHECK(csv1 == read_file(out_dir("f2") + "/flops.csv"));
    CHECK(csv1.rfind("method,N,d,k,r,theoretical,measured\n", 0) == 0);
    // 3 dims x 2 ranks x 2 batches x 3 methods + header
    CHECK(count_lines(csv1) == 37);
}

TEST_CASE("training runs are deterministic in every output byte") {
    const std::string base =
        "train --method hut --targets wq,wv --rank 2 --steps 8 --width 16 "
        "--seq-len 4 --train-size 8 --eval-size 4";
    CHECK(run_cli(base + " --seed 11 --out " + out_dir("t1")).exit_code == 0);
    CHECK(run_cli(base + " --seed 11 --out " + out_dir("t2")).exit_code == 0);
    CHECK(read_file(out_dir("t1") + "/loss.csv") == read_file(out_dir("t2") + "/loss.csv"));
    CHECK(read_file(out_dir("t1") + "/model.ckpt") ==
          read_file(out_dir("t2") + "/model.ckpt"));

    // a different seed must change the trajectory
    CHECK(run_cli(base + " --seed 12 --out " + out_dir("t3")).exit_code == 0);
    CHECK(read_file(out_dir("t1") + "/loss.csv") != read_file(out_dir("t3") + "/loss.csv"));
}

TEST_CASE("scalar and vectorized kernels produce identical training bytes") {
    if (hut::kernels::avx2_table() == nullptr) {
        MESSAGE("no vectorized path on this machine; nothing to compare");
        return;
    }
    const std::string args =
        "train --method hut --targets wv --rank 2 --steps 6 --width 12 "
        "--seq-len 4 --train-size 6 --eval-size 3 --seed 3";
    CHECK(run_cli(args + " --out " + out_dir("k1"), "HUT_KERNELS=scalar ").exit_code == 0);
    CHECK(run_cli(args + " --out " + out_dir("k2"), "HUT_KERNELS=avx2 ").exit_code == 0);
    CHECK(read_file(out_dir("k1") + "/loss.csv") == read_file(out_dir("k2") + "/loss.csv"));
    CHECK(read_file(out_dir("k1") + "/model.ckpt") ==
          read_file(out_dir("k2") + "/model.ckpt"));
}

TEST_CASE("flags override the config file") {
    fs::create_directories(kScratch);
    const fs::path cfg = kScratch / "exp.cfg";
    std::ofstream(cfg) << "method = hut\n"
                       << "targets = wv\n"
                       << "rank = 2\n"
                       << "steps = 5\n"
                       << "width = 12\n"
                       << "seq_len = 4\n"
                       << "train_size = 6\n"
                       << "eval_size = 3\n";
    const RunResult r = run_cli("train --config " + cfg.string() + " --steps 3 --out " +
                                out_dir("c1"));
    INFO(r.output);
    CHECK(r.exit_code == 0);
    // header plus exactly the three overridden steps
    CHECK(count_lines(read_file(out_dir("c1") + "/loss.csv")) == 4);
}

TEST_CASE("the saved checkpoint reloads and matches the run's config") {
    const RunResult r = run_cli(
        "train --method hut --targets wq --rank 2 --steps 4 --width 12 --seq-len 4 "
        "--train-size 6 --eval-size 3 --seed 21 --out " +
        out_dir("ck"));
    CHECK(r.exit_code == 0);
    const hut::Checkpoint ck = hut::load_checkpoint(out_dir("ck") + "/model.ckpt");
    CHECK(ck.seed == 21);
    REQUIRE(ck.tensors.size() == 4);  // ma, mb, gamma, beta of the one adapter
    CHECK(ck.tensors[0].first == "wq.ma");
    CHECK(ck.tensors[3].first == "wq.beta");
    bool saw_rank = false;
    for (const auto& [k, v] : ck.config) {
        if (k == "rank") {
            saw_rank = true;
            CHECK(v == "2");
        }
    }
    CHECK(saw_rank);
}

TEST_CASE("sweep results do not depend on the worker count") {
    const std::string args =
        "sweep targets --steps 5 --width 16 --seq-len 4 --train-size 6 --eval-size 3 "
        "--batch-size 2";
    const RunResult one = run_cli(args + " --jobs 1 --out " + out_dir("s1"));
    INFO(one.output);
    CHECK(one.exit_code == 0);
    CHECK(run_cli(args + " --jobs 4 --out " + out_dir("s2")).exit_code == 0);
    const std::string csv = read_file(out_dir("s1") + "/sweep_targets.csv");
    CHECK(csv == read_file(out_dir("s2") + "/sweep_targets.csv"));
    CHECK(count_lines(csv) == 9);  // header + the eight fixed rows
}

TEST_CASE("bad invocations fail loudly") {
    const RunResult bad_rank = run_cli("train --rank 0 --steps 2 --width 12 --out " +
                                       out_dir("e1"));
    CHECK(bad_rank.exit_code == 2);
    CHECK(bad_rank.output.find("rank") != std::string::npos);

    const RunResult bad_kind = run_cli("sweep sideways --out " + out_dir("e2"));
    CHECK(bad_kind.exit_code == 2);
    CHECK(bad_kind.output.find("sideways") != std::string::npos);

    const RunResult no_sub = run_cli("");
    CHECK(no_sub.exit_code != 0);
}
