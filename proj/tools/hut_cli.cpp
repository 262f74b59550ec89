// Command-line front end: `validate` runs the self-check battery, `flops`
// writes the operation-count comparison table, `train` runs one fine-tuning
// experiment, `sweep` runs the canned target/rank grids.  Everything the
// tool writes lands inside one output directory (--out, HUT_OUT_DIR, or
// ./out) and every byte of it is a pure function of the arguments, so runs
// can be diffed.

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hut/block.hpp"
#include "hut/checkpoint.hpp"
#include "hut/config.hpp"
#include "hut/flops_model.hpp"
#include "hut/kernels.hpp"
#include "hut/rng.hpp"
#include "hut/train.hpp"
#include "hut/verify.hpp"

namespace fs = std::filesystem;

namespace {

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
}

fs::path resolve_out_dir(const std::string& flag) {
    if (!flag.empty()) return fs::path(flag);
    if (const char* env = std::getenv("HUT_OUT_DIR"); env != nullptr && *env != '\0') {
        return fs::path(env);
    }
    return fs::path("out");
}

fs::path prepare_out_dir(const std::string& flag) {
    const fs::path dir = resolve_out_dir(flag);
    fs::create_directories(dir);
    return dir;
}

void write_text_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("cannot write " + path.string());
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

int run_validate(std::uint64_t seed, const std::string& out_flag, bool inject_skew) {
    hut::ValidateOptions opt;
    opt.seed = seed;
    opt.inject_counter_skew = inject_skew;
    opt.scratch_dir = prepare_out_dir(out_flag).string();

    const std::vector<hut::PropertyResult> results = hut::run_validation(opt);
    int failures = 0;
    for (const hut::PropertyResult& r : results) {
        std::printf("[%s] %-26s %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(),
                    r.detail.c_str());
        if (!r.pass) ++failures;
    }
    std::printf("\nforward-cost delta, additive minus multiplicative, square d x d weight\n");
    std::printf("(positive = multiplicative form is cheaper):\n%s",
                hut::delta_flops_table({1, 2, 4, 8}).c_str());
    std::printf("\nkernels: %s\n", hut::kernels::active().name);
    if (failures > 0) {
        std::printf("%d of %zu properties FAILED\n", failures, results.size());
        return 1;
    }
    std::printf("all %zu properties passed\n", results.size());
    return 0;
}

// ---------------------------------------------------------------------------
// flops
// ---------------------------------------------------------------------------

int run_flops(const std::string& out_flag, std::vector<std::int64_t> dims,
              std::vector<std::int64_t> ranks, std::vector<std::int64_t> batches,
              std::uint64_t seed) {
    if (dims.empty()) dims = {4, 8, 16, 32, 64, 128};
    if (ranks.empty()) ranks = {1, 2, 4, 8};
    if (batches.empty()) batches = {1, 4, 16};

    std::string csv = hut::flops_csv_header() + "\n";
    std::size_t rows = 0, mismatches = 0;
    for (std::int64_t n : batches) {
        for (std::int64_t d : dims) {
            for (std::int64_t r : ranks) {
                if (r > d) continue;
                for (const char* method : {"hut", "lora", "merged"}) {
                    const hut::FlopsReport rep = hut::measure_forward_flops(
                        method, n, d, d, r, hut::mix_seed(seed, rows));
                    csv += hut::flops_csv_row(rep) + "\n";
                    ++rows;
                    if (!rep.exact()) ++mismatches;
                }
            }
        }
    }
    const fs::path dir = prepare_out_dir(out_flag);
    write_text_file(dir / "flops.csv", csv);
    std::printf("wrote %zu measurements to %s\n", rows, (dir / "flops.csv").string().c_str());
    std::printf("counter vs closed-form formula: %zu mismatches\n", mismatches);
    std::printf("tie point: N=1 d=k=4 r=2 costs %" PRId64 " (multiplicative) vs %" PRId64
                " (additive)\n",
                hut::flops_hut(1, 4, 4, 2), hut::flops_lora(1, 4, 4, 2));
    return mismatches == 0 ? 0 : 1;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

void save_model_checkpoint(const hut::TrainConfig& cfg, hut::TrainRun& run,
                           const fs::path& path) {
    hut::Checkpoint ck;
    ck.seed = cfg.seed;
    for (const auto& [key, value] : hut::train_config_to_map(cfg)) {
        ck.config.emplace_back(key, value);
    }
    for (const hut::ParamRef& p : run.model.trainable_params()) {
        ck.tensors.emplace_back(p.name, *p.value);
    }
    hut::save_checkpoint(ck, path.string());
}

int run_train(const hut::ConfigMap& overrides, const std::string& config_path,
              const std::string& out_flag) {
    hut::ConfigMap kv;
    if (!config_path.empty()) kv = hut::parse_config_file(config_path);
    hut::merge_config(kv, overrides);
    const hut::TrainConfig cfg = hut::make_train_config(kv);

    hut::TrainRun run = hut::finetune(cfg);

    std::string csv = "step,loss\n";
    for (std::size_t i = 0; i < run.step_loss.size(); ++i) {
        csv += std::to_string(i) + "," + g17(run.step_loss[i]) + "\n";
    }
    const fs::path dir = prepare_out_dir(out_flag);
    write_text_file(dir / "loss.csv", csv);
    save_model_checkpoint(cfg, run, dir / "model.ckpt");

    std::printf("method            %s\n", hut::method_name(cfg.method));
    std::printf("targets           %s\n", hut::targets_to_csv(cfg.targets).c_str());
    std::printf("rank              %zu\n", cfg.rank);
    std::printf("trainable params  %zu\n", run.trainable_params);
    std::printf("train loss        %.6g -> %.6g (eval %.6g -> %.6g)\n",
                run.initial_train_loss, run.final_train_loss, run.initial_eval_loss,
                run.final_eval_loss);
    std::printf("%s   %.6g\n", run.metric_name.c_str(), run.eval_metric);
    std::printf("wrote %s and %s\n", (dir / "loss.csv").string().c_str(),
                (dir / "model.ckpt").string().c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

int run_sweep(const std::string& kind, const hut::ConfigMap& overrides,
              const std::string& out_flag, std::size_t jobs) {
    hut::ConfigMap kv;
    // Sweeps are meant to be quick scans; the full-length defaults of `train`
    // would multiply across every grid cell.
    kv["steps"] = "150";
    if (kind == "rank") kv["width"] = "64";
    hut::merge_config(kv, overrides);
    const hut::TrainConfig base = hut::make_train_config(kv);

    std::vector<hut::SweepRow> rows;
    if (kind == "targets") {
        rows = hut::sweep_targets(base, jobs);
    } else if (kind == "rank") {
        rows = hut::sweep_rank(base, jobs);
    } else {
        throw std::runtime_error("unknown sweep kind '" + kind + "' (targets|rank)");
    }

    std::string csv = hut::sweep_csv_header() + "\n";
    for (const hut::SweepRow& row : rows) csv += hut::sweep_csv_row(row) + "\n";

    const fs::path dir = prepare_out_dir(out_flag);
    const fs::path file = dir / ("sweep_" + kind + ".csv");
    write_text_file(file, csv);

    std::printf("%-14s %5s %8s %14s %14s %12s\n", "targets", "rank", "params", "train", "eval",
                base.task.kind == hut::TaskKind::Tokens ? "accuracy" : "neg_mse");
    for (const hut::SweepRow& row : rows) {
        std::printf("%-14s %5zu %8zu %14.6g %14.6g %12.6g\n", row.targets.c_str(), row.rank,
                    row.trainable_params, row.final_train_loss, row.final_eval_loss, row.metric);
    }
    std::printf("wrote %s\n", file.string().c_str());
    return 0;
}

// Registers presence-tracked string options whose names double as config-file
// keys, so flags override file values through the same parser.
void add_config_options(CLI::App* sub, std::map<std::string, std::string>& vals,
                        std::map<std::string, CLI::Option*>& opts,
                        const std::vector<std::pair<std::string, std::string>>& keys) {
    for (const auto& [key, help] : keys) {
        std::string flag = "--" + key;
        for (char& c : flag) {
            if (c == '_') c = '-';
        }
        opts[key] = sub->add_option(flag, vals[key], help);
    }
}

hut::ConfigMap collect_overrides(const std::map<std::string, std::string>& vals,
                                 const std::map<std::string, CLI::Option*>& opts) {
    hut::ConfigMap overrides;
    for (const auto& [key, opt] : opts) {
        if (opt->count() > 0) overrides[key] = vals.at(key);
    }
    return overrides;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multiplicative low-rank adapter workbench"};
    app.require_subcommand(1);

    // validate ---------------------------------------------------------------
    auto* validate = app.add_subcommand("validate", "run the self-check property battery");
    std::uint64_t v_seed = 7;
    std::string v_out;
    bool v_skew = false;
    validate->add_option("--seed", v_seed, "base seed for the randomized properties");
    validate->add_option("--out", v_out, "output directory (scratch space)");
    validate->add_flag("--inject-counter-skew", v_skew)->group("");

    // flops ------------------------------------------------------------------
    auto* flops = app.add_subcommand("flops", "measure forward costs and write flops.csv");
    std::string f_out;
    std::vector<std::int64_t> f_dims, f_ranks, f_batches;
    std::uint64_t f_seed = 7;
    flops->add_option("--out", f_out, "output directory");
    flops->add_option("--dims", f_dims, "square weight sizes d (default 4..128)")
        ->delimiter(',');
    flops->add_option("--ranks", f_ranks, "adapter ranks (default 1,2,4,8)")->delimiter(',');
    flops->add_option("--batches", f_batches, "input row counts N (default 1,4,16)")
        ->delimiter(',');
    flops->add_option("--seed", f_seed, "seed for the measured random states");

    // shared config-key options for train/sweep -------------------------------
    const std::vector<std::pair<std::string, std::string>> train_keys = {
        {"method", "adapter kind: hut | lora | none"},
        {"targets", "weights to adapt, e.g. wq,wv"},
        {"rank", "adapter rank"},
        {"steps", "optimizer steps"},
        {"batch_size", "sequences per step"},
        {"lr", "learning rate"},
        {"weight_decay", "decoupled weight decay"},
        {"noise_std", "init jitter of the multiplicative factors"},
        {"lora_scale", "scale s on the additive update"},
        {"seed", "experiment seed"},
        {"task", "synthetic task: teacher | tokens"},
        {"width", "model width d"},
        {"seq_len", "sequence length"},
        {"train_size", "training sequences"},
        {"eval_size", "held-out sequences"},
        {"classes", "token classes (tokens task)"},
        {"perturb_strength", "teacher nudge strength"},
        {"perturb_targets", "weights the teacher nudges"},
    };

    // train ------------------------------------------------------------------
    auto* train = app.add_subcommand("train", "run one fine-tuning experiment");
    std::string t_config, t_out;
    std::map<std::string, std::string> t_vals;
    std::map<std::string, CLI::Option*> t_opts;
    train->add_option("--config", t_config, "key = value config file")
        ->check(CLI::ExistingFile);
    train->add_option("--out", t_out, "output directory");
    add_config_options(train, t_vals, t_opts, train_keys);

    // sweep ------------------------------------------------------------------
    auto* sweep = app.add_subcommand("sweep", "run a canned grid: targets | rank");
    std::string s_kind, s_out;
    std::size_t s_jobs = 1;
    std::map<std::string, std::string> s_vals;
    std::map<std::string, CLI::Option*> s_opts;
    sweep->add_option("kind", s_kind, "targets | rank")->required();
    sweep->add_option("--out", s_out, "output directory");
    sweep->add_option("--jobs", s_jobs, "worker threads (result order is fixed)")
        ->check(CLI::Range(std::size_t{1}, std::size_t{64}));
    add_config_options(sweep, s_vals, s_opts, train_keys);

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate->parsed()) return run_validate(v_seed, v_out, v_skew);
        if (flops->parsed()) return run_flops(f_out, f_dims, f_ranks, f_batches, f_seed);
        if (train->parsed()) {
            return run_train(collect_overrides(t_vals, t_opts), t_config, t_out);
        }
        if (sweep->parsed()) {
            return run_sweep(s_kind, collect_overrides(s_vals, s_opts), s_out, s_jobs);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
