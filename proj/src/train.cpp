#include "hut/train.hpp"

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cstdio>
#include <random>
#include <stdexcept>
#include <thread>

#include "hut/ops.hpp"
#include "hut/rng.hpp"

namespace hut {

void TrainConfig::validate() const {
    if (method != Method::None && targets.empty()) {
        throw std::invalid_argument("config: targets must name at least one weight");
    }
    if (rank < 1) throw std::invalid_argument("config: rank must be >= 1");
    if (rank > task.d) {
        throw std::invalid_argument("config: rank " + std::to_string(rank) +
                                    " exceeds model width " + std::to_string(task.d));
    }
    if (steps < 1) throw std::invalid_argument("config: steps must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("config: batch_size must be >= 1");
    if (lr <= 0.0) throw std::invalid_argument("config: lr must be positive");
    if (weight_decay < 0.0) throw std::invalid_argument("config: weight_decay must be >= 0");
    if (noise_std < 0.0) throw std::invalid_argument("config: noise_std must be >= 0");
    if (lora_scale < 1.0) throw std::invalid_argument("config: lora_scale must be >= 1");
    if (task.perturb_strength < 0.0) {
        throw std::invalid_argument("config: perturb_strength must be >= 0");
    }
}

namespace {

void attach_adapters(TransformerBlock& model, const TrainConfig& cfg) {
    for (std::size_t i = 0; i < cfg.targets.size(); ++i) {
        const WeightTarget t = cfg.targets[i];
        const std::uint64_t seed = mix_seed(cfg.seed, 500 + i);
        if (cfg.method == Method::Hut) {
            model.attach_hut(t, cfg.rank, cfg.noise_std, seed);
        } else if (cfg.method == Method::Lora) {
            model.attach_lora(t, cfg.rank, cfg.lora_scale, seed);
        }
    }
}

void accumulate(std::vector<Matrix>& into, const std::vector<Matrix>& g) {
    if (into.empty()) {
        into = g;
        return;
    }
    for (std::size_t i = 0; i < into.size(); ++i) into[i] = add(into[i], g[i]);
}

}  // namespace

double dataset_train_loss(const SyntheticTask& task, const TransformerBlock& model) {
    double total = 0.0;
    for (std::size_t i = 0; i < task.train_count(); ++i) {
        total += task.train_loss(i, model.forward(task.train_input(i)));
    }
    return total / static_cast<double>(task.train_count());
}

double dataset_eval_loss(const SyntheticTask& task, const TransformerBlock& model) {
    double total = 0.0;
    for (std::size_t i = 0; i < task.eval_count(); ++i) {
        total += task.eval_loss(i, model.forward(task.eval_input(i)));
    }
    return total / static_cast<double>(task.eval_count());
}

TrainRun finetune(const TrainConfig& cfg) {
    cfg.validate();
    const SyntheticTask task(cfg.task, mix_seed(cfg.seed, 1));

    TrainRun run;
    run.model = TransformerBlock(task.student_base());
    attach_adapters(run.model, cfg);
    run.trainable_params = run.model.trainable_param_count();
    run.metric_name = task.metric_name();

    run.initial_train_loss = dataset_train_loss(task, run.model);
    run.initial_eval_loss = dataset_eval_loss(task, run.model);

    AdamWConfig ocfg;
    ocfg.lr = cfg.lr;
    ocfg.weight_decay = cfg.weight_decay;
    AdamW opt(ocfg);

    std::vector<ParamRef> refs = run.model.trainable_params();
    std::vector<Matrix*> params;
    params.reserve(refs.size());
    for (ParamRef& r : refs) params.push_back(r.value);

    // Deterministic batch sampling: one PRNG stream drives index selection
    // for the whole run, so a (config, seed) pair always sees the same data
    // order regardless of platform or thread count.
    std::mt19937_64 sampler(mix_seed(cfg.seed, 2));
    std::uniform_int_distribution<std::size_t> pick(0, task.train_count() - 1);

    run.step_loss.reserve(cfg.steps);
    const double inv_batch = 1.0 / static_cast<double>(cfg.batch_size);
    for (std::size_t step = 0; step < cfg.steps; ++step) {
        double batch_loss = 0.0;
        std::vector<Matrix> grad_sum;
        for (std::size_t b = 0; b < cfg.batch_size; ++b) {
            const std::size_t i = pick(sampler);
            const Matrix& x = task.train_input(i);
            BlockTrace trace;
            const Matrix out = run.model.forward_traced(x, trace);
            LossGrad lg = task.train_loss_grad(i, out);
            batch_loss += lg.loss;
            if (!params.empty()) {
                accumulate(grad_sum, run.model.backward(x, trace, lg.d_out));
            }
        }
        run.step_loss.push_back(batch_loss * inv_batch);
        if (!params.empty()) {
            for (Matrix& g : grad_sum) g = scale(g, inv_batch);
            opt.step(params, grad_sum);
        }
    }

    run.final_train_loss = dataset_train_loss(task, run.model);
    run.final_eval_loss = dataset_eval_loss(task, run.model);

    double metric = 0.0;
    for (std::size_t i = 0; i < task.eval_count(); ++i) {
        metric += task.eval_metric(i, run.model.forward(task.eval_input(i)));
    }
    run.eval_metric = metric / static_cast<double>(task.eval_count());
    return run;
}

namespace {

struct SweepCell {
    std::vector<WeightTarget> targets;
    std::size_t rank;
};

std::vector<SweepRow> run_sweep(const TrainConfig& base, const std::vector<SweepCell>& cells,
                                std::size_t jobs) {
    std::vector<SweepRow> rows(cells.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) return;
            TrainConfig cfg = base;
            cfg.targets = cells[i].targets;
            cfg.rank = cells[i].rank;
            const TrainRun run = finetune(cfg);
            rows[i] = SweepRow{i,
                               targets_to_csv(cells[i].targets),
                               cells[i].rank,
                               run.trainable_params,
                               run.final_train_loss,
                               run.final_eval_loss,
                               run.eval_metric};
        }
    };
    const std::size_t n_threads = std::max<std::size_t>(1, std::min(jobs, cells.size()));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (std::thread& th : pool) th.join();
    }
    // rows[] is already index-ordered; completion order does not matter.
    return rows;
}

}  // namespace

std::vector<SweepRow> sweep_targets(const TrainConfig& base, std::size_t jobs) {
    if (base.task.d < 16) {
        throw std::invalid_argument("sweep targets: model width must be >= 16 to fit r=16");
    }
    using WT = WeightTarget;
    const std::vector<SweepCell> cells = {
        {{WT::Wq}, 16},
        {{WT::Wk}, 16},
        {{WT::Wv}, 16},
        {{WT::Wo}, 16},
        {{WT::Wq, WT::Wk}, 8},
        {{WT::Wq, WT::Wv}, 8},
        {{WT::Wq, WT::Wk, WT::Wv}, 4},
        {{WT::Wq, WT::Wk, WT::Wv, WT::Wo}, 2},
    };
    return run_sweep(base, cells, jobs);
}

std::vector<SweepRow> sweep_rank(const TrainConfig& base, std::size_t jobs) {
    if (base.task.d < 64) {
        throw std::invalid_argument("sweep rank: model width must be >= 64 to fit r=64");
    }
    using WT = WeightTarget;
    const std::vector<std::vector<WT>> sets = {
        {WT::Wv},
        {WT::Wq, WT::Wv},
        {WT::Wq, WT::Wk, WT::Wv, WT::Wo},
    };
    const std::vector<std::size_t> ranks = {1, 2, 4, 8, 64};
    std::vector<SweepCell> cells;
    cells.reserve(sets.size() * ranks.size());
    for (const auto& s : sets) {
        for (std::size_t r : ranks) cells.push_back({s, r});
    }
    return run_sweep(base, cells, jobs);
}

std::string sweep_csv_header() {
    return "row,targets,rank,trainable_params,final_train_loss,final_eval_loss,metric";
}

std::string sweep_csv_row(const SweepRow& row) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%zu,%s,%zu,%zu,%.17g,%.17g,%.17g", row.index,
                  row.targets.c_str(), row.rank, row.trainable_params, row.final_train_loss,
                  row.final_eval_loss, row.metric);
    return std::string(buf);
}

}  // namespace hut
