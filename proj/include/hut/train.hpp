#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hut/adamw.hpp"
#include "hut/block.hpp"
#include "hut/tasks.hpp"

namespace hut {

// Everything one training run needs.  Field-for-field serializable to the
// flat key=value config format (see config.hpp), which is also how a run's
// configuration is snapshotted into checkpoints.
struct TrainConfig {
    Method method = Method::Hut;  // Method::None trains nothing (frozen control)
    std::vector<WeightTarget> targets = {WeightTarget::Wq, WeightTarget::Wv};
    std::size_t rank = 8;
    std::size_t steps = 500;
    std::size_t batch_size = 8;
    double lr = 0.02;
    double weight_decay = 0.0;
    double noise_std = 0.01;  // identity-breaking jitter for the multiplicative adapter
    double lora_scale = 1.0;
    std::uint64_t seed = 42;
    TaskConfig task;

    // Throws std::invalid_argument naming the offending field.
    void validate() const;
};

struct TrainRun {
    std::vector<double> step_loss;  // batch loss per optimizer step
    double initial_train_loss = 0.0;  // full train split, before any update
    double final_train_loss = 0.0;    // full train split, after the last step
    double initial_eval_loss = 0.0;
    double final_eval_loss = 0.0;
    double eval_metric = 0.0;       // task metric averaged over the eval split
    std::string metric_name;
    std::size_t trainable_params = 0;
    TransformerBlock model;         // final adapted state
};

// Attaches the configured adapters to the task's frozen base, runs
// steps x AdamW over deterministic batches, and reports the loss trajectory.
// Base weights are bitwise untouched throughout (asserted in tests).
TrainRun finetune(const TrainConfig& cfg);

// Mean full-split losses for an arbitrary block against a task.
double dataset_train_loss(const SyntheticTask& task, const TransformerBlock& model);
double dataset_eval_loss(const SyntheticTask& task, const TransformerBlock& model);

// One row of a sweep table.
struct SweepRow {
    std::size_t index = 0;  // position in the sweep's fixed grid
    std::string targets;    // "wq+wv" style
    std::size_t rank = 0;
    std::size_t trainable_params = 0;
    double final_train_loss = 0.0;
    double final_eval_loss = 0.0;
    double metric = 0.0;
};

// Weight-type ablation at a fixed parameter budget: the eight classic
// target/rank pairings (each single attention weight at r=16, the Wq+Wk and
// Wq+Wv pairs at r=8, Wq+Wk+Wv at r=4, all four attention weights at r=2).
// Needs task width >= 16.
std::vector<SweepRow> sweep_targets(const TrainConfig& base, std::size_t jobs);

// Rank sensitivity: {Wv}, {Wq,Wv} and {Wq,Wk,Wv,Wo} crossed with
// r in {1,2,4,8,64} - 15 runs.  Needs task width >= 64.
std::vector<SweepRow> sweep_rank(const TrainConfig& base, std::size_t jobs);

// CSV emission for sweep tables; rows come out sorted by index, so files are
// byte-stable for a fixed (config, seed).
std::string sweep_csv_header();
std::string sweep_csv_row(const SweepRow& row);

}  // namespace hut
