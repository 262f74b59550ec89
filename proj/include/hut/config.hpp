#pragma once

#include <map>
#include <string>

#include "hut/train.hpp"

namespace hut {

// Flat string key -> value map, the exchange format between config files,
// CLI flag overrides and checkpoint snapshots.
using ConfigMap = std::map<std::string, std::string>;

// Parses a key = value file: one pair per line, '#' starts a comment,
// blank lines ignored, keys case-insensitive.  Unknown keys are rejected
// here so typos fail loudly instead of silently using a default.
//
// Schema (defaults in parentheses):
//   method (hut)              hut | lora
//   targets (wq,wv)           comma- or plus-separated weight names
//   rank (8; 4 for tokens)    1 .. width
//   steps (500)               >= 1
//   batch_size (8)            >= 1
//   lr (0.02)                 > 0
//   weight_decay (0)          >= 0
//   noise_std (0.01)          >= 0
//   lora_scale (1)            >= 1
//   seed (42)                 uint64
//   task (teacher)            teacher | tokens
//   width (32)                model width d; FFN width is 4d
//   seq_len (8)               tokens per sequence
//   train_size (64), eval_size (16)
//   classes (4)               tokens task only
//   perturb_strength (0.25)   >= 0
//   perturb_targets (wq,wv)   teacher nudged on these weights
ConfigMap parse_config_file(const std::string& path);

// Later maps win key-by-key (used to let CLI flags override the file).
void merge_config(ConfigMap& base, const ConfigMap& overrides);

// Builds and validates a TrainConfig; throws std::invalid_argument naming
// the bad key and value.  All keys validated before anything runs.
TrainConfig make_train_config(const ConfigMap& kv);

// Full snapshot of a config as the same flat keys (machine-written form of
// the schema above); embedded into checkpoints.
ConfigMap train_config_to_map(const TrainConfig& cfg);

}  // namespace hut
