#include "hut/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <set>
#include <stdexcept>

namespace hut {

namespace {

const std::set<std::string> kKnownKeys = {
    "method",      "targets",    "rank",       "steps",      "batch_size",
    "lr",          "weight_decay", "noise_std", "lora_scale", "seed",
    "task",        "width",      "seq_len",    "train_size", "eval_size",
    "classes",     "perturb_strength", "perturb_targets",
};

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const std::string& want) {
    throw std::invalid_argument("config: " + key + " = '" + value + "' (" + want + ")");
}

std::size_t get_size(const ConfigMap& kv, const std::string& key, std::size_t fallback) {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    long long v = 0;
    std::size_t used = 0;
    try {
        v = std::stoll(it->second, &used);
    } catch (...) {
        bad_value(key, it->second, "want an integer");
    }
    if (used != it->second.size() || v < 0) {
        bad_value(key, it->second, "want a non-negative integer");
    }
    return static_cast<std::size_t>(v);
}

double get_double(const ConfigMap& kv, const std::string& key, double fallback) {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    double v = 0.0;
    std::size_t used = 0;
    try {
        v = std::stod(it->second, &used);
    } catch (...) {
        bad_value(key, it->second, "want a number");
    }
    if (used != it->second.size()) bad_value(key, it->second, "want a number");
    return v;
}

std::uint64_t get_u64(const ConfigMap& kv, const std::string& key, std::uint64_t fallback) {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    std::uint64_t v = 0;
    std::size_t used = 0;
    try {
        v = std::stoull(it->second, &used);
    } catch (...) {
        bad_value(key, it->second, "want an unsigned integer");
    }
    if (used != it->second.size()) bad_value(key, it->second, "want an unsigned integer");
    return v;
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
}

}  // namespace

ConfigMap parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
    ConfigMap kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config '" + path + "' line " + std::to_string(lineno) +
                                        ": expected key = value, got '" + stripped + "'");
        }
        const std::string key = lower(trim(stripped.substr(0, eq)));
        const std::string value = trim(stripped.substr(eq + 1));
        if (!kKnownKeys.count(key)) {
            throw std::invalid_argument("config '" + path + "' line " + std::to_string(lineno) +
                                        ": unknown key '" + key + "'");
        }
        if (value.empty()) {
            throw std::invalid_argument("config '" + path + "' line " + std::to_string(lineno) +
                                        ": empty value for '" + key + "'");
        }
        kv[key] = value;
    }
    return kv;
}

void merge_config(ConfigMap& base, const ConfigMap& overrides) {
    for (const auto& [k, v] : overrides) base[k] = v;
}

TrainConfig make_train_config(const ConfigMap& kv) {
    for (const auto& [k, v] : kv) {
        if (!kKnownKeys.count(k)) {
            throw std::invalid_argument("config: unknown key '" + k + "'");
        }
    }

    TrainConfig cfg;

    if (auto it = kv.find("method"); it != kv.end()) {
        const std::string m = lower(it->second);
        if (m == "hut") {
            cfg.method = Method::Hut;
        } else if (m == "lora") {
            cfg.method = Method::Lora;
        } else if (m == "none") {
            cfg.method = Method::None;  // frozen control: no adapters, no updates
        } else {
            bad_value("method", it->second, "want hut, lora or none");
        }
    }

    if (auto it = kv.find("task"); it != kv.end()) {
        const std::string t = lower(it->second);
        if (t == "teacher") {
            cfg.task.kind = TaskKind::Teacher;
        } else if (t == "tokens") {
            cfg.task.kind = TaskKind::Tokens;
        } else {
            bad_value("task", it->second, "want teacher or tokens");
        }
    }

    if (auto it = kv.find("targets"); it != kv.end()) {
        cfg.targets = parse_targets_csv(it->second);  // throws with the bad name;
        // empty ("none") is validated against the method below
    }
    if (auto it = kv.find("perturb_targets"); it != kv.end()) {
        cfg.task.perturb_targets = parse_targets_csv(it->second);
    }

    // The regression task defaults to rank 8; the classification-flavored
    // task to rank 4.  An explicit rank always wins.
    cfg.rank = get_size(kv, "rank", cfg.task.kind == TaskKind::Tokens ? 4 : 8);
    cfg.steps = get_size(kv, "steps", cfg.steps);
    cfg.batch_size = get_size(kv, "batch_size", cfg.batch_size);
    cfg.lr = get_double(kv, "lr", cfg.lr);
    cfg.weight_decay = get_double(kv, "weight_decay", cfg.weight_decay);
    cfg.noise_std = get_double(kv, "noise_std", cfg.noise_std);
    cfg.lora_scale = get_double(kv, "lora_scale", cfg.lora_scale);
    cfg.seed = get_u64(kv, "seed", cfg.seed);
    cfg.task.d = get_size(kv, "width", cfg.task.d);
    cfg.task.seq_len = get_size(kv, "seq_len", cfg.task.seq_len);
    cfg.task.train_size = get_size(kv, "train_size", cfg.task.train_size);
    cfg.task.eval_size = get_size(kv, "eval_size", cfg.task.eval_size);
    cfg.task.classes = get_size(kv, "classes", cfg.task.classes);
    cfg.task.perturb_strength = get_double(kv, "perturb_strength", cfg.task.perturb_strength);

    cfg.validate();  // range checks, named field on failure
    return cfg;
}

ConfigMap train_config_to_map(const TrainConfig& cfg) {
    ConfigMap kv;
    kv["method"] = method_name(cfg.method);
    kv["targets"] = targets_to_csv(cfg.targets);
    kv["rank"] = std::to_string(cfg.rank);
    kv["steps"] = std::to_string(cfg.steps);
    kv["batch_size"] = std::to_string(cfg.batch_size);
    kv["lr"] = fmt_double(cfg.lr);
    kv["weight_decay"] = fmt_double(cfg.weight_decay);
    kv["noise_std"] = fmt_double(cfg.noise_std);
    kv["lora_scale"] = fmt_double(cfg.lora_scale);
    kv["seed"] = std::to_string(cfg.seed);
    kv["task"] = task_kind_name(cfg.task.kind);
    kv["width"] = std::to_string(cfg.task.d);
    kv["seq_len"] = std::to_string(cfg.task.seq_len);
    kv["train_size"] = std::to_string(cfg.task.train_size);
    kv["eval_size"] = std::to_string(cfg.task.eval_size);
    kv["classes"] = std::to_string(cfg.task.classes);
    kv["perturb_strength"] = fmt_double(cfg.task.perturb_strength);
    kv["perturb_targets"] = targets_to_csv(cfg.task.perturb_targets);
    return kv;
}

}  // namespace hut
