#include "hut/tasks.hpp"

#include <cmath>
#include <stdexcept>

#include "hut/ops.hpp"
#include "hut/rng.hpp"

namespace hut {

namespace {

// Entrywise W .* (1 + strength*u)(1 + strength*v)T with standard-normal u, v.
Matrix rank_one_nudge(const Matrix& w, double strength, std::uint64_t seed) {
    Matrix u = gaussian_matrix(w.rows(), 1, 0.0, 1.0, mix_seed(seed, 1));
    Matrix v = gaussian_matrix(1, w.cols(), 0.0, 1.0, mix_seed(seed, 2));
    for (std::size_t i = 0; i < u.size(); ++i) {
        u.mutable_data()[i] = 1.0 + strength * u.mutable_data()[i];
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
        v.mutable_data()[i] = 1.0 + strength * v.mutable_data()[i];
    }
    return hadamard(outer(u, v), w);
}

}  // namespace

const char* task_kind_name(TaskKind k) {
    return k == TaskKind::Teacher ? "teacher" : "tokens";
}

SyntheticTask::SyntheticTask(const TaskConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
    if (cfg.d < 1 || cfg.seq_len < 1 || cfg.train_size < 1 || cfg.eval_size < 1) {
        throw std::invalid_argument("SyntheticTask: dimensions and split sizes must be >= 1");
    }
    if (cfg.kind == TaskKind::Tokens && cfg.classes < 2) {
        throw std::invalid_argument("SyntheticTask: token task needs >= 2 classes");
    }

    student_base_ = BlockWeights::random(cfg.d, mix_seed(seed, 1000));

    // The teacher starts from the student's exact weights, then each
    // perturbed target is nudged.  Everything the student cannot reach
    // through its adapters is the irreducible part of the gap.
    BlockWeights teacher_w = student_base_;
    for (WeightTarget t : cfg.perturb_targets) {
        teacher_w.get(t) = rank_one_nudge(teacher_w.get(t), cfg.perturb_strength,
                                          mix_seed(seed, 2000 + static_cast<std::uint64_t>(t)));
    }
    teacher_ = TransformerBlock(std::move(teacher_w));

    if (cfg.kind == TaskKind::Tokens) {
        readout_ = gaussian_matrix(cfg.d, cfg.classes, 0.0, 1.0, mix_seed(seed, 3000));
    }

    // Disjoint train/eval inputs from separate seed streams.
    auto gen_split = [&](std::size_t count, std::uint64_t stream, std::vector<Matrix>& xs,
                         std::vector<Matrix>& ys, std::vector<std::vector<int>>& labs) {
        xs.reserve(count);
        for (std::size_t i = 0; i < count; ++i) {
            Matrix x = gaussian_matrix(cfg.seq_len, cfg.d, 0.0, 1.0,
                                       mix_seed(seed, stream + i));
            Matrix y = teacher_.forward(x);
            if (cfg.kind == TaskKind::Tokens) {
                const Matrix logits = matmul(y, readout_);
                std::vector<int> lab(cfg.seq_len, 0);
                for (std::size_t t = 0; t < cfg.seq_len; ++t) {
                    int best = 0;
                    for (std::size_t c = 1; c < cfg.classes; ++c) {
                        if (logits.at(t, c) > logits.at(t, best)) best = static_cast<int>(c);
                    }
                    lab[t] = best;
                }
                labs.push_back(std::move(lab));
            }
            xs.push_back(std::move(x));
            ys.push_back(std::move(y));
        }
    };
    gen_split(cfg.train_size, 10000, train_x_, train_y_, train_lab_);
    gen_split(cfg.eval_size, 20000, eval_x_, eval_y_, eval_lab_);
}

double SyntheticTask::loss_only(const Matrix& target, const std::vector<int>& labels,
                                const Matrix& model_out) const {
    if (cfg_.kind == TaskKind::Teacher) {
        const Matrix diff = sub(model_out, target);
        double acc = 0.0;
        for (double v : diff.values()) acc += v * v;
        return acc / static_cast<double>(diff.size());
    }
    const Matrix logits = matmul(model_out, readout_);
    const Matrix p = softmax_rows(logits);
    double loss = 0.0;
    for (std::size_t t = 0; t < cfg_.seq_len; ++t) {
        loss -= std::log(std::max(p.at(t, static_cast<std::size_t>(labels[t])), 1e-300));
    }
    return loss / static_cast<double>(cfg_.seq_len);
}

LossGrad SyntheticTask::train_loss_grad(std::size_t i, const Matrix& model_out) const {
    const Matrix& x = train_x_.at(i);
    require_shape(model_out, x.rows(), cfg_.d, "train_loss_grad model_out");
    LossGrad lg;
    if (cfg_.kind == TaskKind::Teacher) {
        const Matrix diff = sub(model_out, train_y_[i]);
        lg.loss = 0.0;
        for (double v : diff.values()) lg.loss += v * v;
        const double inv = 1.0 / static_cast<double>(diff.size());
        lg.loss *= inv;
        lg.d_out = scale(diff, 2.0 * inv);
        return lg;
    }
    const std::vector<int>& labels = train_lab_[i];
    const Matrix logits = matmul(model_out, readout_);
    const Matrix p = softmax_rows(logits);
    Matrix d_logits = p;
    lg.loss = 0.0;
    const double inv_t = 1.0 / static_cast<double>(cfg_.seq_len);
    for (std::size_t t = 0; t < cfg_.seq_len; ++t) {
        const auto c = static_cast<std::size_t>(labels[t]);
        lg.loss -= std::log(std::max(p.at(t, c), 1e-300));
        d_logits.at(t, c) -= 1.0;
    }
    lg.loss *= inv_t;
    lg.d_out = matmul(scale(d_logits, inv_t), transpose(readout_));
    return lg;
}

double SyntheticTask::train_loss(std::size_t i, const Matrix& model_out) const {
    return loss_only(train_y_.at(i), cfg_.kind == TaskKind::Tokens ? train_lab_.at(i)
                                                                   : std::vector<int>{},
                     model_out);
}

double SyntheticTask::eval_loss(std::size_t i, const Matrix& model_out) const {
    return loss_only(eval_y_.at(i), cfg_.kind == TaskKind::Tokens ? eval_lab_.at(i)
                                                                  : std::vector<int>{},
                     model_out);
}

double SyntheticTask::eval_metric(std::size_t i, const Matrix& model_out) const {
    if (cfg_.kind == TaskKind::Teacher) {
        return -eval_loss(i, model_out);
    }
    const std::vector<int>& labels = eval_lab_.at(i);
    const Matrix logits = matmul(model_out, readout_);
    std::size_t hit = 0;
    for (std::size_t t = 0; t < cfg_.seq_len; ++t) {
        int best = 0;
        for (std::size_t c = 1; c < cfg_.classes; ++c) {
            if (logits.at(t, c) > logits.at(t, best)) best = static_cast<int>(c);
        }
        if (best == labels[t]) ++hit;
    }
    return static_cast<double>(hit) / static_cast<double>(cfg_.seq_len);
}

const char* SyntheticTask::metric_name() const {
    return cfg_.kind == TaskKind::Teacher ? "neg_mse" : "token_accuracy";
}

}  // namespace hut
