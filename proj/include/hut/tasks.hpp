#pragma once

#include <cstdint>
#include <vector>

#include "hut/block.hpp"
#include "hut/matrix.hpp"

namespace hut {

// Two desk-scale adaptation tasks.  Both start from the same premise: the
// student's frozen base weights are a copy of a teacher whose weights were
// then nudged, so a known nearby optimum exists and "how much of the gap the
// adapter closes" is a meaningful score.
//
//   Teacher: regress the block output onto the perturbed teacher's output
//            (mean squared error over all sequence entries).
//   Tokens:  per-token classification; labels come from the teacher's output
//            pushed through a fixed random readout, so the classes are
//            separable by a model that tracks the teacher.
enum class TaskKind { Teacher, Tokens };

const char* task_kind_name(TaskKind k);

struct TaskConfig {
    TaskKind kind = TaskKind::Teacher;
    std::size_t d = 32;        // model width; FFN width is always 4d
    std::size_t seq_len = 8;   // tokens per sequence
    std::size_t train_size = 64;
    std::size_t eval_size = 16;
    std::size_t classes = 4;   // Tokens only
    // Teacher weights are scaled entrywise by (1 + strength*u_i)(1 + strength*v_j)
    // on each perturbed target: a rank-one multiplicative nudge, exactly the
    // family of updates a multiplicative adapter can express.
    double perturb_strength = 0.25;
    std::vector<WeightTarget> perturb_targets = {WeightTarget::Wq, WeightTarget::Wv};
};

// Loss and output-gradient of one model output against one example.
struct LossGrad {
    double loss = 0.0;
    Matrix d_out;  // dLoss/d(model output), same shape as the output
};

class SyntheticTask {
public:
    SyntheticTask(const TaskConfig& cfg, std::uint64_t seed);

    const TaskConfig& config() const { return cfg_; }

    // Frozen starting point for the student (the unperturbed copy).
    const BlockWeights& student_base() const { return student_base_; }

    std::size_t train_count() const { return train_x_.size(); }
    std::size_t eval_count() const { return eval_x_.size(); }
    const Matrix& train_input(std::size_t i) const { return train_x_[i]; }
    const Matrix& eval_input(std::size_t i) const { return eval_x_[i]; }

    // Per-sequence loss (already averaged over tokens/entries) and gradient.
    LossGrad train_loss_grad(std::size_t i, const Matrix& model_out) const;
    double train_loss(std::size_t i, const Matrix& model_out) const;
    double eval_loss(std::size_t i, const Matrix& model_out) const;

    // Task score on one eval sequence: negative MSE for Teacher (higher is
    // better), fraction of correctly labeled tokens for Tokens.
    double eval_metric(std::size_t i, const Matrix& model_out) const;
    const char* metric_name() const;

private:
    Matrix make_inputs(std::uint64_t seed) const;
    double loss_only(const Matrix& target, const std::vector<int>& labels,
                     const Matrix& model_out) const;

    TaskConfig cfg_;
    BlockWeights student_base_;
    TransformerBlock teacher_;
    Matrix readout_;  // d x classes (Tokens only)
    std::vector<Matrix> train_x_, eval_x_;
    std::vector<Matrix> train_y_, eval_y_;                 // Teacher targets
    std::vector<std::vector<int>> train_lab_, eval_lab_;   // Tokens labels
};

}  // namespace hut
