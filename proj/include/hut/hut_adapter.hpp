#pragma once

#include <cstdint>

#include "hut/matrix.hpp"
#include "hut/merged_linear.hpp"

namespace hut {

// Multiplicative adapter around a frozen dense weight W0 [d x k].
//
// Two thin trainable matrices, MA [d x r] and MB [r x k], modulate W0
// entrywise through their row/column means:
//
//     a = row_mean(MA)              (d x 1)
//     b = col_mean(MB)              (1 x k)
//     W_updated = (a bT) .* W0      (rank-1 multiplicative update)
//
// and a per-output-column affine pair (gamma, beta) scales and shifts the
// layer output:
//
//     h = gamma .* (x W_updated) + beta
//
// Because the modulation is a Hadamard product, the whole adapter folds into
// a single dense weight after training (see hut_merge) and inference pays no
// extra latency over the base layer.
//
// The state is exclusively owned during a training step: forward, backward
// and the optimizer update never run concurrently on one adapter.  Nothing
// is cached between calls; W_updated is recomputed from the current MA/MB on
// every use so there is no stale-derived-state hazard.
struct HutAdapter {
    Matrix w0;     // frozen, d x k
    Matrix ma;     // trainable, d x r
    Matrix mb;     // trainable, r x k
    Matrix gamma;  // trainable, 1 x k
    Matrix beta;   // trainable, 1 x k

    std::size_t rank() const { return ma.cols(); }
};

struct HutGradients {
    Matrix ma;     // d x r
    Matrix mb;     // r x k
    Matrix gamma;  // 1 x k
    Matrix beta;   // 1 x k
};

// Identity-preserving initialization: MA and MB start at all-ones plus
// gaussian(0, noise_std) jitter, gamma at ones, beta at zeros.  With
// noise_std = 0 the adapted layer reproduces the frozen layer exactly;
// the small default jitter (see TrainConfig) merely breaks symmetry.
// Requires 1 <= rank <= min(d, k) and noise_std >= 0.
HutAdapter hut_init(const Matrix& w0, std::size_t rank, double noise_std, std::uint64_t seed);

// W_updated = (row_mean(MA) col_mean(MB)T) .* W0, a d x k matrix.  Entries of
// W0 that are zero stay exactly zero: the adapter can rescale but never
// repopulate the base weight's sparsity pattern.
Matrix hut_updated_weight(const HutAdapter& st);

// gamma .* (row_mean(MA) col_mean(MB)T) .* W0 — the single dense weight the
// layer collapses to once gamma is folded in.  Built as outer product, two
// Hadamard passes and a row-broadcast of gamma: 4dk + rd + rk operations on
// the FLOP counter, plus nothing else.
Matrix hut_effective_weight(const HutAdapter& st);

// Training-form forward: scale_shift(x W_updated, gamma, beta).
Matrix hut_forward(const HutAdapter& st, const Matrix& x);

// Algebraically identical forward that folds gamma into the weight first:
// x hut_effective_weight(st) + beta.  Matches hut_forward to ~1e-10 relative
// (the two paths round differently), and is the path the FLOP meter runs.
Matrix hut_forward_reduced(const HutAdapter& st, const Matrix& x);

// Collapses the adapter into a MergedLinear (weight = effective weight,
// bias = beta).  merged.forward(x) == hut_forward(st, x) up to rounding.
MergedLinear hut_merge(const HutAdapter& st);

// Gradients of L = sum(upstream .* hut_forward(st, x)) with respect to the
// four trainable tensors.  Every column of dMA is the same d-vector da/r
// (each MA entry enters only through its row mean); likewise each row of
// dMB is db/r.
HutGradients hut_backward(const HutAdapter& st, const Matrix& x, const Matrix& upstream);

// Gradient with respect to the layer input x: (upstream .* gamma) W_updatedT.
// Needed when the adapted layer sits below other layers in a block.
Matrix hut_input_grad(const HutAdapter& st, const Matrix& upstream);

}  // namespace hut
