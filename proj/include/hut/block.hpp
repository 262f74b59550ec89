#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hut/hut_adapter.hpp"
#include "hut/lora_adapter.hpp"
#include "hut/matrix.hpp"
#include "hut/merged_linear.hpp"

namespace hut {

// The six linear weights of the block, in canonical order.  This order is
// load-bearing: parameter registries, gradient vectors, checkpoints and CSV
// rows all enumerate targets in it.
enum class WeightTarget { Wq = 0, Wk, Wv, Wo, Wd, Wu };

inline constexpr std::array<WeightTarget, 6> kAllTargets = {
    WeightTarget::Wq, WeightTarget::Wk, WeightTarget::Wv,
    WeightTarget::Wo, WeightTarget::Wd, WeightTarget::Wu,
};

const char* target_name(WeightTarget t);                       // "wq" .. "wu"
std::optional<WeightTarget> parse_target(const std::string&);  // case-insensitive
std::string targets_to_csv(const std::vector<WeightTarget>& ts);
std::vector<WeightTarget> parse_targets_csv(const std::string& csv);  // throws on junk

enum class Method { None, Hut, Lora };
const char* method_name(Method m);

// Frozen base weights of a single-head block with model width d and FFN
// width f = 4d: Wq, Wk, Wv, Wo are d x d, Wd is d x f, Wu is f x d.
struct BlockWeights {
    std::size_t d = 0;
    std::size_t f = 0;
    std::array<Matrix, 6> w;

    // "Pretrained" stand-in: variance-scaled gaussian init (1/sqrt(fan-in)).
    static BlockWeights random(std::size_t d, std::uint64_t seed);

    const Matrix& get(WeightTarget t) const { return w[static_cast<std::size_t>(t)]; }
    Matrix& get(WeightTarget t) { return w[static_cast<std::size_t>(t)]; }
};

// Inputs the block caches during a traced forward so backward can run
// without recomputation.
struct BlockTrace {
    Matrix q, k, v;    // L x d
    Matrix p;          // L x L attention weights (post-softmax)
    Matrix z;          // L x d attention output
    Matrix a;          // L x d after Wo
    Matrix u;          // L x f pre-activation
    Matrix fs;         // L x f post-activation
    Matrix out;        // L x d
};

// Named mutable reference into a block's trainable tensors.
struct ParamRef {
    std::string name;  // e.g. "wq.ma", "wv.gamma", "wo.wa"
    Matrix* value;
};

// Single-head attention + FFN block over frozen base weights, with at most
// one adapter engaged per weight.  Forward:
//
//     q,k,v = layer(x;Wq), layer(x;Wk), layer(x;Wv)
//     z     = softmax(q kT / sqrt(d)) v
//     a     = layer(z;Wo)
//     out   = layer(silu(layer(a;Wd)); Wu)
//
// where layer(x;W) is x*W, or the adapted forward when an adapter is
// attached to W, and silu(u) = u * sigmoid(u) (smooth, so gradients exist
// everywhere).  Base weights are never written after construction; training
// touches only adapter tensors.
class TransformerBlock {
public:
    TransformerBlock() = default;
    explicit TransformerBlock(BlockWeights base) : base_(std::move(base)) {}

    const BlockWeights& base() const { return base_; }
    std::size_t width() const { return base_.d; }

    void attach_hut(WeightTarget t, std::size_t rank, double noise_std, std::uint64_t seed);
    void attach_lora(WeightTarget t, std::size_t rank, double s, std::uint64_t seed);
    void detach(WeightTarget t);
    void detach_all();
    Method method_at(WeightTarget t) const;

    const HutAdapter& hut_at(WeightTarget t) const;
    const LoraAdapter& lora_at(WeightTarget t) const;

    // Mutable access for optimizers and checkpoint restore.  Throws like the
    // const accessors when no adapter of that kind is attached.
    HutAdapter& hut_mut_at(WeightTarget t);
    LoraAdapter& lora_mut_at(WeightTarget t);

    // x is one sequence, L x d.
    Matrix forward(const Matrix& x) const;
    Matrix forward_traced(const Matrix& x, BlockTrace& trace) const;

    // Gradients of L = sum(d_out .* forward(x)) for every attached adapter,
    // flattened in registry order (see trainable_params).  `trace` must come
    // from forward_traced on the same x.
    std::vector<Matrix> backward(const Matrix& x, const BlockTrace& trace,
                                 const Matrix& d_out) const;

    // Trainable tensors in canonical order: targets in kAllTargets order,
    // then per adapter (ma, mb, gamma, beta) or (wa, wb).  backward() returns
    // gradients aligned index-for-index with this list.
    std::vector<ParamRef> trainable_params();
    std::size_t trainable_param_count() const;

    // Collapses every adapted layer to its merged dense form; unadapted
    // layers pass through with a zero bias.  The result has no trainable
    // state and matches the training-form forward to rounding error.
    struct Merged {
        BlockWeights weights;
        std::array<Matrix, 6> bias;
        Matrix forward(const Matrix& x) const;
    };
    Merged merged() const;

private:
    Matrix layer_forward(WeightTarget t, const Matrix& x) const;
    Matrix layer_input_grad(WeightTarget t, const Matrix& upstream) const;
    void layer_param_grads(WeightTarget t, const Matrix& x, const Matrix& upstream,
                           std::vector<Matrix>& sink) const;

    BlockWeights base_;
    std::array<std::optional<HutAdapter>, 6> hut_;
    std::array<std::optional<LoraAdapter>, 6> lora_;
};

// Row-wise numerically stable softmax (max-shifted), used by the block and
// the classification loss.
Matrix softmax_rows(const Matrix& m);

}  // namespace hut
