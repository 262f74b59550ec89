#include "hut/block.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

#include "hut/ops.hpp"
#include "hut/rng.hpp"

namespace hut {

namespace {

constexpr std::array<const char*, 6> kTargetNames = {"wq", "wk", "wv", "wo", "wd", "wu"};

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

Matrix silu(const Matrix& u) {
    Matrix out(u.rows(), u.cols());
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double v = u.values()[i];
        out.mutable_data()[i] = v * sigmoid(v);
    }
    return out;
}

// d/du of u*sigmoid(u): sig(u) * (1 + u*(1 - sig(u)))
Matrix silu_grad(const Matrix& u) {
    Matrix out(u.rows(), u.cols());
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double v = u.values()[i];
        const double s = sigmoid(v);
        out.mutable_data()[i] = s * (1.0 + v * (1.0 - s));
    }
    return out;
}

std::size_t idx(WeightTarget t) { return static_cast<std::size_t>(t); }

}  // namespace

const char* target_name(WeightTarget t) { return kTargetNames[idx(t)]; }

std::optional<WeightTarget> parse_target(const std::string& s) {
    std::string low;
    low.reserve(s.size());
    for (char c : s) low.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    for (WeightTarget t : kAllTargets) {
        if (low == kTargetNames[idx(t)]) return t;
    }
    return std::nullopt;
}

std::string targets_to_csv(const std::vector<WeightTarget>& ts) {
    if (ts.empty()) return "none";
    std::string out;
    for (WeightTarget t : ts) {
        if (!out.empty()) out.push_back('+');
        out += target_name(t);
    }
    return out;
}

std::vector<WeightTarget> parse_targets_csv(const std::string& csv) {
    std::vector<WeightTarget> out;
    {
        std::string low;
        for (char c : csv) {
            if (c != ' ') low.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
        if (low == "none") return out;  // the frozen-control spelling
    }
    std::string token;
    auto flush = [&] {
        if (token.empty()) return;
        auto t = parse_target(token);
        if (!t) {
            throw std::invalid_argument("targets: unknown weight '" + token +
                                        "' (want wq, wk, wv, wo, wd or wu)");
        }
        if (std::find(out.begin(), out.end(), *t) != out.end()) {
            throw std::invalid_argument("targets: duplicate weight '" + token + "'");
        }
        out.push_back(*t);
        token.clear();
    };
    for (char c : csv) {
        if (c == ',' || c == '+' || c == ' ') {
            flush();
        } else {
            token.push_back(c);
        }
    }
    flush();
    // Canonical order regardless of how the user spelled the list.
    std::sort(out.begin(), out.end());
    return out;
}

const char* method_name(Method m) {
    switch (m) {
        case Method::None: return "none";
        case Method::Hut: return "hut";
        case Method::Lora: return "lora";
    }
    return "?";
}

BlockWeights BlockWeights::random(std::size_t d, std::uint64_t seed) {
    if (d < 1) throw std::invalid_argument("BlockWeights: width must be >= 1");
    BlockWeights bw;
    bw.d = d;
    bw.f = 4 * d;
    const double sd = 1.0 / std::sqrt(static_cast<double>(d));
    const double sf = 1.0 / std::sqrt(static_cast<double>(bw.f));
    bw.get(WeightTarget::Wq) = gaussian_matrix(d, d, 0.0, sd, mix_seed(seed, 10));
    bw.get(WeightTarget::Wk) = gaussian_matrix(d, d, 0.0, sd, mix_seed(seed, 11));
    bw.get(WeightTarget::Wv) = gaussian_matrix(d, d, 0.0, sd, mix_seed(seed, 12));
    bw.get(WeightTarget::Wo) = gaussian_matrix(d, d, 0.0, sd, mix_seed(seed, 13));
    bw.get(WeightTarget::Wd) = gaussian_matrix(d, bw.f, 0.0, sd, mix_seed(seed, 14));
    bw.get(WeightTarget::Wu) = gaussian_matrix(bw.f, d, 0.0, sf, mix_seed(seed, 15));
    return bw;
}

void TransformerBlock::attach_hut(WeightTarget t, std::size_t rank, double noise_std,
                                  std::uint64_t seed) {
    if (method_at(t) != Method::None) {
        throw std::logic_error(std::string("attach_hut: ") + target_name(t) +
                               " already has an adapter");
    }
    hut_[idx(t)] = hut_init(base_.get(t), rank, noise_std, seed);
}

void TransformerBlock::attach_lora(WeightTarget t, std::size_t rank, double s,
                                   std::uint64_t seed) {
    if (method_at(t) != Method::None) {
        throw std::logic_error(std::string("attach_lora: ") + target_name(t) +
                               " already has an adapter");
    }
    lora_[idx(t)] = lora_init(base_.get(t), rank, s, seed);
}

void TransformerBlock::detach(WeightTarget t) {
    hut_[idx(t)].reset();
    lora_[idx(t)].reset();
}

void TransformerBlock::detach_all() {
    for (WeightTarget t : kAllTargets) detach(t);
}

Method TransformerBlock::method_at(WeightTarget t) const {
    if (hut_[idx(t)].has_value()) return Method::Hut;
    if (lora_[idx(t)].has_value()) return Method::Lora;
    return Method::None;
}

const HutAdapter& TransformerBlock::hut_at(WeightTarget t) const {
    if (!hut_[idx(t)]) throw std::logic_error("hut_at: no adapter on that weight");
    return *hut_[idx(t)];
}

const LoraAdapter& TransformerBlock::lora_at(WeightTarget t) const {
    if (!lora_[idx(t)]) throw std::logic_error("lora_at: no adapter on that weight");
    return *lora_[idx(t)];
}

HutAdapter& TransformerBlock::hut_mut_at(WeightTarget t) {
    if (!hut_[idx(t)]) throw std::logic_error("hut_mut_at: no adapter on that weight");
    return *hut_[idx(t)];
}

LoraAdapter& TransformerBlock::lora_mut_at(WeightTarget t) {
    if (!lora_[idx(t)]) throw std::logic_error("lora_mut_at: no adapter on that weight");
    return *lora_[idx(t)];
}

Matrix TransformerBlock::layer_forward(WeightTarget t, const Matrix& x) const {
    if (hut_[idx(t)]) return hut_forward(*hut_[idx(t)], x);
    if (lora_[idx(t)]) return lora_forward(*lora_[idx(t)], x);
    return matmul(x, base_.get(t));
}

Matrix TransformerBlock::layer_input_grad(WeightTarget t, const Matrix& upstream) const {
    if (hut_[idx(t)]) return hut_input_grad(*hut_[idx(t)], upstream);
    if (lora_[idx(t)]) return lora_input_grad(*lora_[idx(t)], upstream);
    return matmul(upstream, transpose(base_.get(t)));
}

void TransformerBlock::layer_param_grads(WeightTarget t, const Matrix& x,
                                         const Matrix& upstream,
                                         std::vector<Matrix>& sink) const {
    if (hut_[idx(t)]) {
        HutGradients g = hut_backward(*hut_[idx(t)], x, upstream);
        sink.push_back(std::move(g.ma));
        sink.push_back(std::move(g.mb));
        sink.push_back(std::move(g.gamma));
        sink.push_back(std::move(g.beta));
    } else if (lora_[idx(t)]) {
        LoraGradients g = lora_backward(*lora_[idx(t)], x, upstream);
        sink.push_back(std::move(g.wa));
        sink.push_back(std::move(g.wb));
    }
}

Matrix TransformerBlock::forward(const Matrix& x) const {
    BlockTrace scratch;
    return forward_traced(x, scratch);
}

Matrix TransformerBlock::forward_traced(const Matrix& x, BlockTrace& tr) const {
    if (x.cols() != base_.d) {
        throw ShapeError("block forward: x " + x.shape_str() + " vs width " +
                         std::to_string(base_.d));
    }
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(base_.d));
    tr.q = layer_forward(WeightTarget::Wq, x);
    tr.k = layer_forward(WeightTarget::Wk, x);
    tr.v = layer_forward(WeightTarget::Wv, x);
    tr.p = softmax_rows(scale(matmul(tr.q, transpose(tr.k)), inv_sqrt_d));
    tr.z = matmul(tr.p, tr.v);
    tr.a = layer_forward(WeightTarget::Wo, tr.z);
    tr.u = layer_forward(WeightTarget::Wd, tr.a);
    tr.fs = silu(tr.u);
    tr.out = layer_forward(WeightTarget::Wu, tr.fs);
    return tr.out;
}

std::vector<Matrix> TransformerBlock::backward(const Matrix& x, const BlockTrace& tr,
                                               const Matrix& d_out) const {
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(base_.d));

    // FFN tail, walked back to the attention output.
    const Matrix d_fs = layer_input_grad(WeightTarget::Wu, d_out);
    const Matrix d_u = hadamard(d_fs, silu_grad(tr.u));
    const Matrix d_a = layer_input_grad(WeightTarget::Wd, d_u);
    const Matrix d_z = layer_input_grad(WeightTarget::Wo, d_a);

    // Attention core: z = p v, p = softmax(s), s = q kT / sqrt(d).
    const Matrix d_p = matmul(d_z, transpose(tr.v));
    const Matrix d_v = matmul(transpose(tr.p), d_z);
    // Row-wise softmax jacobian: ds = p .* (dp - rowsum(dp .* p)).
    Matrix d_s(d_p.rows(), d_p.cols());
    for (std::size_t i = 0; i < d_p.rows(); ++i) {
        double dot = 0.0;
        for (std::size_t j = 0; j < d_p.cols(); ++j) dot += d_p.at(i, j) * tr.p.at(i, j);
        for (std::size_t j = 0; j < d_p.cols(); ++j) {
            d_s.at(i, j) = tr.p.at(i, j) * (d_p.at(i, j) - dot);
        }
    }
    const Matrix d_q = scale(matmul(d_s, tr.k), inv_sqrt_d);
    const Matrix d_k = scale(matmul(transpose(d_s), tr.q), inv_sqrt_d);

    // Parameter gradients, in registry order (kAllTargets).
    std::vector<Matrix> grads;
    layer_param_grads(WeightTarget::Wq, x, d_q, grads);
    layer_param_grads(WeightTarget::Wk, x, d_k, grads);
    layer_param_grads(WeightTarget::Wv, x, d_v, grads);
    layer_param_grads(WeightTarget::Wo, tr.z, d_a, grads);
    layer_param_grads(WeightTarget::Wd, tr.a, d_u, grads);
    layer_param_grads(WeightTarget::Wu, tr.fs, d_out, grads);
    return grads;
}

std::vector<ParamRef> TransformerBlock::trainable_params() {
    std::vector<ParamRef> refs;
    for (WeightTarget t : kAllTargets) {
        const std::string base = target_name(t);
        if (hut_[idx(t)]) {
            HutAdapter& a = *hut_[idx(t)];
            refs.push_back({base + ".ma", &a.ma});
            refs.push_back({base + ".mb", &a.mb});
            refs.push_back({base + ".gamma", &a.gamma});
            refs.push_back({base + ".beta", &a.beta});
        } else if (lora_[idx(t)]) {
            LoraAdapter& a = *lora_[idx(t)];
            refs.push_back({base + ".wa", &a.wa});
            refs.push_back({base + ".wb", &a.wb});
        }
    }
    return refs;
}

std::size_t TransformerBlock::trainable_param_count() const {
    std::size_t n = 0;
    for (WeightTarget t : kAllTargets) {
        if (hut_[idx(t)]) {
            const HutAdapter& a = *hut_[idx(t)];
            n += a.ma.size() + a.mb.size() + a.gamma.size() + a.beta.size();
        } else if (lora_[idx(t)]) {
            const LoraAdapter& a = *lora_[idx(t)];
            n += a.wa.size() + a.wb.size();
        }
    }
    return n;
}

TransformerBlock::Merged TransformerBlock::merged() const {
    Merged m;
    m.weights = base_;
    for (WeightTarget t : kAllTargets) {
        const std::size_t i = idx(t);
        if (hut_[i]) {
            MergedLinear ml = hut_merge(*hut_[i]);
            m.weights.get(t) = std::move(ml.weight);
            m.bias[i] = std::move(ml.bias);
        } else if (lora_[i]) {
            MergedLinear ml = lora_merge(*lora_[i]);
            m.weights.get(t) = std::move(ml.weight);
            m.bias[i] = std::move(ml.bias);
        } else {
            m.bias[i] = Matrix::zeros(1, base_.get(t).cols());
        }
    }
    return m;
}

Matrix TransformerBlock::Merged::forward(const Matrix& x) const {
    auto layer = [&](WeightTarget t, const Matrix& in) {
        return add_row_vector(matmul(in, weights.get(t)), bias[idx(t)]);
    };
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(weights.d));
    const Matrix q = layer(WeightTarget::Wq, x);
    const Matrix k = layer(WeightTarget::Wk, x);
    const Matrix v = layer(WeightTarget::Wv, x);
    const Matrix p = softmax_rows(scale(matmul(q, transpose(k)), inv_sqrt_d));
    const Matrix z = matmul(p, v);
    const Matrix a = layer(WeightTarget::Wo, z);
    const Matrix u = layer(WeightTarget::Wd, a);
    return layer(WeightTarget::Wu, silu(u));
}

Matrix softmax_rows(const Matrix& m) {
    Matrix out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double mx = m.at(i, 0);
        for (std::size_t j = 1; j < m.cols(); ++j) mx = std::max(mx, m.at(i, j));
        double sum = 0.0;
        for (std::size_t j = 0; j < m.cols(); ++j) {
            const double e = std::exp(m.at(i, j) - mx);
            out.at(i, j) = e;
            sum += e;
        }
        for (std::size_t j = 0; j < m.cols(); ++j) out.at(i, j) /= sum;
    }
    return out;
}

}  // namespace hut
