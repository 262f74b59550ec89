#include "hut/flops_model.hpp"

#include <stdexcept>

#include "hut/flops.hpp"
#include "hut/hut_adapter.hpp"
#include "hut/lora_adapter.hpp"
#include "hut/ops.hpp"
#include "hut/rng.hpp"

namespace hut {

namespace {

void check_dims(std::int64_t n, std::int64_t d, std::int64_t k, std::int64_t r) {
    if (n < 1 || d < 1 || k < 1 || r < 1 || r > d || r > k) {
        throw std::invalid_argument("flops model: need n,d,k >= 1 and 1 <= r <= min(d,k)");
    }
}

}  // namespace

std::int64_t flops_hut(std::int64_t n, std::int64_t d, std::int64_t k, std::int64_t r) {
    check_dims(n, d, k, r);
    return (2 * d - 1) * n * k + 4 * d * k + r * d + r * k;
}

std::int64_t flops_lora(std::int64_t n, std::int64_t d, std::int64_t k, std::int64_t r) {
    check_dims(n, d, k, r);
    return (2 * d - 1) * n * k + (2 * r + 1) * d * k;
}

std::int64_t flops_merged(std::int64_t n, std::int64_t d, std::int64_t k) {
    check_dims(n, d, k, 1);
    return (2 * d - 1) * n * k + n * k;
}

std::int64_t delta_flops(std::int64_t d, std::int64_t r) {
    check_dims(1, d, d, r);
    return 2 * r * d * d - 3 * d * d - 2 * r * d;
}

FlopsReport measure_forward_flops(const std::string& method, std::int64_t n, std::int64_t d,
                                  std::int64_t k, std::int64_t r, std::uint64_t seed) {
    check_dims(n, d, k, r);
    const auto nu = static_cast<std::size_t>(n);
    const auto du = static_cast<std::size_t>(d);
    const auto ku = static_cast<std::size_t>(k);
    const auto ru = static_cast<std::size_t>(r);

    const Matrix w0 = gaussian_matrix(du, ku, 0.0, 1.0, mix_seed(seed, 101));
    const Matrix x = gaussian_matrix(nu, du, 0.0, 1.0, mix_seed(seed, 102));

    FlopsReport rep;
    rep.method = method;
    rep.n = n;
    rep.d = d;
    rep.k = k;
    rep.r = r;

    if (method == "hut") {
        // Random (non-identity) state so the measured path does real work.
        HutAdapter st = hut_init(w0, ru, 0.3, mix_seed(seed, 103));
        seeded_fill(st.gamma, Dist::Gaussian, 1.0, 0.2, mix_seed(seed, 104));
        seeded_fill(st.beta, Dist::Gaussian, 0.0, 0.2, mix_seed(seed, 105));
        rep.theoretical = flops_hut(n, d, k, r);
        FlopScope scope;
        const Matrix y = matmul(x, hut_effective_weight(st));
        rep.measured = static_cast<std::int64_t>(scope.count());
        const Matrix h = add_row_vector(y, st.beta);
        rep.output_add = static_cast<std::int64_t>(scope.count()) - rep.measured;
        (void)h;
        return rep;
    }
    if (method == "lora") {
        LoraAdapter st = lora_init(w0, ru, 1.0, mix_seed(seed, 103));
        seeded_fill(st.wb, Dist::Gaussian, 0.0, 0.1, mix_seed(seed, 104));
        rep.theoretical = flops_lora(n, d, k, r);
        FlopScope scope;
        const Matrix y = matmul(x, lora_effective_weight(st));
        rep.measured = static_cast<std::int64_t>(scope.count());
        (void)y;
        return rep;
    }
    if (method == "merged") {
        HutAdapter st = hut_init(w0, ru, 0.3, mix_seed(seed, 103));
        const MergedLinear merged = hut_merge(st);
        rep.theoretical = flops_merged(n, d, k);
        FlopScope scope;
        const Matrix h = merged.forward(x);
        rep.measured = static_cast<std::int64_t>(scope.count());
        (void)h;
        return rep;
    }
    throw std::invalid_argument("measure_forward_flops: unknown method '" + method +
                                "' (want hut, lora or merged)");
}

std::string flops_csv_header() {
    return "method,N,d,k,r,theoretical,measured";
}

std::string flops_csv_row(const FlopsReport& rep) {
    return rep.method + "," + std::to_string(rep.n) + "," + std::to_string(rep.d) + "," +
           std::to_string(rep.k) + "," + std::to_string(rep.r) + "," +
           std::to_string(rep.theoretical) + "," + std::to_string(rep.measured);
}

}  // namespace hut
