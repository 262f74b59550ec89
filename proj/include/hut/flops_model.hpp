#pragma once

#include <cstdint>
#include <string>

#include "hut/matrix.hpp"

namespace hut {

// Closed-form per-forward FLOP counts for one adapted layer processing N
// rows through a d x k weight at rank r, under the convention in flops.hpp.
// All arithmetic is exact 64-bit integer; these are the numbers the
// instrumented runs must reproduce to the operation.

// Multiplicative adapter, reduced path: (2d-1)Nk for the matmul, 4dk to
// assemble the effective weight (outer product, two Hadamard passes, gamma
// row-broadcast), rd + rk for the two rank-direction means.  The trailing
// beta row-add is not part of this figure; measurements report it separately.
std::int64_t flops_hut(std::int64_t n, std::int64_t d, std::int64_t k, std::int64_t r);

// Additive low-rank adapter, weight-side evaluation: (2d-1)Nk for the matmul
// plus (2r+1)dk to assemble W0 + s*(WA WB).
std::int64_t flops_lora(std::int64_t n, std::int64_t d, std::int64_t k, std::int64_t r);

// Collapsed deployment layer: one matmul plus the bias row-add,
// (2d-1)Nk + Nk.  Rank-independent by construction.
std::int64_t flops_merged(std::int64_t n, std::int64_t d, std::int64_t k);

// flops_lora - flops_hut for a square d x d weight; the N-dependent matmul
// terms cancel, leaving 2rd^2 - 3d^2 - 2rd.  Positive means the
// multiplicative adapter is cheaper.  Sign landmarks: negative at (d=4,r=1),
// exactly zero at (d=4,r=2), positive for all d >= 8 with 2 <= r <= d/4.
std::int64_t delta_flops(std::int64_t d, std::int64_t r);

// One instrumented forward measurement against the matching formula.
struct FlopsReport {
    std::string method;  // "hut" | "lora" | "merged"
    std::int64_t n = 0, d = 0, k = 0, r = 0;
    std::int64_t theoretical = 0;
    std::int64_t measured = 0;
    // Trailing output-vector add measured outside `measured` (beta add for
    // "hut"; always 0 for "lora", which has no bias; folded into `measured`
    // for "merged", where the bias add is part of the deployment cost).
    std::int64_t output_add = 0;

    bool exact() const { return measured == theoretical; }
};

// Builds a randomly initialized adapter of the given shape, runs one forward
// over a random x [n x d] inside a fresh counter scope, and reports the
// tally next to the formula.  `method` is "hut", "lora" or "merged"
// ("merged" collapses a rank-r multiplicative adapter first, so its report
// keeps r for provenance even though the cost is rank-free).
FlopsReport measure_forward_flops(const std::string& method, std::int64_t n, std::int64_t d,
                                  std::int64_t k, std::int64_t r, std::uint64_t seed);

// CSV row in the stable column order "method,N,d,k,r,theoretical,measured".
std::string flops_csv_header();
std::string flops_csv_row(const FlopsReport& rep);

}  // namespace hut
