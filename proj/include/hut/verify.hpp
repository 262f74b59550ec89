#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hut/hut_adapter.hpp"
#include "hut/lora_adapter.hpp"
#include "hut/matrix.hpp"

namespace hut {

// Self-checking machinery: every analytic claim the library makes (gradient
// formulas, counter charges, merge equivalence, ...) has an executable
// property here that checks it against an independent oracle — central
// finite differences, brute-force materialized products, or exact integer
// formulas.  The CLI's `validate` subcommand runs the whole battery.

// Fully randomized adapter states (non-identity gamma/beta, nonzero low-rank
// factors) for equivalence and gradient testing.
HutAdapter random_hut_state(std::size_t d, std::size_t k, std::size_t r, std::uint64_t seed);
LoraAdapter random_lora_state(std::size_t d, std::size_t k, std::size_t r, double s,
                              std::uint64_t seed);

// Central-difference gradient check of the scalar probe loss
// L = sum(upstream .* forward(state, x)) against the analytic backward.
//
// Error metric: |analytic - fd| / max(|analytic|, |fd|, floor).  The floor
// (default 1e-2) makes near-zero entries compete against absolute error
// ~1e-7 instead of amplifying finite-difference noise; entries of ordinary
// magnitude are judged on genuine relative error.
struct GradCheckReport {
    double worst = 0.0;       // largest error over every trainable entry
    std::size_t checked = 0;  // entries compared
};

GradCheckReport gradcheck_hut(const HutAdapter& st, const Matrix& x, const Matrix& upstream,
                              double step = 1e-6, double floor = 1e-2);
GradCheckReport gradcheck_lora(const LoraAdapter& st, const Matrix& x, const Matrix& upstream,
                               double step = 1e-6, double floor = 1e-2);

// One validation property's outcome.
struct PropertyResult {
    std::string name;
    bool pass = false;
    std::string detail;  // one line: the measured numbers behind the verdict
};

struct ValidateOptions {
    std::uint64_t seed = 7;
    // Where the checkpoint round-trip property may write its temporary file.
    // Empty means the system temp directory.
    std::string scratch_dir;
    // Test fixture: deliberately report one extra operation in the FLOP
    // measurement property, proving a counting bug cannot slip through.
    bool inject_counter_skew = false;
};

// Runs every property; order is fixed and names are stable (scripts grep
// them).  All tolerances live here, next to the checks they gate.
std::vector<PropertyResult> run_validation(const ValidateOptions& opt);

// Sign table of the square-weight cost difference (additive minus
// multiplicative) for the given ranks over d in {8,16,...,1024}; used by the
// validate report.
std::string delta_flops_table(const std::vector<std::int64_t>& ranks);

}  // namespace hut
