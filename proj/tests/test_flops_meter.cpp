#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "hut/flops_model.hpp"
#include "test_util.hpp"

using namespace hut;

TEST_CASE("closed forms at hand-computed landmarks") {
    // d = k = 4, r = 2, one input row: both adapters cost exactly 108.
    CHECK(flops_hut(1, 4, 4, 2) == 108);
    CHECK(flops_lora(1, 4, 4, 2) == 108);

    // merged dense layer: matmul + bias add
    CHECK(flops_merged(1, 4, 4) == 7 * 4 + 4);

    // N = 2, d = k = 8, r = 2:
    //   multiplicative: (2*8-1)*2*8 + 4*8*8 + 2*8 + 2*8 = 240 + 256 + 32
    //   additive:       (2*8-1)*2*8 + (2*2+1)*8*8       = 240 + 320
    CHECK(flops_hut(2, 8, 8, 2) == 528);
    CHECK(flops_lora(2, 8, 8, 2) == 560);
}

TEST_CASE("cost delta is the lora-minus-hut difference and batch-independent") {
    for (std::int64_t d : {4, 8, 16, 64}) {
        for (std::int64_t r : {1, 2, 4}) {
            if (r > d) continue;
            const std::int64_t want = delta_flops(d, r);
            for (std::int64_t n : {1, 3, 17}) {
                CHECK(flops_lora(n, d, d, r) - flops_hut(n, d, d, r) == want);
            }
        }
    }
    CHECK(delta_flops(4, 1) == -24);
    CHECK(delta_flops(4, 2) == 0);
    CHECK(delta_flops(8, 2) == 32);
    // closed form 2rd^2 - 3d^2 - 2rd at d=1024, r=64 stays in range and positive
    CHECK(delta_flops(1024, 64) == 2 * 64 * 1024LL * 1024 - 3 * 1024LL * 1024 - 2 * 64 * 1024);
}

TEST_CASE("instrumented forwards land exactly on the formulas") {
    for (std::int64_t n : {1, 3}) {
        for (std::int64_t d : {4, 16}) {
            for (std::int64_t r : {1, 4}) {
                if (r > d) continue;
                const FlopsReport h = measure_forward_flops("hut", n, d, d, r, 7);
                CHECK(h.exact());
                CHECK(h.theoretical == flops_hut(n, d, d, r));
                CHECK(h.output_add == n * d);  // trailing shift add, outside the model

                const FlopsReport l = measure_forward_flops("lora", n, d, d, r, 7);
                CHECK(l.exact());
                CHECK(l.theoretical == flops_lora(n, d, d, r));
                CHECK(l.output_add == 0);  // no shift vector in this design

                const FlopsReport m = measure_forward_flops("merged", n, d, d, r, 7);
                CHECK(m.exact());
                CHECK(m.theoretical == flops_merged(n, d, d));
                CHECK(m.output_add == 0);  // bias add included in the deployment cost
            }
        }
    }
    CHECK_THROWS_AS(measure_forward_flops("mystery", 1, 4, 4, 1, 7), std::invalid_argument);
}

TEST_CASE("rectangular weights count correctly too") {
    const FlopsReport h = measure_forward_flops("hut", 2, 6, 10, 3, 9);
    CHECK(h.exact());
    CHECK(h.theoretical == (2 * 6 - 1) * 2 * 10 + 4 * 6 * 10 + 3 * 6 + 3 * 10);
    const FlopsReport l = measure_forward_flops("lora", 2, 6, 10, 3, 9);
    CHECK(l.exact());
    CHECK(l.theoretical == (2 * 6 - 1) * 2 * 10 + (2 * 3 + 1) * 6 * 10);
}

TEST_CASE("dimension guards") {
    CHECK_THROWS_AS(flops_hut(0, 4, 4, 1), std::invalid_argument);
    CHECK_THROWS_AS(flops_hut(1, 4, 4, 0), std::invalid_argument);
    CHECK_THROWS_AS(flops_hut(1, 4, 4, 5), std::invalid_argument);  // r > min(d,k)
    CHECK_THROWS_AS(flops_lora(1, 4, 2, 3), std::invalid_argument);
    CHECK_THROWS_AS(flops_merged(1, 0, 4), std::invalid_argument);
    CHECK_THROWS_AS(delta_flops(4, 5), std::invalid_argument);
}

TEST_CASE("csv rows are stable golden strings") {
    CHECK(flops_csv_header() == "method,N,d,k,r,theoretical,measured");
    const FlopsReport tie = measure_forward_flops("hut", 1, 4, 4, 2, 7);
    CHECK(flops_csv_row(tie) == "hut,1,4,4,2,108,108");
}
