#include "hut/flops.hpp"

#include <stdexcept>

namespace hut {

namespace {

struct ThreadTally {
    bool active = false;
    std::uint64_t count = 0;
};

thread_local ThreadTally g_tally;

}  // namespace

FlopScope::FlopScope() {
    if (g_tally.active) {
        throw std::logic_error(
            "FlopScope: a measurement scope is already active on this thread; "
            "nested scopes would double-count and are rejected");
    }
    g_tally.active = true;
    g_tally.count = 0;
}

FlopScope::~FlopScope() {
    g_tally.active = false;
}

std::uint64_t FlopScope::count() const {
    return g_tally.count;
}

namespace flops {

void add(std::uint64_t n) noexcept {
    if (g_tally.active) g_tally.count += n;
}

bool scope_active() noexcept {
    return g_tally.active;
}

}  // namespace flops
}  // namespace hut
