#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hut/matrix.hpp"

namespace hut {

// On-disk training snapshot.  The format (docs/checkpoint-format.md) is a
// short ASCII header — magic+version, seed, sorted config key/value lines,
// a tensor manifest — followed by every tensor's values as raw little-endian
// IEEE-754 binary64, row-major, in manifest order.  Values travel as bytes,
// never through text, so save/load round-trips are bitwise exact.
struct Checkpoint {
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, std::string>> config;  // sorted by key on save
    std::vector<std::pair<std::string, Matrix>> tensors;      // manifest order
};

inline constexpr int kCheckpointVersion = 1;

// Throws std::runtime_error on I/O failure; config keys/values and tensor
// names must be non-empty and free of whitespace/newlines (validated).
void save_checkpoint(const Checkpoint& ck, const std::string& path);

// Throws std::runtime_error with a description of the first malformed line
// or size mismatch; refuses versions it does not know.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace hut
