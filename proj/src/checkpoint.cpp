#include "hut/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hut {

namespace {

constexpr char kMagic[] = "HUTCKPT";

void check_token(const std::string& s, const char* what) {
    if (s.empty()) throw std::runtime_error(std::string("checkpoint: empty ") + what);
    for (char c : s) {
        if (c == ' ' || c == '\n' || c == '\r' || c == '\t') {
            throw std::runtime_error(std::string("checkpoint: whitespace in ") + what + " '" +
                                     s + "'");
        }
    }
}

// Doubles are stored little-endian regardless of host order.
std::uint64_t to_le(double v) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    if constexpr (std::endian::native == std::endian::big) {
        bits = __builtin_bswap64(bits);
    }
    return bits;
}

double from_le(std::uint64_t bits) {
    if constexpr (std::endian::native == std::endian::big) {
        bits = __builtin_bswap64(bits);
    }
    return std::bit_cast<double>(bits);
}

}  // namespace

void save_checkpoint(const Checkpoint& ck, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("checkpoint: cannot open '" + path + "' for writing");

    auto config = ck.config;
    std::sort(config.begin(), config.end());

    out << kMagic << ' ' << kCheckpointVersion << '\n';
    out << "seed " << ck.seed << '\n';
    for (const auto& [key, value] : config) {
        check_token(key, "config key");
        check_token(value, "config value");
        out << "config " << key << ' ' << value << '\n';
    }
    out << "tensors " << ck.tensors.size() << '\n';
    for (const auto& [name, m] : ck.tensors) {
        check_token(name, "tensor name");
        out << "tensor " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
    }
    out << "data\n";
    for (const auto& [name, m] : ck.tensors) {
        for (double v : m.values()) {
            const std::uint64_t bits = to_le(v);
            char bytes[8];
            std::memcpy(bytes, &bits, 8);
            out.write(bytes, 8);
        }
    }
    if (!out) throw std::runtime_error("checkpoint: write to '" + path + "' failed");
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("checkpoint: cannot open '" + path + "'");

    auto fail = [&](const std::string& why) -> std::runtime_error {
        return std::runtime_error("checkpoint '" + path + "': " + why);
    };

    std::string line;
    if (!std::getline(in, line)) throw fail("missing header");
    {
        std::istringstream hdr(line);
        std::string magic;
        int version = -1;
        hdr >> magic >> version;
        if (magic != kMagic) throw fail("bad magic '" + magic + "'");
        if (version != kCheckpointVersion) {
            throw fail("unsupported version " + std::to_string(version));
        }
    }

    Checkpoint ck;
    if (!std::getline(in, line)) throw fail("missing seed line");
    {
        std::istringstream ls(line);
        std::string tag;
        ls >> tag >> ck.seed;
        if (tag != "seed" || ls.fail()) throw fail("malformed seed line '" + line + "'");
    }

    std::size_t tensor_count = 0;
    for (;;) {
        if (!std::getline(in, line)) throw fail("truncated header");
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "config") {
            std::string key, value;
            ls >> key >> value;
            if (key.empty() || value.empty()) throw fail("malformed config line '" + line + "'");
            ck.config.emplace_back(key, value);
            continue;
        }
        if (tag == "tensors") {
            ls >> tensor_count;
            if (ls.fail()) throw fail("malformed tensors line '" + line + "'");
            break;
        }
        throw fail("unexpected header line '" + line + "'");
    }

    std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> manifest;
    manifest.reserve(tensor_count);
    for (std::size_t i = 0; i < tensor_count; ++i) {
        if (!std::getline(in, line)) throw fail("truncated tensor manifest");
        std::istringstream ls(line);
        std::string tag, name;
        std::size_t rows = 0, cols = 0;
        ls >> tag >> name >> rows >> cols;
        if (tag != "tensor" || ls.fail() || rows < 1 || cols < 1) {
            throw fail("malformed tensor line '" + line + "'");
        }
        manifest.emplace_back(name, std::make_pair(rows, cols));
    }
    if (!std::getline(in, line) || line != "data") throw fail("missing data marker");

    for (const auto& [name, shape] : manifest) {
        Matrix m(shape.first, shape.second);
        for (std::size_t i = 0; i < m.size(); ++i) {
            char bytes[8];
            if (!in.read(bytes, 8)) {
                throw fail("tensor '" + name + "' truncated at value " + std::to_string(i));
            }
            std::uint64_t bits;
            std::memcpy(&bits, bytes, 8);
            m.mutable_data()[i] = from_le(bits);
        }
        ck.tensors.emplace_back(name, std::move(m));
    }
    char extra;
    if (in.read(&extra, 1)) throw fail("trailing bytes after last tensor");
    return ck;
}

}  // namespace hut
