#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ctkit {

/// Thrown when an operation receives structurally invalid input
/// (dimension mismatches, violated preconditions).
class invalid_input : public std::invalid_argument {
public:
    explicit invalid_input(const std::string& what) : std::invalid_argument(what) {}
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw invalid_input(msg);
}

namespace detail {

// splitmix64; used to derive independent per-stage seeds from one master seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

} // namespace detail

/// Deterministically derive a sub-seed from a master seed and a stage tag.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stage) {
    std::uint64_t s = master ^ (0x517cc1b727220a95ull * (stage + 1));
    return detail::splitmix64(s);
}

} // namespace ctkit
