#pragma once

#include <charconv>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mdiqkd {

// Thrown for invalid configuration, schema violations and malformed input
// files. The CLI maps it to exit code 2.
struct config_error : std::runtime_error {
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// splitmix64; used to derive independent stream seeds from a master seed.
std::uint64_t splitmix64(std::uint64_t x);

// Deterministic seed derivation for sub-streams (campaign cells, drift
// steps, resampling chunks).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

// Uniform double in [0,1) from a 64-bit hash state.
double hash_to_unit(std::uint64_t h);

// Gauss-Legendre nodes/weights on [-1, 1]. Nodes are symmetric, weights
// positive, sum of weights = 2.
struct Quadrature {
    std::vector<double> nodes;
    std::vector<double> weights;
};
Quadrature gauss_legendre(int n);

// Shortest round-trippable decimal representation (locale independent).
std::string format_double(double value);

// Locale-independent double parser; `context` names the field in errors.
double parse_double(std::string_view text, std::string_view context);

}  // namespace mdiqkd
