#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wordorder {

// FNV-1a, used for file checksums, config hashes and the document-split hash.
// Not cryptographic; chosen for cross-platform determinism.
std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t fnv1a64(const void* data, std::size_t len,
                      std::uint64_t seed = 14695981039346656037ull);

// SplitMix64 step. Deterministic stateless mixer.
std::uint64_t splitmix64(std::uint64_t x);

// Map a 64-bit value to a double in [0, 1) using the top 53 bits.
double unit_double(std::uint64_t bits);

// Numerically stable sum (pairwise/tree reduction).
double pairwise_sum(std::span<const double> values);
double mean(std::span<const double> values);

// Shortest round-trip decimal form of a double ("1.5", "0.30000000000000004").
std::string format_double(double value);

// Warning sink. Defaults to stderr; replaceable for tests and embedding.
void set_warning_handler(std::function<void(const std::string&)> handler);
void warn(const std::string& message);
// Emits through warn() only the first time `key` is seen in this process.
void warn_once(const std::string& key, const std::string& message);

std::vector<std::string> split(std::string_view s, char sep);
std::string_view trim(std::string_view s);
bool parse_double(std::string_view s, double& out);
bool parse_int(std::string_view s, long long& out);

}  // namespace wordorder
