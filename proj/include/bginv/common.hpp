#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace bginv {

using json = nlohmann::json;

/// Every failure surfaced by the library is a bginv::Error; the CLI maps it
/// to a nonzero exit with the stage name attached.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// xorshift64* seeded through splitmix64. Portable and stable across
// compilers, unlike the std:: distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(splitmix(seed)) {
    if (state_ == 0) state_ = 0x9E3779B97F4A7C15ULL;
  }

  std::uint64_t next() {
    state_ ^= state_ >> 12;
    state_ ^= state_ << 25;
    state_ ^= state_ >> 27;
    return state_ * 0x2545F4914F6CDD1DULL;
  }

  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound) {
    // Lemire-style rejection keeps the draw unbiased.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x = next();
    while (x >= limit) x = next();
    return x % bound;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (no cached second value, so the stream
  /// consumed per call is fixed at two draws).
  double normal() {
    double u1 = uniform();
    const double u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  static std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
  }

 private:
  std::uint64_t state_;
};

/// FNV-1a; used to derive per-item seeds from string ids independent of
/// iteration order.
inline std::uint64_t stable_hash(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) {
  return Rng::splitmix(seed ^ stable_hash(tag));
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return Rng::splitmix(seed + 0x632BE59BD9B4E019ULL * (index + 1));
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error("write failed for '" + path + "'");
}

/// Parses line-delimited JSON objects. Blank lines are skipped; the callback
/// receives the 1-based line number for diagnostics.
template <typename Fn>
void for_each_jsonl(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error("line " + std::to_string(lineno) + ": malformed JSON (" + e.what() + ")");
    }
    if (!j.is_object()) throw Error("line " + std::to_string(lineno) + ": expected a JSON object");
    fn(j, lineno);
  }
}

template <typename Fn>
void for_each_jsonl_file(const std::string& path, Fn&& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  for_each_jsonl(in, std::forward<Fn>(fn));
}

inline std::string to_jsonl(const std::vector<json>& rows) {
  std::string out;
  for (const auto& r : rows) {
    out += r.dump();
    out += '\n';
  }
  return out;
}

/// File-name-safe rendering of an id: anything outside [A-Za-z0-9._-] -> '_'.
inline std::string sanitize_filename(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '.' ||
                    c == '_' || c == '-';
    if (!ok) c = '_';
  }
  return out;
}

}  // namespace bginv
