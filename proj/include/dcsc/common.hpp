#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace dcsc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user-supplied parameter; the message names the violated constraint.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Problem too large for the dense reference path.
class CapacityError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

/// The cut-off dichotomy ran out of iterations.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double last_lambda, double last_estimate)
      : Error(what), last_lambda_(last_lambda), last_estimate_(last_estimate) {}
  double last_lambda() const { return last_lambda_; }
  double last_estimate() const { return last_estimate_; }

 private:
  double last_lambda_;
  double last_estimate_;
};

// ---------------------------------------------------------------------------
// Seeding. Every random consumer gets its own engine seeded from a
// (master seed, stream id) pair so results never depend on draw order across
// independent consumers or on thread scheduling.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

/// Well-known stream ids so unrelated consumers of one master seed never collide.
namespace stream {
inline constexpr std::uint64_t graph = 0x01;
inline constexpr std::uint64_t perturb_edges = 0x02;
inline constexpr std::uint64_t perturb_nodes = 0x03;
inline constexpr std::uint64_t signals = 0x10;
inline constexpr std::uint64_t kmeans = 0x20;
inline constexpr std::uint64_t selection = 0x30;
inline constexpr std::uint64_t step = 0x40;
inline constexpr std::uint64_t replication = 0x50;
}  // namespace stream

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream_id) {
  return Rng(derive_seed(seed, stream_id));
}

}  // namespace dcsc
