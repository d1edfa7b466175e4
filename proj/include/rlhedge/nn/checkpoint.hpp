#pragma once

// Binary network checkpoint, version 1 (all integers and floats little-endian):
//
//   char[8]  magic "RLHEDGE1"
//   u32      format version (1)
//   u32      output activation (0 identity, 1 logistic)
//   u64      number of layer widths L
//   u64[L]   layer widths
//   u64      parameter count P
//   f64[P]   flat parameter vector
//
// Hyperparameters and seeds travel in a JSON sidecar written next to it.

#include <iosfwd>
#include <string>

#include "rlhedge/nn/mlp.hpp"

namespace rlhedge::nn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

template <typename Real>
void write_mlp(std::ostream& out, const Mlp<Real>& net);

template <typename Real>
Mlp<Real> read_mlp(std::istream& in);

template <typename Real>
void save_mlp(const std::string& path, const Mlp<Real>& net);

template <typename Real>
Mlp<Real> load_mlp(const std::string& path);

}  // namespace rlhedge::nn
