#pragma once

#include <string>

#include "mkvcyl/noise.hpp"

namespace mkvcyl {

// Little-endian binary dump: "MKVCYLP\0", u32 version, u64 K, M, N, f64 T,
// u64 seed, u32 generator, f64 H[K], f64 lambda[K], f64 fbm[M*K*(N+1)], f64 dW[M*K*N].
void write_paths(const CylindricalPathSet& paths, const std::string& file);
CylindricalPathSet read_paths(const std::string& file);

} // namespace mkvcyl
