#pragma once

#include <bit>
#include <cstdint>
#include <string>

namespace chernres {

// Basis monomials of forms on chart x simplex are bitmasks over the generators
// dz_1..dz_n, dzbar_1..dzbar_n, dt_1..dt_p, always read in increasing bit order.
using Mask = std::uint32_t;

inline int mask_degree(Mask m) { return std::popcount(m); }

inline Mask dz_bit(int i) { return Mask{1} << i; }
inline Mask dzbar_bit(int n, int i) { return Mask{1} << (n + i); }
inline Mask dt_bit(int n, int j) { return Mask{1} << (2 * n + j); }

inline Mask holo_part(Mask m, int n) { return m & ((Mask{1} << n) - 1); }
inline Mask antiholo_part(Mask m, int n) { return (m >> n) & ((Mask{1} << n) - 1); }
inline Mask simplex_part(Mask m, int n) { return m >> (2 * n); }

// Sign of a ∧ b relative to the canonical order of a|b; 0 when they overlap.
inline int wedge_sign(Mask a, Mask b) {
  if (a & b) return 0;
  int swaps = 0;
  Mask bb = b;
  while (bb) {
    const int k = std::countr_zero(bb);
    bb &= bb - 1;
    swaps += std::popcount(a >> (k + 1));
  }
  return (swaps & 1) ? -1 : 1;
}

inline std::string mask_to_string(Mask m, int n) {
  if (m == 0) return "1";
  std::string s;
  for (int k = 0; k < 32; ++k) {
    if (!(m >> k & 1)) continue;
    if (!s.empty()) s += "^";
    if (k < n)
      s += "dz" + std::to_string(k + 1);
    else if (k < 2 * n)
      s += "dzbar" + std::to_string(k - n + 1);
    else
      s += "dt" + std::to_string(k - 2 * n + 1);
  }
  return s;
}

}  // namespace chernres
