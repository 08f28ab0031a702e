#pragma once

#include "hvortex/trace.hpp"

namespace hv {

int next_pow2(int n);

// In-place iterative radix-2 transform; v.size() must be a power of two.
// forward: X_k = sum_n x_n e^{-2 pi i n k / K}; inverse uses e^{+...} and
// applies no 1/K scaling.
void fft_pow2(std::vector<cx>& v, bool inverse);

// Values of the trace at the K-th roots of unity, K a power of two at least
// the support width (coefficients are binned mod K, so a narrower grid would
// alias the input).
std::vector<cx> fft_samples(const Trace& a, int K);

// Trace with support window [lo, hi] recovered from samples at the roots of
// unity.  Indices congruent mod K alias onto each other, so the grid must be
// comfortably wider than the window plus the tail of the sampled function.
Trace trace_from_fft(std::vector<cx> samples, int lo, int hi);

}  // namespace hv
