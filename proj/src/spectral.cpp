#include "hvortex/spectral.hpp"

#include <stdexcept>

namespace hv {

int next_pow2(int n) {
    int k = 1;
    while (k < n) k *= 2;
    return k;
}

void fft_pow2(std::vector<cx>& v, bool inverse) {
    const size_t n = v.size();
    if (n == 0 || (n & (n - 1)) != 0)
        throw std::invalid_argument("fft_pow2: size must be a power of two");
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(v[i], v[j]);
    }
    for (size_t len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? 2.0 : -2.0) * pi / static_cast<double>(len);
        const cx wl = std::polar(1.0, ang);
        for (size_t i = 0; i < n; i += len) {
            cx w = 1.0;
            for (size_t k = 0; k < len / 2; ++k) {
                cx u = v[i + k];
                cx t = w * v[i + k + len / 2];
                v[i + k] = u + t;
                v[i + k + len / 2] = u - t;
                w *= wl;
            }
        }
    }
}

std::vector<cx> fft_samples(const Trace& a, int K) {
    const int width = a.empty() ? 0 : a.hi() - a.lo() + 1;
    if (K < width) throw std::invalid_argument("fft_samples: grid narrower than the support");
    std::vector<cx> bins(static_cast<size_t>(K), cx{});
    for (int j = a.lo(); j <= a.hi(); ++j) {
        int b = ((j % K) + K) % K;
        bins[static_cast<size_t>(b)] += a.coeff(j);
    }
    fft_pow2(bins, true);
    return bins;
}

Trace trace_from_fft(std::vector<cx> samples, int lo, int hi) {
    const int K = static_cast<int>(samples.size());
    if (hi - lo + 1 > K) throw std::invalid_argument("trace_from_fft: window wider than the grid");
    fft_pow2(samples, false);
    std::vector<cx> c(static_cast<size_t>(hi - lo + 1));
    for (int j = lo; j <= hi; ++j) {
        int b = ((j % K) + K) % K;
        c[static_cast<size_t>(j - lo)] = samples[static_cast<size_t>(b)] / static_cast<double>(K);
    }
    Trace out;
    out.reset(lo, std::move(c), 0.0);
    out.trim();
    return out;
}

}  // namespace hv
