#include "hvortex/trace.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

namespace hv {

Trace Trace::monomial(int n, cx c) {
    Trace t;
    t.lo_ = n;
    t.c_.assign(1, c);
    return t;
}

cx Trace::coeff(int n) const {
    if (empty() || n < lo_ || n > hi()) return {};
    return c_[static_cast<size_t>(n - lo_)];
}

void Trace::ensure(int n) {
    if (empty()) {
        lo_ = n;
        c_.assign(1, cx{});
        return;
    }
    if (n < lo_) {
        c_.insert(c_.begin(), static_cast<size_t>(lo_ - n), cx{});
        lo_ = n;
    } else if (n > hi()) {
        c_.resize(static_cast<size_t>(n - lo_) + 1, cx{});
    }
}

void Trace::set_coeff(int n, cx v) {
    ensure(n);
    c_[static_cast<size_t>(n - lo_)] = v;
}

void Trace::add_coeff(int n, cx v) {
    ensure(n);
    c_[static_cast<size_t>(n - lo_)] += v;
}

void Trace::reset(int lo, std::vector<cx> c, double loss) {
    lo_ = lo;
    c_ = std::move(c);
    loss_ = loss;
}

void Trace::trim() {
    size_t b = 0, e = c_.size();
    while (b < e && c_[b] == cx{}) ++b;
    while (e > b && c_[e - 1] == cx{}) --e;
    if (b == e) {
        lo_ = 0;
        c_.clear();
        return;
    }
    if (b > 0 || e < c_.size()) {
        c_ = std::vector<cx>(c_.begin() + static_cast<long>(b), c_.begin() + static_cast<long>(e));
        lo_ += static_cast<int>(b);
    }
}

Trace operator+(const Trace& a, const Trace& b) {
    if (a.empty()) {
        Trace r = b;
        r.add_loss(a.loss());
        return r;
    }
    if (b.empty()) {
        Trace r = a;
        r.add_loss(b.loss());
        return r;
    }
    int lo = std::min(a.lo(), b.lo());
    int hi = std::max(a.hi(), b.hi());
    std::vector<cx> c(static_cast<size_t>(hi - lo) + 1, cx{});
    for (int n = a.lo(); n <= a.hi(); ++n) c[static_cast<size_t>(n - lo)] += a.coeff(n);
    for (int n = b.lo(); n <= b.hi(); ++n) c[static_cast<size_t>(n - lo)] += b.coeff(n);
    Trace r;
    r.reset(lo, std::move(c), a.loss() + b.loss());
    return r;
}

Trace operator-(const Trace& a) { return cx(-1.0, 0.0) * a; }

Trace operator-(const Trace& a, const Trace& b) { return a + (-b); }

Trace operator*(cx s, const Trace& a) {
    Trace r = a;
    for (auto& v : r.data()) v *= s;
    return r;
}

void conv_serial(const std::vector<cx>& a, const std::vector<cx>& b, std::vector<cx>& out) {
    out.assign(a.size() + b.size() - 1, cx{});
    for (size_t i = 0; i < a.size(); ++i) {
        const cx ai = a[i];
        if (ai == cx{}) continue;
        for (size_t j = 0; j < b.size(); ++j) out[i + j] += ai * b[j];
    }
}

void conv_parallel(const std::vector<cx>& a, const std::vector<cx>& b, std::vector<cx>& out) {
    const long n = static_cast<long>(a.size() + b.size() - 1);
    out.assign(static_cast<size_t>(n), cx{});
#pragma omp parallel for schedule(static)
    for (long k = 0; k < n; ++k) {
        const long ia_lo = std::max<long>(0, k - static_cast<long>(b.size()) + 1);
        const long ia_hi = std::min<long>(static_cast<long>(a.size()) - 1, k);
        cx s{};
        for (long i = ia_lo; i <= ia_hi; ++i) s += a[static_cast<size_t>(i)] * b[static_cast<size_t>(k - i)];
        out[static_cast<size_t>(k)] = s;
    }
}

Trace product(const Trace& a, const Trace& b, int cap) {
    Trace r;
    if (a.empty() || b.empty()) {
        r.add_loss(a.loss() + b.loss());
        return r;
    }
    std::vector<cx> c;
    // Both kernels are exact; pick by cost.  The serial kernel skips zero
    // rows of its first operand, which matters for lattice-sparse traces, so
    // the sparser side goes outer.
    auto nnz = [](const std::vector<cx>& v) {
        size_t k = 0;
        for (const auto& x : v)
            if (x != cx{}) ++k;
        return k;
    };
    const size_t cost_ab = nnz(a.data()) * b.data().size();
    const size_t cost_ba = nnz(b.data()) * a.data().size();
    const size_t cost = std::min(cost_ab, cost_ba);
    if (cost >= 1u << 22)
        conv_parallel(a.data(), b.data(), c);
    else if (cost_ab <= cost_ba)
        conv_serial(a.data(), b.data(), c);
    else
        conv_serial(b.data(), a.data(), c);
    int lo = a.lo() + b.lo();
    double loss = a.loss() + b.loss();
    if (cap != kNoCap) {
        int hi = lo + static_cast<int>(c.size()) - 1;
        int keep_lo = std::max(lo, -cap);
        int keep_hi = std::min(hi, cap);
        if (keep_lo > keep_hi) {
            for (const auto& v : c) loss += std::abs(v);
            r.add_loss(loss);
            return r;
        }
        for (int n = lo; n < keep_lo; ++n) loss += std::abs(c[static_cast<size_t>(n - lo)]);
        for (int n = keep_hi + 1; n <= hi; ++n) loss += std::abs(c[static_cast<size_t>(n - lo)]);
        c = std::vector<cx>(c.begin() + (keep_lo - lo), c.begin() + (keep_hi - lo) + 1);
        lo = keep_lo;
    }
    r.reset(lo, std::move(c), loss);
    r.trim();
    return r;
}

Trace conjt(const Trace& a) {
    Trace r;
    r.add_loss(a.loss());
    if (a.empty()) return r;
    std::vector<cx> c(a.data().size());
    for (size_t i = 0; i < c.size(); ++i) c[i] = std::conj(a.data()[a.data().size() - 1 - i]);
    r.reset(-a.hi(), std::move(c), a.loss());
    return r;
}

Trace re(const Trace& a) { return cx(0.5, 0.0) * (a + conjt(a)); }

Trace im(const Trace& a) { return cx(0.0, -0.5) * (a - conjt(a)); }

Trace cauchy(const Trace& a) {
    Trace r;
    r.add_loss(a.loss());
    for (int n = a.lo(); n <= std::min(a.hi(), -1); ++n) {
        cx c = a.coeff(n);
        if (c != cx{}) r.set_coeff(n, -c);
    }
    return r;
}

Trace dtau(const Trace& a) {
    Trace r;
    r.add_loss(a.loss());
    for (int n = a.lo(); n <= a.hi(); ++n) {
        cx c = a.coeff(n);
        if (n != 0 && c != cx{}) r.set_coeff(n - 1, double(n) * c);
    }
    return r;
}

Trace project(const Trace& a, int lo, int hi) {
    Trace r;
    r.add_loss(a.loss());
    for (int n = std::max(lo, a.lo()); n <= std::min(hi, a.hi()); ++n) {
        cx c = a.coeff(n);
        if (c != cx{}) r.set_coeff(n, c);
    }
    return r;
}

Trace drop_mean(const Trace& a) {
    Trace r = a;
    if (!r.empty() && r.lo() <= 0 && r.hi() >= 0) r.set_coeff(0, cx{});
    r.trim();
    return r;
}

Trace reciprocal(const Trace& a, int cap, double tol, int max_terms) {
    cx a0 = a.coeff(0);
    if (std::abs(a0) == 0.0) throw std::runtime_error("reciprocal: zero mean coefficient");
    Trace e = (1.0 / a0) * a;
    e.set_coeff(0, e.coeff(0) - 1.0);
    e.trim();
    if (norm1(e) > 0.9)
        throw std::runtime_error("reciprocal: fluctuation too large for Neumann inversion");
    Trace acc = Trace::constant(1.0);
    Trace term = Trace::constant(1.0);
    for (int k = 0; k < max_terms; ++k) {
        term = product(term, cx(-1.0, 0.0) * e, cap);
        acc = acc + term;
        if (norm1(term) < tol) break;
    }
    return (1.0 / a0) * acc;
}

cx eval(const Trace& a, cx tau) {
    if (a.empty()) return {};
    // Horner over nonnegative part, separate Horner in 1/tau for negative part
    cx s{};
    const int nn_lo = std::max(0, a.lo());
    if (a.hi() >= nn_lo) {
        for (int n = a.hi(); n >= nn_lo; --n) s = s * tau + a.coeff(n);
        for (int k = 0; k < nn_lo; ++k) s *= tau;
    }
    if (a.lo() < 0) {
        cx itau = 1.0 / tau;
        cx sn{};
        for (int n = a.lo(); n <= -1; ++n) sn = sn * itau + a.coeff(n);
        sn *= itau;
        s += sn;
    }
    return s;
}

std::vector<cx> sample(const Trace& a, int K) {
    std::vector<cx> out(static_cast<size_t>(K));
#pragma omp parallel for schedule(static)
    for (int j = 0; j < K; ++j) {
        double th = 2.0 * pi * j / K;
        out[static_cast<size_t>(j)] = eval(a, std::polar(1.0, th));
    }
    return out;
}

cx coeff_from_samples(const std::vector<cx>& v, int n) {
    const int K = static_cast<int>(v.size());
    cx s{};
    for (int j = 0; j < K; ++j) {
        double th = 2.0 * pi * j / K;
        s += v[static_cast<size_t>(j)] * std::polar(1.0, -n * th);
    }
    return s / double(K);
}

double norm1(const Trace& a) {
    double s = 0;
    for (const auto& v : a.data()) s += std::abs(v);
    return s;
}

double norm2(const Trace& a) {
    double s = 0;
    for (const auto& v : a.data()) s += std::norm(v);
    return std::sqrt(s);
}

double max_abs(const Trace& a) {
    double s = 0;
    for (const auto& v : a.data()) s = std::max(s, std::abs(v));
    return s;
}

double max_abs_diff(const Trace& a, const Trace& b) {
    double s = 0;
    int lo = std::min(a.empty() ? 0 : a.lo(), b.empty() ? 0 : b.lo());
    int hi = std::max(a.empty() ? 0 : a.hi(), b.empty() ? 0 : b.hi());
    for (int n = lo; n <= hi; ++n) s = std::max(s, std::abs(a.coeff(n) - b.coeff(n)));
    return s;
}

double realness_defect(const Trace& a) {
    double s = 0;
    for (int n = 0; n <= std::max(std::abs(a.lo()), std::abs(a.hi())); ++n)
        s = std::max(s, std::abs(a.coeff(-n) - std::conj(a.coeff(n))));
    return s;
}

Trace symmetrize(const Trace& a) { return re(a); }

void to_json(nlohmann::json& j, const Trace& t) {
    j = nlohmann::json::array();
    for (int n = t.lo(); n <= t.hi(); ++n) {
        cx c = t.coeff(n);
        if (c != cx{}) j.push_back({n, c.real(), c.imag()});
    }
}

void from_json(const nlohmann::json& j, Trace& t) {
    t = Trace{};
    for (const auto& e : j) t.set_coeff(e.at(0).get<int>(), cx(e.at(1).get<double>(), e.at(2).get<double>()));
}

}  // namespace hv
