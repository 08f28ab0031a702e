#pragma once
#include <complex>
#include <vector>
#include <limits>
#include <string>

#include <json.hpp>

namespace hv {

using cx = std::complex<double>;
inline constexpr double pi = 3.14159265358979323846;

// Function on the unit circle stored as Laurent coefficients over a finite
// index window: T(tau) = sum_n c_n tau^n.  Arithmetic is exact convolution in
// coefficient space (no sampling grid, hence no aliasing); an optional hard
// cap on the support triggers explicit truncation whose dropped mass is
// accumulated in loss().
class Trace {
public:
    Trace() = default;

    static Trace monomial(int n, cx c);
    static Trace constant(cx c) { return monomial(0, c); }

    int lo() const { return lo_; }
    int hi() const { return lo_ + static_cast<int>(c_.size()) - 1; }
    bool empty() const { return c_.empty(); }

    cx coeff(int n) const;
    void set_coeff(int n, cx v);
    void add_coeff(int n, cx v);

    double loss() const { return loss_; }
    void add_loss(double d) { loss_ += d; }

    // raw access for kernels
    const std::vector<cx>& data() const { return c_; }
    std::vector<cx>& data() { return c_; }
    void reset(int lo, std::vector<cx> c, double loss);

    void trim();  // drop exactly-zero edges

private:
    int lo_ = 0;
    std::vector<cx> c_;
    double loss_ = 0.0;
    void ensure(int n);
};

inline constexpr int kNoCap = std::numeric_limits<int>::max();

Trace operator+(const Trace& a, const Trace& b);
Trace operator-(const Trace& a, const Trace& b);
Trace operator*(cx s, const Trace& a);
Trace operator-(const Trace& a);

// Exact convolution product; indices with |n| > cap are dropped and their
// total magnitude recorded in the result's loss().
Trace product(const Trace& a, const Trace& b, int cap = kNoCap);

// Serial reference for the convolution kernel (parallel version is used by
// product() above a work threshold); kept separately callable for tests and
// the benchmark target.
void conv_serial(const std::vector<cx>& a, const std::vector<cx>& b, std::vector<cx>& out);
void conv_parallel(const std::vector<cx>& a, const std::vector<cx>& b, std::vector<cx>& out);

// conj of the function: coefficients conj(c_{-n}).
Trace conjt(const Trace& a);
Trace re(const Trace& a);
Trace im(const Trace& a);

// Cauchy multiplier: tau^n -> 0 for n >= 0, -tau^n for n < 0.
Trace cauchy(const Trace& a);

// d/dtau = -i e^{-i theta} d/dtheta: c_n tau^n -> n c_n tau^{n-1}.
Trace dtau(const Trace& a);

Trace project(const Trace& a, int lo, int hi);  // keep window [lo,hi]
Trace drop_mean(const Trace& a);

// 1/a for real-valued a with dominant mean, by Neumann series in coefficient
// space.  Throws if the zero-mean part is not a contraction.
Trace reciprocal(const Trace& a, int cap, double tol = 1e-16, int max_terms = 200);

cx eval(const Trace& a, cx tau);
std::vector<cx> sample(const Trace& a, int K);             // values at K roots of unity
cx coeff_from_samples(const std::vector<cx>& v, int n);    // trapezoid projection

double norm1(const Trace& a);
double norm2(const Trace& a);
double max_abs(const Trace& a);
double max_abs_diff(const Trace& a, const Trace& b);

// conj-symmetry defect of a nominally real-valued trace
double realness_defect(const Trace& a);
// (a + conjt(a))/2
Trace symmetrize(const Trace& a);

void to_json(nlohmann::json& j, const Trace& t);
void from_json(const nlohmann::json& j, Trace& t);

}  // namespace hv
