#pragma once
#include <cmath>
#include <limits>
#include <stdexcept>

#include "hvortex/trace.hpp"

namespace hv {

// Co-rotating, self-similarly shrinking frame.  kappa is the collapse time
// (infinity = pure rotation, negative = expansion); Omega the rotation rate.
// The combined complex rate obeys i*bomega = i*Omega + 1/(2 kappa), i.e.
// Im bomega = -1/(2 kappa).
struct Frame {
    double Omega = 0.0;
    double kappa = std::numeric_limits<double>::infinity();

    cx bomega() const { return cx(Omega, -0.5 / kappa); }

    static Frame from_bomega(cx bo) {
        Frame f;
        f.Omega = bo.real();
        f.kappa = (bo.imag() == 0.0) ? std::numeric_limits<double>::infinity() : -0.5 / bo.imag();
        return f;
    }
};

// Frame time T(t) = -kappa log(1 - t/kappa); t in [0, kappa) for collapse.
inline double frame_time(const Frame& fr, double t) {
    if (std::isinf(fr.kappa)) return t;
    double r = 1.0 - t / fr.kappa;
    if (r <= 0.0) throw std::domain_error("frame_time: t beyond collapse time");
    return -fr.kappa * std::log(r);
}

// L(t) = sqrt(1 - t/kappa) e^{i Omega T(t)}; satisfies L d(conj L)/dt = -i*bomega.
inline cx scale_factor(const Frame& fr, double t) {
    double T = frame_time(fr, t);
    double mod = std::isinf(fr.kappa) ? 1.0 : std::sqrt(1.0 - t / fr.kappa);
    return std::polar(mod, fr.Omega * T);
}

}  // namespace hv
