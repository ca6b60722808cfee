#include "h2tail/filters.hpp"

#include <cmath>
#include <complex>

namespace h2tail {

void Butterworth2::configure(double cutoff_hz, double sample_rate_hz) {
    if (!(sample_rate_hz > 0.0))
        throw std::invalid_argument("Butterworth2: nonpositive sample rate");
    if (!(cutoff_hz > 0.0) || cutoff_hz >= 0.5 * sample_rate_hz)
        throw std::invalid_argument("Butterworth2: cutoff must lie in (0, rate/2)");
    rate_hz_ = sample_rate_hz;
    const double k = std::tan(M_PI * cutoff_hz / sample_rate_hz);  // prewarped
    const double k2 = k * k;
    const double sqrt2 = std::sqrt(2.0);
    const double norm = 1.0 / (1.0 + sqrt2 * k + k2);
    b0_ = k2 * norm;
    b1_ = 2.0 * b0_;
    b2_ = b0_;
    a1_ = 2.0 * (k2 - 1.0) * norm;
    a2_ = (1.0 - sqrt2 * k + k2) * norm;
    configured_ = true;
    reset(0.0);
}

void Butterworth2::reset(double value) {
    x1_ = x2_ = y1_ = y2_ = value;
}

double Butterworth2::step(double x) {
    if (!configured_) return x;
    double y = b0_ * x + b1_ * x1_ + b2_ * x2_ - a1_ * y1_ - a2_ * y2_;
    x2_ = x1_;
    x1_ = x;
    y2_ = y1_;
    y1_ = y;
    return y;
}

double Butterworth2::magnitude_at(double freq_hz) const {
    if (!configured_) return 1.0;
    const double w = 2.0 * M_PI * freq_hz / rate_hz_;
    const std::complex<double> z = std::polar(1.0, -w);
    const std::complex<double> num = b0_ + b1_ * z + b2_ * z * z;
    const std::complex<double> den = 1.0 + a1_ * z + a2_ * z * z;
    return std::abs(num / den);
}

}  // namespace h2tail
