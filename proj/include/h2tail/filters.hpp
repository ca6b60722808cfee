/*
  Discrete second-order Butterworth low-pass (bilinear transform with
  cutoff prewarp). Unity DC gain by construction.
*/
#pragma once

#include <stdexcept>

namespace h2tail {

class Butterworth2 {
  public:
    // identity pass-through until configured
    Butterworth2() = default;

    Butterworth2(double cutoff_hz, double sample_rate_hz) { configure(cutoff_hz, sample_rate_hz); }

    void configure(double cutoff_hz, double sample_rate_hz);

    // prime the filter to a steady-state value (no startup transient)
    void reset(double value);

    double step(double x);

    double value() const { return y1_; }
    bool configured() const { return configured_; }

    // magnitude response of the discrete filter at the given frequency
    double magnitude_at(double freq_hz) const;

  private:
    bool configured_ = false;
    double rate_hz_ = 0.0;
    double b0_ = 1.0, b1_ = 0.0, b2_ = 0.0;
    double a1_ = 0.0, a2_ = 0.0;
    double x1_ = 0.0, x2_ = 0.0, y1_ = 0.0, y2_ = 0.0;
};

}  // namespace h2tail
