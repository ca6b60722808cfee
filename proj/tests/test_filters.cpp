#include <doctest.h>

#include <cmath>

#include "h2tail/filters.hpp"

using h2tail::Butterworth2;

#define CHECK_NEAR(a, b, tol) CHECK(std::fabs((a) - (b)) <= (tol))

namespace {

// steady-state amplitude ratio measured in the time domain
double measured_gain(double f_hz, double cutoff, double rate) {
    Butterworth2 filt(cutoff, rate);
    double peak = 0.0;
    int n = static_cast<int>(rate * (20.0 / cutoff));  // settle, then measure
    int measure_from = n / 2;
    for (int i = 0; i < n; ++i) {
        double t = i / rate;
        double y = filt.step(std::sin(2.0 * M_PI * f_hz * t));
        if (i > measure_from) peak = std::max(peak, std::fabs(y));
    }
    return peak;
}

double db(double x) { return 20.0 * std::log10(x); }

// continuous-time second-order Butterworth magnitude
double analytic_gain(double f_hz, double cutoff) {
    double r = f_hz / cutoff;
    return 1.0 / std::sqrt(1.0 + r * r * r * r);
}

}  // namespace

TEST_SUITE_BEGIN("filters");

TEST_CASE("constant input converges to the constant") {
    Butterworth2 f(1.5, 500.0);
    double y = 0.0;
    for (int i = 0; i < 5000; ++i) y = f.step(3.25);
    CHECK_NEAR(y, 3.25, 1e-9);
}

TEST_CASE("unity DC gain by construction") {
    for (double cutoff : {0.5, 1.5, 10.0, 40.0}) {
        Butterworth2 f(cutoff, 500.0);
        CHECK_NEAR(f.magnitude_at(0.0), 1.0, 1e-9);
    }
}

TEST_CASE("cutoff sits at -3 dB, both shipped configurations") {
    for (double cutoff : {1.5, 0.5}) {
        CHECK_NEAR(db(Butterworth2(cutoff, 500.0).magnitude_at(cutoff)), -3.0103, 0.1);
        CHECK_NEAR(measured_gain(cutoff, cutoff, 500.0), 0.707, 0.01);
    }
}

TEST_CASE("ten times the cutoff sits at -40 dB against the analytic oracle") {
    for (double cutoff : {1.5, 0.5}) {
        double got = db(Butterworth2(cutoff, 500.0).magnitude_at(10.0 * cutoff));
        double oracle = db(analytic_gain(10.0 * cutoff, cutoff));
        CHECK_NEAR(oracle, -40.0086, 0.01);  // |H| = 1/sqrt(1+(f/fc)^4)
        CHECK_NEAR(got, -40.0, 1.0);
        CHECK_NEAR(got, oracle, 1.0);
    }
}

TEST_CASE("discrete response tracks the analytic curve through the passband") {
    Butterworth2 f(1.5, 500.0);
    for (double freq = 0.1; freq <= 15.0; freq += 0.37) {
        double got = db(f.magnitude_at(freq));
        double want = db(analytic_gain(freq, 1.5));
        CHECK_NEAR(got, want, 0.15);  // bilinear warping stays tiny this far below Nyquist
    }
}

TEST_CASE("invalid configurations are rejected") {
    CHECK_THROWS_AS(Butterworth2(250.0, 500.0), std::invalid_argument);  // at Nyquist
    CHECK_THROWS_AS(Butterworth2(300.0, 500.0), std::invalid_argument);
    CHECK_THROWS_AS(Butterworth2(0.0, 500.0), std::invalid_argument);
    CHECK_THROWS_AS(Butterworth2(1.0, 0.0), std::invalid_argument);
    CHECK_NOTHROW(Butterworth2(249.0, 500.0));
}

TEST_CASE("reset primes the filter to steady state") {
    Butterworth2 f(0.5, 500.0);
    f.reset(7.0);
    CHECK_NEAR(f.step(7.0), 7.0, 1e-12);
    CHECK_NEAR(f.value(), 7.0, 1e-12);
}

TEST_SUITE_END();
