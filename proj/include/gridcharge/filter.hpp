#pragma once

#include <complex>
#include <span>
#include <vector>

namespace gridcharge::filter {

/// One second-order section, direct form II transposed.
/// y[n] = b0 x[n] + b1 x[n-1] + b2 x[n-2] - a1 y[n-1] - a2 y[n-2]
struct Sos {
    double b0 = 1.0, b1 = 0.0, b2 = 0.0;
    double a1 = 0.0, a2 = 0.0;
};

/// Cascade of second-order sections. Coefficients are immutable after
/// design; filtering state is local to each filter() call, so a designed
/// chain can be shared across threads as long as each call gets its own
/// invocation.
class SosChain {
public:
    SosChain() = default;
    explicit SosChain(std::vector<Sos> sections) : sections_(std::move(sections)) {}

    const std::vector<Sos>& sections() const { return sections_; }

    std::vector<double> filter(std::span<const double> x) const;

    /// Complex response at frequency_hz for the given sample rate.
    std::complex<double> response(double frequency_hz, double sample_rate) const;
    double gain_db(double frequency_hz, double sample_rate) const;

    /// Pole magnitudes of every section.
    std::vector<double> pole_radii() const;
    bool stable() const;

private:
    std::vector<Sos> sections_;
};

/// Digital Butterworth bandpass (bilinear transform of the analog
/// prototype). `order` is the bandpass order and must be even; the chain
/// has order/2 sections. Gain is normalized to exactly 1 at the warped
/// geometric center of the band. Throws ConfigError for an invalid band
/// and NumericalError if any pole lands on or outside the unit circle.
SosChain design_bandpass(int order, double low_hz, double high_hz, double sample_rate);

/// Digital Butterworth lowpass of the given order, DC gain 1.
SosChain design_lowpass(int order, double cutoff_hz, double sample_rate);

} // namespace gridcharge::filter
