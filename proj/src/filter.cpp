#include "gridcharge/filter.hpp"

#include <cmath>
#include <numbers>

#include "gridcharge/csvio.hpp"
#include "gridcharge/errors.hpp"

namespace gridcharge::filter {

namespace {

using cd = std::complex<double>;
constexpr double kPi = std::numbers::pi;

// Left-half-plane Butterworth prototype poles, cutoff 1 rad/s.
std::vector<cd> prototype_poles(int order) {
    std::vector<cd> poles;
    poles.reserve(order);
    for (int k = 0; k < order; ++k) {
        const double theta = kPi * (2.0 * k + order + 1.0) / (2.0 * order);
        poles.emplace_back(std::cos(theta), std::sin(theta));
    }
    return poles;
}

cd bilinear(cd s, double fs2) { // fs2 = 2 * sample_rate
    return (fs2 + s) / (fs2 - s);
}

Sos section_from_pair(cd z1, cd z2, double b0, double b1, double b2) {
    Sos s;
    s.b0 = b0;
    s.b1 = b1;
    s.b2 = b2;
    s.a1 = -(z1 + z2).real();
    s.a2 = (z1 * z2).real();
    return s;
}

void normalize_gain(std::vector<Sos>& sections, double at_hz, double sample_rate) {
    SosChain probe(sections);
    const double mag = std::abs(probe.response(at_hz, sample_rate));
    if (!(mag > 0.0) || !std::isfinite(mag))
        throw NumericalError("filter design produced zero/non-finite passband gain");
    const double per_section = std::pow(1.0 / mag, 1.0 / static_cast<double>(sections.size()));
    for (auto& s : sections) {
        s.b0 *= per_section;
        s.b1 *= per_section;
        s.b2 *= per_section;
    }
}

void check_stability(const SosChain& chain) {
    if (!chain.stable())
        throw NumericalError("designed filter is unstable after discretization");
}

} // namespace

std::vector<double> SosChain::filter(std::span<const double> x) const {
    std::vector<double> y(x.begin(), x.end());
    for (const auto& s : sections_) {
        double z1 = 0.0, z2 = 0.0;
        for (double& v : y) {
            const double in = v;
            const double out = s.b0 * in + z1;
            z1 = s.b1 * in - s.a1 * out + z2;
            z2 = s.b2 * in - s.a2 * out;
            v = out;
        }
    }
    return y;
}

std::complex<double> SosChain::response(double frequency_hz, double sample_rate) const {
    const double w = 2.0 * kPi * frequency_hz / sample_rate;
    const cd z1 = std::polar(1.0, -w);
    const cd z2 = z1 * z1;
    cd h(1.0, 0.0);
    for (const auto& s : sections_)
        h *= (s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2);
    return h;
}

double SosChain::gain_db(double frequency_hz, double sample_rate) const {
    return 20.0 * std::log10(std::abs(response(frequency_hz, sample_rate)));
}

std::vector<double> SosChain::pole_radii() const {
    std::vector<double> radii;
    for (const auto& s : sections_) {
        const cd disc = cd(s.a1 * s.a1 - 4.0 * s.a2, 0.0);
        const cd root = std::sqrt(disc);
        radii.push_back(std::abs((-s.a1 + root) / 2.0));
        radii.push_back(std::abs((-s.a1 - root) / 2.0));
    }
    return radii;
}

bool SosChain::stable() const {
    for (double r : pole_radii())
        if (!(r < 1.0)) return false;
    return true;
}

SosChain design_bandpass(int order, double low_hz, double high_hz, double sample_rate) {
    if (order < 2 || order % 2 != 0)
        throw ConfigError("bandpass order must be even and >= 2");
    if (!(0.0 < low_hz && low_hz < high_hz && high_hz < 0.5 * sample_rate))
        throw ConfigError("bandpass band [" + csv::fmt(low_hz) + ", " + csv::fmt(high_hz) +
                          "] must satisfy 0 < low < high < sample_rate/2");

    const int n = order / 2; // analog lowpass prototype order
    const double fs2 = 2.0 * sample_rate;
    const double w1 = fs2 * std::tan(kPi * low_hz / sample_rate);
    const double w2 = fs2 * std::tan(kPi * high_hz / sample_rate);
    const double w0 = std::sqrt(w1 * w2);
    const double bw = w2 - w1;

    // Lowpass-to-bandpass: each prototype pole p maps to the two roots of
    // s^2 - (bw*p) s + w0^2 = 0. Conjugate prototype poles produce the
    // conjugate roots, so it suffices to walk poles with Im >= 0 and pair
    // each mapped root with its own conjugate.
    std::vector<Sos> sections;
    for (const cd& p : prototype_poles(n)) {
        if (p.imag() < -1e-12) continue;
        const cd b = bw * p;
        const cd disc = std::sqrt(b * b - 4.0 * w0 * w0);
        const cd sa = (b + disc) / 2.0;
        const cd sb = (b - disc) / 2.0;
        if (std::abs(p.imag()) <= 1e-12) {
            // Real prototype pole: sa and sb together form one section
            // (conjugate pair for narrow bands, two real poles otherwise).
            const cd za = bilinear(sa, fs2);
            const cd zb = bilinear(sb, fs2);
            sections.push_back(section_from_pair(za, zb, 1.0, 0.0, -1.0));
        } else {
            const cd za = bilinear(sa, fs2);
            const cd zb = bilinear(sb, fs2);
            sections.push_back(section_from_pair(za, std::conj(za), 1.0, 0.0, -1.0));
            sections.push_back(section_from_pair(zb, std::conj(zb), 1.0, 0.0, -1.0));
        }
    }

    // Analog |H| is exactly 1 at w0; the bilinear transform preserves it at
    // the warped center frequency.
    const double center_hz = sample_rate / kPi * std::atan(w0 / fs2);
    normalize_gain(sections, center_hz, sample_rate);
    SosChain chain(std::move(sections));
    check_stability(chain);
    return chain;
}

SosChain design_lowpass(int order, double cutoff_hz, double sample_rate) {
    if (order < 1) throw ConfigError("lowpass order must be >= 1");
    if (!(0.0 < cutoff_hz && cutoff_hz < 0.5 * sample_rate))
        throw ConfigError("lowpass cutoff must satisfy 0 < cutoff < sample_rate/2");

    const double fs2 = 2.0 * sample_rate;
    const double wc = fs2 * std::tan(kPi * cutoff_hz / sample_rate);

    std::vector<Sos> sections;
    for (const cd& p : prototype_poles(order)) {
        if (p.imag() < -1e-12) continue;
        const cd s = p * wc;
        const cd z = bilinear(s, fs2);
        if (std::abs(p.imag()) <= 1e-12) {
            // First-order section; zero at z = -1.
            Sos sec;
            sec.b0 = 1.0;
            sec.b1 = 1.0;
            sec.b2 = 0.0;
            sec.a1 = -z.real();
            sec.a2 = 0.0;
            sections.push_back(sec);
        } else {
            sections.push_back(section_from_pair(z, std::conj(z), 1.0, 2.0, 1.0));
        }
    }

    normalize_gain(sections, 0.0, sample_rate);
    SosChain chain(std::move(sections));
    check_stability(chain);
    return chain;
}

} // namespace gridcharge::filter
