#pragma once

#include <complex>
#include <span>
#include <vector>

#include "bf/kernels.hpp"
#include "bf/types.hpp"

namespace bf {

template <typename T>
struct StokesSample {
    T i{}, q{}, u{}, v{};
};

// I = |X|^2 + |Y|^2, Q = |X|^2 - |Y|^2, U = 2 Re(X conj Y), V = 2 Im(X conj Y)
template <typename T>
StokesSample<T> stokes_iquv(std::complex<T> x, std::complex<T> y) {
    const T xx = x.real() * x.real() + x.imag() * x.imag();
    const T yy = y.real() * y.real() + y.imag() * y.imag();
    return {xx + yy, xx - yy, T(2) * (x.real() * y.real() + x.imag() * y.imag()),
            T(2) * (x.imag() * y.real() - x.real() * y.imag())};
}

// Sums `factor` consecutive values; throws ShapeError when the length is not
// a multiple of factor or factor < 1.
std::vector<double> integrate_stokes_i(std::span<const double> values, int factor);
std::vector<double> integrate_stokes_i(std::span<const StokesSample<double>> samples, int factor);
std::vector<float> integrate_stokes_i(std::span<const float> values, int factor);

// Stokes of each sample: 4 floats per sample for StokesIQUV, 1 for StokesI.
// Throws ConfigError for ComplexVoltages, ShapeError for a short output.
void stokes_into(kernels::Isa isa, std::span<const DualPolSample> in, OutputMode mode,
                 std::span<float> out);

} // namespace bf
