#pragma once

#include <cstddef>
#include <string_view>

#include "bf/types.hpp"

// Inner loops of the beam former, Stokes conversion and chirp multiply.
//
// Every kernel has a scalar reference and an AVX2+FMA variant; callers pick
// one explicitly or take detect_isa().  The scalar variants fix the
// floating-point evaluation order the rest of the library documents:
//
//   complex multiply   re = a.re*b.re - a.im*b.im,  im = a.re*b.im + a.im*b.re
//   |X|^2              x.re*x.re + x.im*x.im
//   Stokes I           |X|^2 + |Y|^2
//
// The AVX2 Stokes kernels evaluate in the same order and match bit-for-bit.
// The AVX2 multiply kernels fuse with FMA and agree to a few ulp.
namespace bf::kernels {

enum class Isa { Scalar, Avx2 };

// Best variant this CPU runs (cached after the first call).  Setting the
// environment variable BF_FORCE_SCALAR=1 pins it to Scalar.
Isa detect_isa();
bool isa_supported(Isa isa);
std::string_view isa_name(Isa isa);

constexpr int kMaxBlockInputs = 6;
constexpr int kMaxBlockOutputs = 3;

// outputs[j][k] += sum_i weights[i * n_outputs + j] * inputs[i][k] for k < n,
// accumulating inputs in index order.  n counts complex values; a
// DualPolSample contributes two.
struct BeamformBlock {
    const cf32* const* inputs = nullptr;
    int n_inputs = 0;      // 1..kMaxBlockInputs
    cf32* const* outputs = nullptr;
    int n_outputs = 0;     // 1..kMaxBlockOutputs
    const cf32* weights = nullptr;
    std::size_t n = 0;
};
void beamform_block(Isa isa, const BeamformBlock& block);

// data[k] *= factors[k]
void complex_multiply(Isa isa, cf32* data, const cf32* factors, std::size_t n);

// out[4k..4k+3] = (I, Q, U, V) of in[k]
void stokes_iquv(Isa isa, const DualPolSample* in, float* out, std::size_t n);

// out[k] = I of in[k]
void stokes_i(Isa isa, const DualPolSample* in, float* out, std::size_t n);

namespace scalar {
void beamform_block(const BeamformBlock& block);
void complex_multiply(cf32* data, const cf32* factors, std::size_t n);
void stokes_iquv(const DualPolSample* in, float* out, std::size_t n);
void stokes_i(const DualPolSample* in, float* out, std::size_t n);
} // namespace scalar

namespace avx2 {
void beamform_block(const BeamformBlock& block);
void complex_multiply(cf32* data, const cf32* factors, std::size_t n);
void stokes_iquv(const DualPolSample* in, float* out, std::size_t n);
void stokes_i(const DualPolSample* in, float* out, std::size_t n);
} // namespace avx2

} // namespace bf::kernels
