#include "bf/kernels.hpp"

namespace bf::kernels::scalar {

namespace {

inline void cmac(float& acc_re, float& acc_im, cf32 w, cf32 x) {
    acc_re += x.real() * w.real() - x.imag() * w.imag();
    acc_im += x.real() * w.imag() + x.imag() * w.real();
}

} // namespace

void beamform_block(const BeamformBlock& b) {
    for (std::size_t k = 0; k < b.n; ++k) {
        for (int j = 0; j < b.n_outputs; ++j) {
            float re = b.outputs[j][k].real();
            float im = b.outputs[j][k].imag();
            for (int i = 0; i < b.n_inputs; ++i)
                cmac(re, im, b.weights[i * b.n_outputs + j], b.inputs[i][k]);
            b.outputs[j][k] = cf32(re, im);
        }
    }
}

void complex_multiply(cf32* data, const cf32* factors, std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
        const cf32 a = data[k], f = factors[k];
        data[k] = cf32(a.real() * f.real() - a.imag() * f.imag(),
                       a.real() * f.imag() + a.imag() * f.real());
    }
}

void stokes_iquv(const DualPolSample* in, float* out, std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
        const float xr = in[k].x.real(), xi = in[k].x.imag();
        const float yr = in[k].y.real(), yi = in[k].y.imag();
        const float xx = xr * xr + xi * xi;
        const float yy = yr * yr + yi * yi;
        out[4 * k + 0] = xx + yy;
        out[4 * k + 1] = xx - yy;
        out[4 * k + 2] = 2.0f * (xr * yr + xi * yi);
        out[4 * k + 3] = 2.0f * (xi * yr - xr * yi);
    }
}

void stokes_i(const DualPolSample* in, float* out, std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
        const float xr = in[k].x.real(), xi = in[k].x.imag();
        const float yr = in[k].y.real(), yi = in[k].y.imag();
        out[k] = (xr * xr + xi * xi) + (yr * yr + yi * yi);
    }
}

} // namespace bf::kernels::scalar
