#include "bf/kernels.hpp"

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>
#define BF_AVX2 __attribute__((target("avx2,fma")))
#define BF_HAVE_AVX2_KERNELS 1
#endif

namespace bf::kernels::avx2 {

#ifdef BF_HAVE_AVX2_KERNELS

namespace {

// x * w for four interleaved complex values and a broadcast weight
// (wr = w.re in every lane, wi = w.im in every lane).
BF_AVX2 inline __m256 cmul_bcast(__m256 x, __m256 wr, __m256 wi) {
    const __m256 xs = _mm256_permute_ps(x, 0xB1); // (im, re) pairs
    return _mm256_fmaddsub_ps(x, wr, _mm256_mul_ps(xs, wi));
}

// Per-128-bit-lane 4x4 transpose.
BF_AVX2 inline void transpose4(__m256& r0, __m256& r1, __m256& r2, __m256& r3) {
    const __m256 t0 = _mm256_shuffle_ps(r0, r1, 0x44);
    const __m256 t2 = _mm256_shuffle_ps(r0, r1, 0xEE);
    const __m256 t1 = _mm256_shuffle_ps(r2, r3, 0x44);
    const __m256 t3 = _mm256_shuffle_ps(r2, r3, 0xEE);
    r0 = _mm256_shuffle_ps(t0, t1, 0x88);
    r1 = _mm256_shuffle_ps(t0, t1, 0xDD);
    r2 = _mm256_shuffle_ps(t2, t3, 0x88);
    r3 = _mm256_shuffle_ps(t2, t3, 0xDD);
}

template <int NI, int NO>
BF_AVX2 void beamform_fixed(const BeamformBlock& b, std::size_t n_vec) {
    __m256 wr[NI][NO], wi[NI][NO];
    for (int i = 0; i < NI; ++i)
        for (int j = 0; j < NO; ++j) {
            wr[i][j] = _mm256_set1_ps(b.weights[i * NO + j].real());
            wi[i][j] = _mm256_set1_ps(b.weights[i * NO + j].imag());
        }
    for (std::size_t v = 0; v < n_vec; ++v) {
        const std::size_t k = 4 * v;
        __m256 acc[NO];
        for (int j = 0; j < NO; ++j)
            acc[j] = _mm256_loadu_ps(reinterpret_cast<const float*>(b.outputs[j] + k));
        for (int i = 0; i < NI; ++i) {
            const __m256 x = _mm256_loadu_ps(reinterpret_cast<const float*>(b.inputs[i] + k));
            for (int j = 0; j < NO; ++j)
                acc[j] = _mm256_add_ps(acc[j], cmul_bcast(x, wr[i][j], wi[i][j]));
        }
        for (int j = 0; j < NO; ++j)
            _mm256_storeu_ps(reinterpret_cast<float*>(b.outputs[j] + k), acc[j]);
    }
}

BF_AVX2 void beamform_generic(const BeamformBlock& b, std::size_t n_vec) {
    for (std::size_t v = 0; v < n_vec; ++v) {
        const std::size_t k = 4 * v;
        for (int j = 0; j < b.n_outputs; ++j) {
            __m256 acc = _mm256_loadu_ps(reinterpret_cast<const float*>(b.outputs[j] + k));
            for (int i = 0; i < b.n_inputs; ++i) {
                const cf32 w = b.weights[i * b.n_outputs + j];
                const __m256 x = _mm256_loadu_ps(reinterpret_cast<const float*>(b.inputs[i] + k));
                acc = _mm256_add_ps(acc, cmul_bcast(x, _mm256_set1_ps(w.real()),
                                                    _mm256_set1_ps(w.imag())));
            }
            _mm256_storeu_ps(reinterpret_cast<float*>(b.outputs[j] + k), acc);
        }
    }
}

} // namespace

BF_AVX2 void beamform_block(const BeamformBlock& b) {
    const std::size_t n_vec = b.n / 4;
    if (b.n_inputs == 6 && b.n_outputs == 3)
        beamform_fixed<6, 3>(b, n_vec);
    else
        beamform_generic(b, n_vec);

    const std::size_t done = 4 * n_vec;
    if (done < b.n) {
        cf32* const* tail_out = b.outputs;
        const cf32* tail_in[kMaxBlockInputs];
        cf32* tail_o[kMaxBlockOutputs];
        for (int i = 0; i < b.n_inputs; ++i)
            tail_in[i] = b.inputs[i] + done;
        for (int j = 0; j < b.n_outputs; ++j)
            tail_o[j] = tail_out[j] + done;
        BeamformBlock tail = b;
        tail.inputs = tail_in;
        tail.outputs = tail_o;
        tail.n = b.n - done;
        scalar::beamform_block(tail);
    }
}

BF_AVX2 void complex_multiply(cf32* data, const cf32* factors, std::size_t n) {
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        float* d = reinterpret_cast<float*>(data + k);
        const __m256 a = _mm256_loadu_ps(d);
        const __m256 f = _mm256_loadu_ps(reinterpret_cast<const float*>(factors + k));
        const __m256 fr = _mm256_moveldup_ps(f);
        const __m256 fi = _mm256_movehdup_ps(f);
        const __m256 as = _mm256_permute_ps(a, 0xB1);
        _mm256_storeu_ps(d, _mm256_fmaddsub_ps(a, fr, _mm256_mul_ps(as, fi)));
    }
    scalar::complex_multiply(data + k, factors + k, n - k);
}

BF_AVX2 void stokes_iquv(const DualPolSample* in, float* out, std::size_t n) {
    std::size_t k = 0;
    const __m256 two = _mm256_set1_ps(2.0f);
    for (; k + 8 <= n; k += 8) {
        const float* p = reinterpret_cast<const float*>(in + k);
        __m256 xr = _mm256_loadu_ps(p + 0);
        __m256 xi = _mm256_loadu_ps(p + 8);
        __m256 yr = _mm256_loadu_ps(p + 16);
        __m256 yi = _mm256_loadu_ps(p + 24);
        transpose4(xr, xi, yr, yi);
        const __m256 xx = _mm256_add_ps(_mm256_mul_ps(xr, xr), _mm256_mul_ps(xi, xi));
        const __m256 yy = _mm256_add_ps(_mm256_mul_ps(yr, yr), _mm256_mul_ps(yi, yi));
        __m256 si = _mm256_add_ps(xx, yy);
        __m256 sq = _mm256_sub_ps(xx, yy);
        __m256 su = _mm256_mul_ps(two, _mm256_add_ps(_mm256_mul_ps(xr, yr), _mm256_mul_ps(xi, yi)));
        __m256 sv = _mm256_mul_ps(two, _mm256_sub_ps(_mm256_mul_ps(xi, yr), _mm256_mul_ps(xr, yi)));
        transpose4(si, sq, su, sv);
        float* o = out + 4 * k;
        _mm256_storeu_ps(o + 0, si);
        _mm256_storeu_ps(o + 8, sq);
        _mm256_storeu_ps(o + 16, su);
        _mm256_storeu_ps(o + 24, sv);
    }
    scalar::stokes_iquv(in + k, out + 4 * k, n - k);
}

BF_AVX2 void stokes_i(const DualPolSample* in, float* out, std::size_t n) {
    std::size_t k = 0;
    const __m256i order = _mm256_setr_epi32(0, 4, 1, 5, 2, 6, 3, 7);
    for (; k + 8 <= n; k += 8) {
        const float* p = reinterpret_cast<const float*>(in + k);
        const __m256 a = _mm256_loadu_ps(p + 0);
        const __m256 b = _mm256_loadu_ps(p + 8);
        const __m256 c = _mm256_loadu_ps(p + 16);
        const __m256 d = _mm256_loadu_ps(p + 24);
        // hadd pairs (re^2 + im^2) per polarisation, then X + Y.
        const __m256 h1 = _mm256_hadd_ps(_mm256_mul_ps(a, a), _mm256_mul_ps(b, b));
        const __m256 h2 = _mm256_hadd_ps(_mm256_mul_ps(c, c), _mm256_mul_ps(d, d));
        const __m256 h3 = _mm256_hadd_ps(h1, h2); // samples 0,2,4,6 | 1,3,5,7
        _mm256_storeu_ps(out + k, _mm256_permutevar8x32_ps(h3, order));
    }
    scalar::stokes_i(in + k, out + k, n - k);
}

#else

void beamform_block(const BeamformBlock& b) { scalar::beamform_block(b); }
void complex_multiply(cf32* d, const cf32* f, std::size_t n) { scalar::complex_multiply(d, f, n); }
void stokes_iquv(const DualPolSample* in, float* out, std::size_t n) { scalar::stokes_iquv(in, out, n); }
void stokes_i(const DualPolSample* in, float* out, std::size_t n) { scalar::stokes_i(in, out, n); }

#endif

} // namespace bf::kernels::avx2
