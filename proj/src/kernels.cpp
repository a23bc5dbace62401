#include "bf/kernels.hpp"

#include <cstdlib>
#include <string_view>

namespace bf::kernels {

bool isa_supported(Isa isa) {
    switch (isa) {
    case Isa::Scalar:
        return true;
    case Isa::Avx2:
#if defined(__x86_64__) || defined(__i386__)
        __builtin_cpu_init();
        return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
        return false;
#endif
    }
    return false;
}

Isa detect_isa() {
    static const Isa best = [] {
        if (const char* env = std::getenv("BF_FORCE_SCALAR"); env && std::string_view(env) == "1")
            return Isa::Scalar;
        return isa_supported(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar;
    }();
    return best;
}

std::string_view isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

void beamform_block(Isa isa, const BeamformBlock& block) {
    isa == Isa::Avx2 ? avx2::beamform_block(block) : scalar::beamform_block(block);
}

void complex_multiply(Isa isa, cf32* data, const cf32* factors, std::size_t n) {
    isa == Isa::Avx2 ? avx2::complex_multiply(data, factors, n)
                     : scalar::complex_multiply(data, factors, n);
}

void stokes_iquv(Isa isa, const DualPolSample* in, float* out, std::size_t n) {
    isa == Isa::Avx2 ? avx2::stokes_iquv(in, out, n) : scalar::stokes_iquv(in, out, n);
}

void stokes_i(Isa isa, const DualPolSample* in, float* out, std::size_t n) {
    isa == Isa::Avx2 ? avx2::stokes_i(in, out, n) : scalar::stokes_i(in, out, n);
}

} // namespace bf::kernels
