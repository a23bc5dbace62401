#include <gtest/gtest.h>

#include <cstdlib>
#include <cstring>
#include <random>

#include "bf/kernels.hpp"
#include "oracles.hpp"

using namespace bf;
using kernels::Isa;

namespace {

bool have_avx2() { return kernels::isa_supported(Isa::Avx2); }

std::vector<cf32> random_complex(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> g;
    std::vector<cf32> v(n);
    for (auto& x : v)
        x = {g(rng), g(rng)};
    return v;
}

} // namespace

TEST(Kernels, IsaNames) {
    EXPECT_EQ(kernels::isa_name(Isa::Scalar), "scalar");
    EXPECT_EQ(kernels::isa_name(Isa::Avx2), "avx2");
    EXPECT_TRUE(kernels::isa_supported(Isa::Scalar));
    EXPECT_TRUE(kernels::isa_supported(kernels::detect_isa()));
}

TEST(Kernels, ScalarComplexMultiplyMatchesDefinition) {
    auto a = random_complex(37, 1);
    const auto b = random_complex(37, 2);
    const auto orig = a;
    kernels::scalar::complex_multiply(a.data(), b.data(), a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        const std::complex<double> want = std::complex<double>(orig[i]) * std::complex<double>(b[i]);
        EXPECT_NEAR(a[i].real(), want.real(), 1e-5);
        EXPECT_NEAR(a[i].imag(), want.imag(), 1e-5);
    }
}

TEST(Kernels, ComplexMultiplyAvx2MatchesScalar) {
    if (!have_avx2())
        GTEST_SKIP() << "no AVX2";
    for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 8u, 17u, 1000u}) {
        auto a = random_complex(n, n + 10), b = a;
        const auto f = random_complex(n, n + 20);
        kernels::scalar::complex_multiply(a.data(), f.data(), n);
        kernels::avx2::complex_multiply(b.data(), f.data(), n);
        // FMA fuses one rounding away; a few ulp of the operands.
        for (std::size_t i = 0; i < n; ++i) {
            EXPECT_NEAR(a[i].real(), b[i].real(), 1e-5f * (1 + std::abs(a[i])));
            EXPECT_NEAR(a[i].imag(), b[i].imag(), 1e-5f * (1 + std::abs(a[i])));
        }
    }
}

TEST(Kernels, StokesAvx2BitIdenticalToScalar) {
    if (!have_avx2())
        GTEST_SKIP() << "no AVX2";
    for (std::size_t n : {0u, 1u, 2u, 7u, 8u, 9u, 63u, 1001u}) {
        const auto in = oracle::random_samples(n, n + 5, 100.0f);
        std::vector<float> a(4 * n), b(4 * n), c(n), d(n);
        kernels::scalar::stokes_iquv(in.data(), a.data(), n);
        kernels::avx2::stokes_iquv(in.data(), b.data(), n);
        kernels::scalar::stokes_i(in.data(), c.data(), n);
        kernels::avx2::stokes_i(in.data(), d.data(), n);
        EXPECT_EQ(0, std::memcmp(a.data(), b.data(), a.size() * sizeof(float))) << n;
        EXPECT_EQ(0, std::memcmp(c.data(), d.data(), c.size() * sizeof(float))) << n;
    }
}

TEST(Kernels, BeamformBlockScalarMatchesDoubleOracle) {
    const std::size_t n = 50;
    for (int ni = 1; ni <= kernels::kMaxBlockInputs; ++ni)
        for (int no = 1; no <= kernels::kMaxBlockOutputs; ++no) {
            std::vector<std::vector<cf32>> in, out;
            std::vector<const cf32*> ip;
            std::vector<cf32*> op;
            for (int i = 0; i < ni; ++i)
                in.push_back(random_complex(n, 100 + i));
            for (int j = 0; j < no; ++j)
                out.push_back(random_complex(n, 200 + j));
            const auto init = out;
            for (auto& v : in)
                ip.push_back(v.data());
            for (auto& v : out)
                op.push_back(v.data());
            const auto w = random_complex(std::size_t(ni * no), 300);
            kernels::scalar::beamform_block({ip.data(), ni, op.data(), no, w.data(), n});
            for (int j = 0; j < no; ++j)
                for (std::size_t k = 0; k < n; ++k) {
                    std::complex<double> want = init[j][k];
                    for (int i = 0; i < ni; ++i)
                        want += std::complex<double>(w[i * no + j]) * std::complex<double>(in[i][k]);
                    EXPECT_NEAR(out[j][k].real(), want.real(), 1e-4);
                    EXPECT_NEAR(out[j][k].imag(), want.imag(), 1e-4);
                }
        }
}

TEST(Kernels, BeamformBlockAvx2MatchesScalar) {
    if (!have_avx2())
        GTEST_SKIP() << "no AVX2";
    for (std::size_t n : {1u, 3u, 4u, 5u, 64u, 131u})
        for (int ni = 1; ni <= kernels::kMaxBlockInputs; ++ni)
            for (int no = 1; no <= kernels::kMaxBlockOutputs; ++no) {
                std::vector<std::vector<cf32>> in, a, b;
                std::vector<const cf32*> ip;
                std::vector<cf32*> pa, pb;
                for (int i = 0; i < ni; ++i)
                    in.push_back(random_complex(n, 7 * i + n));
                for (int j = 0; j < no; ++j) {
                    a.push_back(random_complex(n, 50 + j));
                    b.push_back(a.back());
                }
                for (auto& v : in)
                    ip.push_back(v.data());
                for (int j = 0; j < no; ++j) {
                    pa.push_back(a[j].data());
                    pb.push_back(b[j].data());
                }
                const auto w = random_complex(std::size_t(ni * no), 99);
                kernels::scalar::beamform_block({ip.data(), ni, pa.data(), no, w.data(), n});
                kernels::avx2::beamform_block({ip.data(), ni, pb.data(), no, w.data(), n});
                for (int j = 0; j < no; ++j)
                    EXPECT_LT(oracle::relative_error(b[j], a[j]), 1e-6)
                        << "n=" << n << " ni=" << ni << " no=" << no;
            }
}

TEST(Kernels, DispatchFollowsRequestedIsa) {
    const auto in = oracle::random_samples(33, 9);
    std::vector<float> a(33), b(33);
    kernels::stokes_i(Isa::Scalar, in.data(), a.data(), in.size());
    kernels::scalar::stokes_i(in.data(), b.data(), in.size());
    EXPECT_EQ(a, b);
}
