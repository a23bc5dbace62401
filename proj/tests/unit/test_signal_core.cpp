#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "bf/config.hpp"
#include "bf/endian.hpp"
#include "bf/errors.hpp"
#include "bf/samples.hpp"
#include "oracles.hpp"

using namespace bf;

namespace {

std::vector<std::byte> bytes(std::initializer_list<int> v) {
    std::vector<std::byte> out;
    for (int b : v)
        out.push_back(static_cast<std::byte>(b));
    return out;
}

} // namespace

TEST(DecodeSamples, UnitValueLittleEndian) {
    const auto s = decode_samples(bytes({0x01, 0, 0, 0, 0, 0, 0, 0}));
    ASSERT_EQ(s.size(), 1u);
    EXPECT_EQ(s[0].x, cf32(1, 0));
    EXPECT_EQ(s[0].y, cf32(0, 0));
}

TEST(DecodeSamples, TwosComplementExtremes) {
    const auto s = decode_samples(bytes({0x00, 0x80, 0xFF, 0x7F, 0, 0, 0, 0}));
    ASSERT_EQ(s.size(), 1u);
    EXPECT_EQ(s[0].x, cf32(-32768, 32767));
    EXPECT_EQ(s[0].y, cf32(0, 0));
}

TEST(DecodeSamples, EmptyAndMisaligned) {
    EXPECT_TRUE(decode_samples({}).empty());
    EXPECT_THROW(decode_samples(bytes({1, 2, 3})), MalformedInputError);
    EXPECT_THROW(decode_samples(bytes({1, 2, 3, 4, 5, 6, 7, 8, 9})), MalformedInputError);
}

TEST(EncodeSamples, KnownBytes) {
    const std::vector<DualPolSample> s{{{1, 0}, {0, 0}}};
    EXPECT_EQ(encode_samples(s), bytes({1, 0, 0, 0, 0, 0, 0, 0}));
    const std::vector<DualPolSample> t{{{-2, 256}, {-32768, 32767}}};
    EXPECT_EQ(encode_samples(t), bytes({0xFE, 0xFF, 0x00, 0x01, 0x00, 0x80, 0xFF, 0x7F}));
}

TEST(EncodeSamples, RoundTripRandom) {
    const auto s = oracle::random_integer_samples(10000, 3);
    EXPECT_EQ(decode_samples(encode_samples(s)), s);
}

TEST(EncodeSamples, RangeAndIntegrality) {
    EXPECT_THROW(encode_samples(std::vector<DualPolSample>{{{32768, 0}, {0, 0}}}), RangeError);
    EXPECT_THROW(encode_samples(std::vector<DualPolSample>{{{0, -32769}, {0, 0}}}), RangeError);
    EXPECT_THROW(encode_samples(std::vector<DualPolSample>{{{0.5f, 0}, {0, 0}}}), RangeError);
    const float nan = std::numeric_limits<float>::quiet_NaN();
    EXPECT_THROW(encode_samples(std::vector<DualPolSample>{{{0, 0}, {nan, 0}}}), RangeError);
}

TEST(Quantize, RoundsAndClamps) {
    const auto q = quantize({1.4, -1.6}, {1e9, -1e9});
    EXPECT_EQ(q.x, cf32(1, -2));
    EXPECT_EQ(q.y, cf32(32767, -32768));
}

TEST(Endian, StoreLoadIsLittleEndian) {
    std::byte b[8];
    le::store<std::uint32_t>(b, 0x11223344u);
    EXPECT_EQ(std::to_integer<int>(b[0]), 0x44);
    EXPECT_EQ(std::to_integer<int>(b[3]), 0x11);
    EXPECT_EQ(le::load<std::uint32_t>(b), 0x11223344u);
    le::store<double>(b, -2.5);
    EXPECT_EQ(le::load<double>(b), -2.5);
}

TEST(ObservationConfig, DefaultChunkLengthIsNearQuarterSecond) {
    ObservationConfig c;
    EXPECT_EQ(c.chunk_samples(), 48896);
    EXPECT_EQ(c.chunk_samples() % (16 * c.n_channels), 0);
    EXPECT_NEAR(c.block_duration(), 0.25, 0.25 * 0.002);
    EXPECT_EQ(c.channel_samples(), 3056);
    EXPECT_DOUBLE_EQ(c.channel_width(), 12207.03125);
}

TEST(ObservationConfig, ChunkLengthIsMultipleOfSixteenChannelRuns) {
    for (int ch : {1, 2, 4, 8, 16, 32, 64, 128}) {
        const int n = default_samples_per_chunk(kSubbandRate, ch);
        EXPECT_EQ(n % (16 * ch), 0) << ch;
        EXPECT_LE(std::abs(n - kSubbandRate * 0.25), 8.0 * ch) << ch;
    }
}

TEST(ObservationConfig, Validation) {
    ObservationConfig c;
    EXPECT_NO_THROW(c.validate());
    auto bad = [&](auto&& mutate) {
        ObservationConfig d;
        mutate(d);
        EXPECT_THROW(d.validate(), ConfigError);
    };
    bad([](auto& d) { d.n_stations = 0; });
    bad([](auto& d) { d.n_stations = 65; });
    bad([](auto& d) { d.n_subbands = 249; });
    bad([](auto& d) { d.n_channels = 12; });
    bad([](auto& d) { d.integration_factor = 2; });  // not Stokes I
    bad([](auto& d) { d.mode = OutputMode::StokesI; d.integration_factor = 3; });
    bad([](auto& d) { d.beam_directions = {{0, 0, 2}}; });
    bad([](auto& d) { d.dm = -1; });
    bad([](auto& d) { d.samples_per_chunk = 1000; });
    bad([](auto& d) { d.base_frequency = 150.1e6; });
    bad([](auto& d) { d.dedisperse = true; d.dedispersion_fft_size = 1000; });
}

TEST(ObservationConfig, ValidationMessageNamesField) {
    ObservationConfig c;
    c.n_channels = 12;
    try {
        c.validate();
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("observation.n_channels"), std::string::npos);
    }
}

TEST(ObservationConfig, SubbandAndChannelFrequencies) {
    ObservationConfig c;
    c.base_frequency = 768 * kSubbandRate;
    c.subband_stride = 2;
    EXPECT_DOUBLE_EQ(c.subband_base(0), 150e6);
    EXPECT_DOUBLE_EQ(c.subband_base(3), 150e6 + 6 * kSubbandRate);
    EXPECT_DOUBLE_EQ(c.channel_center(0, 8), 150e6 + 8 * 12207.03125);
}

TEST(OutputMode, ParseAndPrint) {
    for (auto m : {OutputMode::ComplexVoltages, OutputMode::StokesIQUV, OutputMode::StokesI})
        EXPECT_EQ(parse_output_mode(to_string(m)), m);
    EXPECT_THROW(parse_output_mode("iq"), ConfigError);
    EXPECT_EQ(components_per_sample(OutputMode::StokesI), 1);
    EXPECT_EQ(components_per_sample(OutputMode::ComplexVoltages), 4);
}
