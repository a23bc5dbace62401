#include "bf/samples.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bf/endian.hpp"
#include "bf/errors.hpp"

namespace bf {

std::vector<DualPolSample> decode_samples(std::span<const std::byte> raw) {
    if (raw.size() % kRawSampleBytes != 0)
        throw MalformedInputError("raw sample buffer of " + std::to_string(raw.size()) +
                                  " bytes is not a multiple of 8");
    std::vector<DualPolSample> out(raw.size() / kRawSampleBytes);
    const std::byte* p = raw.data();
    for (auto& s : out) {
        const auto xr = le::load<std::int16_t>(p + 0);
        const auto xi = le::load<std::int16_t>(p + 2);
        const auto yr = le::load<std::int16_t>(p + 4);
        const auto yi = le::load<std::int16_t>(p + 6);
        s.x = cf32(xr, xi);
        s.y = cf32(yr, yi);
        p += kRawSampleBytes;
    }
    return out;
}

namespace {

std::int16_t to_int16(float v) {
    if (!(v >= -32768.0f && v <= 32767.0f) || std::nearbyint(v) != v)
        throw RangeError("sample component " + std::to_string(v) +
                         " is not an integer in the 16-bit range");
    return static_cast<std::int16_t>(v);
}

} // namespace

void encode_samples_into(std::span<const DualPolSample> samples, std::vector<std::byte>& out) {
    const std::size_t base = out.size();
    out.resize(base + samples.size() * kRawSampleBytes);
    std::byte* p = out.data() + base;
    for (const auto& s : samples) {
        le::store(p + 0, to_int16(s.x.real()));
        le::store(p + 2, to_int16(s.x.imag()));
        le::store(p + 4, to_int16(s.y.real()));
        le::store(p + 6, to_int16(s.y.imag()));
        p += kRawSampleBytes;
    }
}

std::vector<std::byte> encode_samples(std::span<const DualPolSample> samples) {
    std::vector<std::byte> out;
    encode_samples_into(samples, out);
    return out;
}

DualPolSample quantize(cf64 x, cf64 y) {
    auto q = [](double v) {
        return static_cast<float>(std::clamp(std::nearbyint(v), -32768.0, 32767.0));
    };
    return {cf32(q(x.real()), q(x.imag())), cf32(q(y.real()), q(y.imag()))};
}

} // namespace bf
