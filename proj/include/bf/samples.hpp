#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bf/types.hpp"

namespace bf {

// Raw station bytes (x_re, x_im, y_re, y_im; LE int16 each) to floats.
// Throws MalformedInputError when the length is not a multiple of 8.
std::vector<DualPolSample> decode_samples(std::span<const std::byte> raw);

// Inverse of decode_samples.  Every component must be integral and lie in
// [-32768, 32767]; otherwise RangeError.
std::vector<std::byte> encode_samples(std::span<const DualPolSample> samples);

// Appends to an existing buffer; same contract as encode_samples.
void encode_samples_into(std::span<const DualPolSample> samples, std::vector<std::byte>& out);

// Round to nearest and clamp each component to the int16 range.  The station
// generator uses this so its output survives the wire format unchanged.
DualPolSample quantize(cf64 x, cf64 y);

} // namespace bf
