#pragma once

#include <span>
#include <string>
#include <vector>

#include "bf/io/beam_file.hpp"

namespace bf::io {

struct FoldOptions {
    int n_bins = 64;
    double dm = 0.0;            // align channels for this dispersion measure first
    std::vector<int> channels;  // file channels to use; empty = all
    int component = 0;          // Stokes I for Stokes files
    double phase_offset = 0.0;  // seconds added to every sample time
};

// Mean power per phase bin.  Sample t of channel k sits at
// t / sample_rate - (delay(k) - delay(highest channel)) + phase_offset.
// Throws RangeError for bad bins, channels or component.
std::vector<double> fold_profile(const BeamFile& file, double period, const FoldOptions& options = {});

// Same, on a plain power series sampled at sample_rate.
std::vector<double> fold_series(std::span<const double> power, double sample_rate, double period,
                                int n_bins, double phase_offset = 0.0);

struct PulseWidth {
    int peak_bin = 0;
    double peak = 0.0;
    double baseline = 0.0;   // median of the profile
    double width_bins = 0.0; // full width at half maximum above the baseline
    double width_seconds = 0.0;
    double center_bin = 0.0; // midpoint of the two half-maximum crossings
};

// Half-maximum crossings are found by walking out from the peak on the
// circular profile and interpolating linearly between bins.
PulseWidth measure_fwhm(std::span<const double> profile, double period);

// "phase,power" rows with phase at bin centres.
std::string profile_csv(std::span<const double> profile);

} // namespace bf::io
