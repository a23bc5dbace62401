#pragma once

#include <algorithm>
#include <functional>
#include <vector>

#include "bf/cluster_plan.hpp"

namespace oracle {

// Exhaustive feasibility: can every item go into some bin without exceeding
// its capacity?  Items are tried largest first; identical consecutive items
// take non-decreasing bin indices so permutations are not revisited.
inline bool brute_force_fits(std::vector<double> items, std::vector<double> caps) {
    std::sort(items.begin(), items.end(), std::greater<>());
    std::vector<int> bin_of(items.size(), 0);
    std::function<bool(std::size_t)> place = [&](std::size_t i) {
        if (i == items.size())
            return true;
        const int first = i > 0 && items[i] == items[i - 1] ? bin_of[i - 1] : 0;
        for (int b = first; b < int(caps.size()); ++b) {
            if (items[i] > caps[b] + 1e-3)
                continue;
            caps[b] -= items[i];
            bin_of[i] = b;
            const bool ok = place(i + 1);
            caps[b] += items[i];
            if (ok)
                return true;
        }
        return false;
    };
    return place(0);
}

// Reserved bandwidth of the pieces a plan is built from: one per component
// group and subband range, each holding the widest range of the split.
inline std::vector<double> plan_pieces(bf::OutputMode mode, int integration, int n_beams,
                                       bool incoherent, int n_subbands, int k) {
    using bf::OutputMode;
    std::vector<double> out;
    const int widest = (n_subbands + k - 1) / k;
    auto add = [&](OutputMode m, int integ) {
        const int groups = m == OutputMode::ComplexVoltages ? 2 : bf::components_per_sample(m);
        const double per = bf::beam_rate(m, integ, 1) / groups * widest;
        for (int g = 0; g < groups * k; ++g)
            out.push_back(per);
    };
    for (int b = 0; b < n_beams; ++b)
        add(mode, integration);
    if (incoherent)
        add(mode == OutputMode::StokesI ? OutputMode::StokesI : OutputMode::StokesIQUV,
            mode == OutputMode::StokesI ? integration : 1);
    return out;
}

// FFD's answer, with the returned assignment checked against the capacities.
inline bool ffd_fits(const std::vector<double>& items, const std::vector<double>& caps) {
    const auto r = bf::pack_first_fit_decreasing(items, caps);
    if (!r)
        return false;
    std::vector<double> load(caps.size(), 0.0);
    for (std::size_t i = 0; i < items.size(); ++i)
        load[std::size_t((*r)[i])] += items[i];
    for (std::size_t b = 0; b < caps.size(); ++b)
        if (load[b] > caps[b] + 1e-3)
            return false;
    return true;
}

} // namespace oracle
