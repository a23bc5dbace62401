#include "bf/stokes.hpp"

#include <string>

#include "bf/errors.hpp"

namespace bf {

namespace {

template <typename T>
std::vector<T> integrate(std::span<const T> values, int factor) {
    if (factor < 1)
        throw ShapeError("integration factor must be at least 1");
    if (values.size() % std::size_t(factor) != 0)
        throw ShapeError("series of " + std::to_string(values.size()) +
                         " samples is not divisible by integration factor " +
                         std::to_string(factor));
    std::vector<T> out(values.size() / factor);
    for (std::size_t k = 0; k < out.size(); ++k) {
        T acc = values[k * factor];
        for (int j = 1; j < factor; ++j)
            acc += values[k * factor + j];
        out[k] = acc;
    }
    return out;
}

} // namespace

std::vector<double> integrate_stokes_i(std::span<const double> values, int factor) {
    return integrate(values, factor);
}

std::vector<double> integrate_stokes_i(std::span<const StokesSample<double>> samples, int factor) {
    std::vector<double> i(samples.size());
    for (std::size_t k = 0; k < samples.size(); ++k)
        i[k] = samples[k].i;
    return integrate<double>(i, factor);
}

std::vector<float> integrate_stokes_i(std::span<const float> values, int factor) {
    return integrate(values, factor);
}

void stokes_into(kernels::Isa isa, std::span<const DualPolSample> in, OutputMode mode,
                 std::span<float> out) {
    if (mode == OutputMode::ComplexVoltages)
        throw ConfigError("voltages have no Stokes form");
    if (out.size() < in.size() * components_per_sample(mode))
        throw ShapeError("Stokes output buffer too small");
    if (mode == OutputMode::StokesIQUV)
        kernels::stokes_iquv(isa, in.data(), out.data(), in.size());
    else
        kernels::stokes_i(isa, in.data(), out.data(), in.size());
}

} // namespace bf
