#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace brox::fft {

/// Coefficients ĉ_0..ĉ_{M/2} of a real grid function: ĉ_k = (1/M) Σ_j f_j e^{-2πijk/M}.
void forward(std::span<const double> values, std::span<std::complex<double>> half_spectrum);

/// Inverse of forward(): f_j = Σ_k ĉ_k e^{2πijk/M} with Hermitian completion.
void backward(std::span<const std::complex<double>> half_spectrum, std::span<double> values);

}  // namespace brox::fft
