#pragma once

#include "chy/grid.hpp"

namespace chy {

/// In-place complex FFT along one grid axis. Forward is unnormalized, the
/// inverse divides by the axis length.
void fft_axis(const GridChart& chart, cxd* data, int axis, bool inverse);

/// Full transform over all 2n axes.
void fft_all(const GridChart& chart, cxd* data, bool inverse);

/// Signed integer frequency for mode index k of an axis with R points.
inline int signed_mode(int k, int resolution) {
    return k <= resolution / 2 ? k : k - resolution;
}

/// Spectral d/dx along a real axis. Exact for band-limited data; the Nyquist
/// mode of an odd-order derivative is dropped so real fields stay real.
ScalarField axis_derivative(const ScalarField& f, int axis);
ComplexField axis_derivative(const ComplexField& f, int axis);

/// Holomorphic derivatives d/dz^j = (d/dx - i d/dy)/2 and the conjugate
/// d/dzbar^j = (d/dx + i d/dy)/2, j in [0, n).
ComplexField holomorphic_derivative(const ScalarField& f, int j, bool conjugated);
ComplexField holomorphic_derivative(const ComplexField& f, int j, bool conjugated);

/// Multiply the full Fourier transform by a user symbol s(k_signed...) given
/// the signed integer mode vector; used by the flat-operator fast paths.
ScalarField apply_flat_symbol(const ScalarField& f, const std::vector<double>& symbol);

/// Table of (1/2)|2 pi k / L|^2 per grid point in frequency layout: the
/// symbol of the flat Chern Laplacian -2 sum_i d_i d_ibar for h = identity.
std::vector<double> flat_chern_symbol(const GridChart& chart);

/// True if the field's declared band limit fits strictly under the Nyquist
/// frequency of its chart (always true when no limit is declared).
bool band_limit_resolved(const ScalarField& f);

} // namespace chy
