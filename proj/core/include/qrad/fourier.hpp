#pragma once

#include <span>
#include <vector>

#include "qrad/grid.hpp"

namespace qrad {

/// True when xgrid is the DFT-conjugate of kgrid: matching counts and
/// spacing_x * spacing_k = 2*pi / N on every axis (within rtol).
bool grids_conjugate(const UniformGrid3& kgrid, const UniformGrid3& xgrid, double rtol = 1e-12);

/// Build the conjugate position grid of a momentum grid, centred at x_center.
UniformGrid3 conjugate_position_grid(const UniformGrid3& kgrid, const Vec3& x_center,
                                     std::size_t node_budget = UniformGrid3::default_node_budget);

/// Build the conjugate momentum grid of a position grid, centred at k_center.
UniformGrid3 conjugate_wavenumber_grid(const UniformGrid3& xgrid, const Vec3& k_center,
                                       std::size_t node_budget = UniformGrid3::default_node_budget);

/// Synthesise a position-space field from momentum amplitudes:
///
///   f(x_j) = (2*pi)^(-3/2) * dk^3 * sum_n A_n * phase_n * exp(i k_n . x_j)
///
/// i.e. the Riemann-sum approximation of the continuum Fourier transform, so a
/// unit-normalised Gaussian amplitude profile synthesises to a unit-normalised
/// packet (Parseval: integral |f|^2 dx = sum |A|^2 dk^3 exactly, up to
/// rounding).  `phases` (optional, empty = all ones) lets callers apply
/// per-node evolution factors without copying the amplitude field.
///
/// Requires conjugate grids; arbitrary grid origins are handled exactly via
/// twiddle factors.  Backed by FFTW with deterministic (FFTW_ESTIMATE) plans.
Field<cplx> dft_synthesize(const Field<cplx>& k_amplitudes, std::span<const cplx> phases,
                           const UniformGrid3& xgrid);

/// Unnormalised 3-D DFT of a value array laid out on `counts` (x-fastest),
/// sign = -1 forward / +1 backward.  Utility for spectral derivatives.
std::vector<cplx> dft3(const std::vector<cplx>& data, const std::array<int, 3>& counts, int sign);

}  // namespace qrad
