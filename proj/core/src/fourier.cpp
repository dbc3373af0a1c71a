#include "qrad/fourier.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <sstream>
#include <tuple>

#include "qrad/errors.hpp"

namespace qrad {

namespace {

// FFTW planning is not thread-safe; execution on distinct arrays is.  Plans
// are cached per (counts, sign), created with FFTW_ESTIMATE (purely heuristic,
// hence deterministic) and FFTW_UNALIGNED so they can run directly on
// std::vector storage.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(const std::array<int, 3>& counts, int sign) {
    const Key key{counts[0], counts[1], counts[2], sign};
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    // Scratch buffers only shape the plan; execution uses caller arrays.
    const std::size_t n = std::size_t(counts[0]) * counts[1] * counts[2];
    fftw_complex* in = fftw_alloc_complex(n);
    fftw_complex* out = fftw_alloc_complex(n);
    // Our linear index is x-fastest, so x is FFTW's last (fastest) dimension.
    fftw_plan plan = fftw_plan_dft_3d(counts[2], counts[1], counts[0], in, out,
                                      sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(in);
    fftw_free(out);
    if (!plan) throw ConfigError("dft3: FFTW failed to create a plan");
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  using Key = std::tuple<int, int, int, int>;
  std::mutex mutex_;
  std::map<Key, fftw_plan> plans_;
};

}  // namespace

bool grids_conjugate(const UniformGrid3& kgrid, const UniformGrid3& xgrid, double rtol) {
  if (kgrid.counts != xgrid.counts) return false;
  const double dk[3] = {kgrid.spacing.x, kgrid.spacing.y, kgrid.spacing.z};
  const double dx[3] = {xgrid.spacing.x, xgrid.spacing.y, xgrid.spacing.z};
  for (int a = 0; a < 3; ++a) {
    const double product = dx[a] * dk[a] * kgrid.counts[a] / (2.0 * M_PI);
    if (std::fabs(product - 1.0) > rtol) return false;
  }
  return true;
}

UniformGrid3 conjugate_position_grid(const UniformGrid3& kgrid, const Vec3& x_center,
                                     std::size_t node_budget) {
  const Vec3 dx{2.0 * M_PI / (kgrid.spacing.x * kgrid.counts[0]),
                2.0 * M_PI / (kgrid.spacing.y * kgrid.counts[1]),
                2.0 * M_PI / (kgrid.spacing.z * kgrid.counts[2])};
  const Vec3 origin{x_center.x - 0.5 * (kgrid.counts[0] - 1) * dx.x,
                    x_center.y - 0.5 * (kgrid.counts[1] - 1) * dx.y,
                    x_center.z - 0.5 * (kgrid.counts[2] - 1) * dx.z};
  return UniformGrid3::make(origin, dx, kgrid.counts, node_budget);
}

UniformGrid3 conjugate_wavenumber_grid(const UniformGrid3& xgrid, const Vec3& k_center,
                                       std::size_t node_budget) {
  const Vec3 dk{2.0 * M_PI / (xgrid.spacing.x * xgrid.counts[0]),
                2.0 * M_PI / (xgrid.spacing.y * xgrid.counts[1]),
                2.0 * M_PI / (xgrid.spacing.z * xgrid.counts[2])};
  const Vec3 origin{k_center.x - 0.5 * (xgrid.counts[0] - 1) * dk.x,
                    k_center.y - 0.5 * (xgrid.counts[1] - 1) * dk.y,
                    k_center.z - 0.5 * (xgrid.counts[2] - 1) * dk.z};
  return UniformGrid3::make(origin, dk, xgrid.counts, node_budget);
}

std::vector<cplx> dft3(const std::vector<cplx>& data, const std::array<int, 3>& counts, int sign) {
  const std::size_t n = std::size_t(counts[0]) * counts[1] * counts[2];
  if (data.size() != n) throw ConfigError("dft3: data size does not match counts");
  fftw_plan plan = PlanCache::instance().get(counts, sign);
  std::vector<cplx> out(n);
  // std::complex<double> is layout-compatible with fftw_complex.
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(data.data())),
                   reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

Field<cplx> dft_synthesize(const Field<cplx>& k_amplitudes, std::span<const cplx> phases,
                           const UniformGrid3& xgrid) {
  const UniformGrid3& kg = k_amplitudes.grid;
  if (!grids_conjugate(kg, xgrid)) {
    std::ostringstream msg;
    msg << "dft_synthesize: grids are not DFT-conjugate (need matching counts and "
           "dx*dk = 2*pi/N per axis)";
    throw ConfigError(msg.str());
  }
  const std::size_t n = k_amplitudes.size();
  if (!phases.empty() && phases.size() != n)
    throw ConfigError("dft_synthesize: phase array size does not match the momentum grid");
  require_finite(k_amplitudes, "dft_synthesize");

  const auto& counts = kg.counts;
  // Per-axis twiddles: k_n . x_j splits into  k_org . x_j  +  (n dk) . x_org
  // + 2*pi * n j / N, so arbitrary origins cost two rank-1 phase sweeps.
  std::array<std::vector<cplx>, 3> pre;   // exp(i n dk_a x_org_a)
  std::array<std::vector<cplx>, 3> post;  // exp(i k_org_a x_ja)
  const double korg[3] = {kg.origin.x, kg.origin.y, kg.origin.z};
  const double dk[3] = {kg.spacing.x, kg.spacing.y, kg.spacing.z};
  const double xorg[3] = {xgrid.origin.x, xgrid.origin.y, xgrid.origin.z};
  const double dx[3] = {xgrid.spacing.x, xgrid.spacing.y, xgrid.spacing.z};
  for (int a = 0; a < 3; ++a) {
    pre[a].resize(counts[a]);
    post[a].resize(counts[a]);
    for (int i = 0; i < counts[a]; ++i) {
      pre[a][i] = std::polar(1.0, i * dk[a] * xorg[a]);
      post[a][i] = std::polar(1.0, korg[a] * (xorg[a] + i * dx[a]));
    }
  }

  std::vector<cplx> in(n);
  std::size_t idx = 0;
  for (int iz = 0; iz < counts[2]; ++iz)
    for (int iy = 0; iy < counts[1]; ++iy) {
      const cplx tw_yz = pre[1][iy] * pre[2][iz];
      for (int ix = 0; ix < counts[0]; ++ix, ++idx) {
        cplx v = k_amplitudes.values[idx] * (pre[0][ix] * tw_yz);
        if (!phases.empty()) v *= phases[idx];
        in[idx] = v;
      }
    }

  std::vector<cplx> out = dft3(in, counts, +1);

  Field<cplx> result;
  result.grid = xgrid;
  result.values.resize(n);
  const double scale = dk[0] * dk[1] * dk[2] / std::pow(2.0 * M_PI, 1.5);
  idx = 0;
  for (int iz = 0; iz < counts[2]; ++iz)
    for (int iy = 0; iy < counts[1]; ++iy) {
      const cplx ph_yz = post[1][iy] * post[2][iz];
      for (int ix = 0; ix < counts[0]; ++ix, ++idx)
        result.values[idx] = out[idx] * (post[0][ix] * ph_yz) * scale;
    }
  return result;
}

}  // namespace qrad
