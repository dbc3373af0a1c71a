#include "qrad/relativistic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

#include "qrad/errors.hpp"
#include "qrad/fourier.hpp"
#include "qrad/reduce.hpp"
#include "qrad/threading.hpp"

namespace qrad {

namespace {

constexpr double boundary_rel = 1e-8;       ///< max boundary / peak amplitude
constexpr double support_rel = 1e-10;       ///< amplitude floor defining the
                                            ///< effective wavenumber support

double gaussian_profile(const Vec3& k, const Vec3& k0, const Vec3& sigma) {
  double v = 1.0;
  for (int a = 0; a < 3; ++a) {
    const double u = (k[a] - k0[a]) / sigma[a];
    v *= std::pow(2.0 * M_PI * sigma[a] * sigma[a], -0.25) * std::exp(-0.25 * u * u);
  }
  return v;
}

/// Reject when the synthesized field leaks onto the periodic boundary.
void check_boundary(const UniformGrid3& grid, const std::vector<double>& mag2,
                    const char* what) {
  double max2 = 0.0, boundary2 = 0.0;
  for (std::size_t i = 0; i < mag2.size(); ++i) {
    max2 = std::max(max2, mag2[i]);
    if (grid.is_boundary(i)) boundary2 = std::max(boundary2, mag2[i]);
  }
  if (max2 == 0.0) return;
  if (boundary2 > boundary_rel * boundary_rel * max2) {
    std::ostringstream msg;
    msg << what << ": boundary amplitude is " << std::sqrt(boundary2 / max2)
        << " of the peak (limit " << boundary_rel
        << "); the state has reached the box edge -- enlarge the box or shorten the window";
    throw NumericalRejection(msg.str());
  }
}

void validate_params(const RelativisticParams& p, const char* who) {
  if (!(p.mass > 0.0) || !(p.hbar > 0.0) || !(p.light_speed > 0.0))
    throw ConfigError(std::string(who) + ": mass, hbar and light speed must be positive");
}

}  // namespace

double relativistic_omega(const Vec3& k, const RelativisticParams& p) {
  const double hk = p.hbar * k.norm();
  const double mc = p.mass * p.light_speed;
  return p.light_speed * std::sqrt(hk * hk + mc * mc) / p.hbar;
}

// ---------------------------------------------------------------------------
// KGState
// ---------------------------------------------------------------------------

KGState KGState::make(std::vector<KGComponent> components, const RelativisticParams& params,
                      const UniformGrid3& kgrid) {
  validate_params(params, "KGState");
  if (components.empty()) throw ConfigError("KGState: no components");
  for (const auto& c : components) {
    if (c.branch != +1 && c.branch != -1)
      throw ConfigError("KGState: branch must be +1 or -1");
    if (!(std::min({c.sigma_k.x, c.sigma_k.y, c.sigma_k.z}) > 0.0))
      throw ConfigError("KGState: sigma_k must be positive on every axis");
  }

  KGState st;
  st.kgrid_ = kgrid;
  st.params_ = params;
  const std::size_t n = kgrid.node_count();
  st.plus_.assign(n, cplx{0.0, 0.0});
  st.minus_.assign(n, cplx{0.0, 0.0});
  parallel_for(n, [&](std::size_t i) {
    const Vec3 k = kgrid.position(i);
    for (const auto& c : components) {
      const cplx v = c.amplitude * gaussian_profile(k, c.k_center, c.sigma_k) *
                     std::polar(1.0, -dot(k, c.x_offset));
      (c.branch > 0 ? st.plus_[i] : st.minus_[i]) += v;
    }
  });

  double radius = 0.0;
  for (const auto& c : components) {
    const double sx = 0.5 / std::min({c.sigma_k.x, c.sigma_k.y, c.sigma_k.z});
    radius = std::max(radius, c.x_offset.norm() + 3.4 * sx);
  }
  st.envelope_radius_ = radius;
  st.finalise();
  return st;
}

KGState KGState::make_from_amplitudes(const UniformGrid3& kgrid, std::vector<cplx> plus,
                                      std::vector<cplx> minus,
                                      const RelativisticParams& params) {
  validate_params(params, "KGState");
  const std::size_t n = kgrid.node_count();
  if (plus.size() != n || minus.size() != n)
    throw ConfigError("KGState: amplitude arrays must match the wavenumber grid");
  KGState st;
  st.kgrid_ = kgrid;
  st.params_ = params;
  st.plus_ = std::move(plus);
  st.minus_ = std::move(minus);
  // No envelope metadata for raw amplitudes: fall back to the half-diagonal
  // of the conjugate position box.
  const Vec3 half{M_PI / kgrid.spacing.x, M_PI / kgrid.spacing.y, M_PI / kgrid.spacing.z};
  st.envelope_radius_ = half.norm();
  st.finalise();
  return st;
}

void KGState::finalise() {
  const std::size_t n = kgrid_.node_count();
  omega_.resize(n);
  for (std::size_t i = 0; i < n; ++i) omega_[i] = relativistic_omega(kgrid_.position(i), params_);

  const double dk3 = kgrid_.cell_volume();
  const double coeff = params_.hbar / (params_.mass * params_.light_speed * params_.light_speed);
  const double qp = params_.charge * coeff *
                    pairwise_transform_sum<double>(
                        n, [&](std::size_t i) { return omega_[i] * std::norm(plus_[i]); }) *
                    dk3;
  const double qm = -params_.charge * coeff *
                    pairwise_transform_sum<double>(
                        n, [&](std::size_t i) { return omega_[i] * std::norm(minus_[i]); }) *
                    dk3;
  const double total = std::fabs(qp) + std::fabs(qm);
  if (!(total > 0.0) || !std::isfinite(total))
    throw ConfigError("KGState: state carries no charge, cannot normalise");
  const double s2 = std::fabs(params_.charge) / total;
  const double s = std::sqrt(s2);
  for (auto& a : plus_) a *= s;
  for (auto& a : minus_) a *= s;
  charge_plus_ = qp * s2;
  charge_minus_ = qm * s2;

  // Effective support: nodes whose amplitude is above support_rel of the max.
  double amax = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    amax = std::max(amax, std::max(std::abs(plus_[i]), std::abs(minus_[i])));
  double wmin = std::numeric_limits<double>::infinity(), wmax = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::max(std::abs(plus_[i]), std::abs(minus_[i])) > support_rel * amax) {
      wmin = std::min(wmin, omega_[i]);
      wmax = std::max(wmax, omega_[i]);
    }
  }
  omega_min_ = wmin;
  omega_max_ = wmax;
}

KGFields KGState::fields(double t, const UniformGrid3& xgrid) const {
  const std::size_t n = kgrid_.node_count();
  Field<cplx> amp, damp, gx, gy, gz;
  for (Field<cplx>* f : {&amp, &damp, &gx, &gy, &gz}) {
    f->grid = kgrid_;
    f->values.resize(n);
  }
  parallel_for(n, [&](std::size_t i) {
    const cplx ep = std::polar(1.0, -omega_[i] * t);
    const cplx a = plus_[i] * ep + minus_[i] * std::conj(ep);
    const cplx da = cplx(0.0, -omega_[i]) * plus_[i] * ep +
                    cplx(0.0, omega_[i]) * minus_[i] * std::conj(ep);
    const Vec3 k = kgrid_.position(i);
    amp.values[i] = a;
    damp.values[i] = da;
    gx.values[i] = cplx(0.0, k.x) * a;
    gy.values[i] = cplx(0.0, k.y) * a;
    gz.values[i] = cplx(0.0, k.z) * a;
  });

  KGFields out;
  out.phi = dft_synthesize(amp, {}, xgrid);
  out.dphi_dt = dft_synthesize(damp, {}, xgrid);
  Field<cplx> fx = dft_synthesize(gx, {}, xgrid);
  Field<cplx> fy = dft_synthesize(gy, {}, xgrid);
  Field<cplx> fz = dft_synthesize(gz, {}, xgrid);
  out.grad.grid = xgrid;
  out.grad.values.resize(out.phi.size());
  for (std::size_t i = 0; i < out.phi.size(); ++i)
    out.grad.values[i] = CVec3{fx.values[i], fy.values[i], fz.values[i]};

  std::vector<double> mag2(out.phi.size());
  for (std::size_t i = 0; i < out.phi.size(); ++i) mag2[i] = std::norm(out.phi.values[i]);
  check_boundary(xgrid, mag2, "KGState::fields");
  return out;
}

namespace {
struct KGAcc {
  cplx phi{0.0, 0.0}, dphi{0.0, 0.0}, gx{0.0, 0.0}, gy{0.0, 0.0}, gz{0.0, 0.0};
  KGAcc& operator+=(const KGAcc& o) {
    phi += o.phi;
    dphi += o.dphi;
    gx += o.gx;
    gy += o.gy;
    gz += o.gz;
    return *this;
  }
};
}  // namespace

KGSample KGState::sample_at(double t, const Vec3& x) const {
  const std::size_t n = kgrid_.node_count();
  const KGAcc acc = pairwise_transform_sum<KGAcc>(n, [&](std::size_t i) {
    const Vec3 k = kgrid_.position(i);
    const cplx ep = std::polar(1.0, -omega_[i] * t);
    const cplx a = plus_[i] * ep + minus_[i] * std::conj(ep);
    const cplx da = cplx(0.0, -omega_[i]) * plus_[i] * ep +
                    cplx(0.0, omega_[i]) * minus_[i] * std::conj(ep);
    const cplx phase = std::polar(1.0, dot(k, x));
    KGAcc out;
    out.phi = a * phase;
    out.dphi = da * phase;
    out.gx = cplx(0.0, k.x) * out.phi;
    out.gy = cplx(0.0, k.y) * out.phi;
    out.gz = cplx(0.0, k.z) * out.phi;
    return out;
  });
  const double scale = kgrid_.cell_volume() * std::pow(2.0 * M_PI, -1.5);
  return KGSample{acc.phi * scale, acc.dphi * scale,
                  CVec3{acc.gx * scale, acc.gy * scale, acc.gz * scale}};
}

double KGState::max_angular_frequency() const {
  const bool plus = has_plus(), minus = has_minus();
  if (plus && minus) return 2.0 * omega_max_;
  return omega_max_ - omega_min_;
}

double KGState::extent99(double t) const {
  return envelope_radius_ + params_.light_speed * std::fabs(t);
}

void kg_current(const KGFields& fields, const RelativisticParams& params, Field<double>& rho,
                Field<Vec3>& current) {
  const std::size_t n = fields.phi.size();
  if (fields.dphi_dt.size() != n || fields.grad.size() != n)
    throw ConfigError("kg_current: field sizes disagree");
  rho.grid = fields.phi.grid;
  current.grid = fields.phi.grid;
  rho.values.resize(n);
  current.values.resize(n);
  const double c = params.light_speed;
  const double rfac = -params.charge * params.hbar / (params.mass * c * c);
  const double jfac = params.charge * params.hbar / params.mass;
  for (std::size_t i = 0; i < n; ++i) {
    const cplx pc = std::conj(fields.phi.values[i]);
    rho.values[i] = rfac * (pc * fields.dphi_dt.values[i]).imag();
    const CVec3& g = fields.grad.values[i];
    current.values[i] =
        Vec3{(pc * g[0]).imag(), (pc * g[1]).imag(), (pc * g[2]).imag()} * jfac;
  }
}

void kg_current_at(const KGSample& sample, const RelativisticParams& params, double& rho,
                   Vec3& current) {
  const double c = params.light_speed;
  const cplx pc = std::conj(sample.phi);
  rho = -params.charge * params.hbar / (params.mass * c * c) * (pc * sample.dphi_dt).imag();
  current = Vec3{(pc * sample.grad[0]).imag(), (pc * sample.grad[1]).imag(),
                 (pc * sample.grad[2]).imag()} *
            (params.charge * params.hbar / params.mass);
}

void KGCurrentSource::evaluate(double t, Field<double>& rho, Field<Vec3>& current) const {
  const KGFields f = state_.fields(t, xgrid_);
  kg_current(f, state_.params(), rho, current);
}

std::string KGCurrentSource::kind() const {
  if (state_.has_plus() && state_.has_minus()) return "kg_mixed";
  return state_.has_plus() ? "kg_plus" : "kg_minus";
}

// ---------------------------------------------------------------------------
// Dirac
// ---------------------------------------------------------------------------

DiracBranchBasis dirac_branch_basis(const Vec3& k, const RelativisticParams& params) {
  using Eigen::Matrix4cd;
  using Eigen::Vector4cd;
  const double ch = params.light_speed * params.hbar;
  const double mc2 = params.mass * params.light_speed * params.light_speed;
  const cplx i{0.0, 1.0};

  // Dirac representation: H = [[m c^2 I, c hbar sigma.k], [c hbar sigma.k, -m c^2 I]].
  Eigen::Matrix2cd sk;
  sk << ch * k.z, ch * (k.x - i * k.y), ch * (k.x + i * k.y), -ch * k.z;
  Matrix4cd H = Matrix4cd::Zero();
  H.topLeftCorner<2, 2>() = mc2 * Eigen::Matrix2cd::Identity();
  H.bottomRightCorner<2, 2>() = -mc2 * Eigen::Matrix2cd::Identity();
  H.topRightCorner<2, 2>() = sk;
  H.bottomLeftCorner<2, 2>() = sk;

  Eigen::SelfAdjointEigenSolver<Matrix4cd> solver(H);
  if (solver.info() != Eigen::Success)
    throw NumericalRejection("dirac_branch_basis: eigensolver failed");
  const auto& ev = solver.eigenvalues();  // ascending: -E, -E, +E, +E
  if (!(ev[1] < 0.0 && ev[2] > 0.0) || ev[2] - ev[1] < 1e-10 * mc2) {
    std::ostringstream msg;
    msg << "dirac_branch_basis: branch separation " << ev[2] - ev[1]
        << " too small at k = (" << k.x << ", " << k.y << ", " << k.z << ")";
    throw NumericalRejection(msg.str());
  }

  // Projector onto each sign eigenspace from the numerical eigenvectors, then
  // a deterministic in-pair basis: project the rest-frame unit spinors (e0,e1
  // for positive energy, e2,e3 for negative), Gram-Schmidt, and fix phases by
  // making the largest-magnitude entry real positive.  These projections are
  // bounded below by 1/2 in norm for all k, so the basis is continuous in k.
  const auto& V = solver.eigenvectors();
  const Eigen::Matrix4cd Pm = V.col(0) * V.col(0).adjoint() + V.col(1) * V.col(1).adjoint();
  const Eigen::Matrix4cd Pp = V.col(2) * V.col(2).adjoint() + V.col(3) * V.col(3).adjoint();

  auto canonical_pair = [](const Matrix4cd& P, int s0, int s1) {
    std::array<Vector4cd, 2> u;
    u[0] = P.col(s0);
    u[0].normalize();
    Vector4cd v = P.col(s1);
    v -= u[0] * (u[0].adjoint() * v);
    v.normalize();
    u[1] = v;
    for (auto& w : u) {
      int imax = 0;
      for (int j = 1; j < 4; ++j)
        if (std::abs(w[j]) > std::abs(w[imax])) imax = j;
      const cplx ph = w[imax] / std::abs(w[imax]);
      w *= std::conj(ph);
    }
    return u;
  };
  const auto up = canonical_pair(Pp, 0, 1);
  const auto um = canonical_pair(Pm, 2, 3);

  DiracBranchBasis basis;
  const double ep = 0.5 * (ev[2] + ev[3]);
  const double em = 0.5 * (ev[0] + ev[1]);
  basis.energy = {ep, ep, em, em};
  for (int b = 0; b < 2; ++b)
    for (int s = 0; s < 4; ++s) {
      basis.spinor[b][s] = up[b][s];
      basis.spinor[2 + b][s] = um[b][s];
    }
  return basis;
}

DiracState DiracState::make(std::vector<DiracComponent> components,
                            const RelativisticParams& params, const UniformGrid3& kgrid) {
  validate_params(params, "DiracState");
  if (components.empty()) throw ConfigError("DiracState: no components");
  for (const auto& c : components) {
    if (c.branch < 0 || c.branch > 3) throw ConfigError("DiracState: branch must be 0..3");
    if (!(std::min({c.sigma_k.x, c.sigma_k.y, c.sigma_k.z}) > 0.0))
      throw ConfigError("DiracState: sigma_k must be positive on every axis");
  }
  DiracState st;
  st.kgrid_ = kgrid;
  st.params_ = params;
  const std::size_t n = kgrid.node_count();
  for (auto& a : st.amp_) a.assign(n, cplx{0.0, 0.0});
  parallel_for(n, [&](std::size_t i) {
    const Vec3 k = kgrid.position(i);
    for (const auto& c : components)
      st.amp_[c.branch][i] += c.amplitude * gaussian_profile(k, c.k_center, c.sigma_k) *
                              std::polar(1.0, -dot(k, c.x_offset));
  });
  double radius = 0.0;
  for (const auto& c : components) {
    const double sx = 0.5 / std::min({c.sigma_k.x, c.sigma_k.y, c.sigma_k.z});
    radius = std::max(radius, c.x_offset.norm() + 3.4 * sx);
  }
  st.envelope_radius_ = radius;
  st.finalise();
  return st;
}

DiracState DiracState::make_from_amplitudes(const UniformGrid3& kgrid,
                                            std::array<std::vector<cplx>, 4> amplitudes,
                                            const RelativisticParams& params) {
  validate_params(params, "DiracState");
  const std::size_t n = kgrid.node_count();
  for (const auto& a : amplitudes)
    if (a.size() != n)
      throw ConfigError("DiracState: amplitude arrays must match the wavenumber grid");
  DiracState st;
  st.kgrid_ = kgrid;
  st.params_ = params;
  st.amp_ = std::move(amplitudes);
  const Vec3 half{M_PI / kgrid.spacing.x, M_PI / kgrid.spacing.y, M_PI / kgrid.spacing.z};
  st.envelope_radius_ = half.norm();
  st.finalise();
  return st;
}

void DiracState::finalise() {
  const std::size_t n = kgrid_.node_count();
  basis_.resize(n);
  parallel_for(n, [&](std::size_t i) {
    basis_[i] = dirac_branch_basis(kgrid_.position(i), params_);
  });

  const double norm2 = pairwise_transform_sum<double>(n, [&](std::size_t i) {
                         double v = 0.0;
                         for (int b = 0; b < 4; ++b) v += std::norm(amp_[b][i]);
                         return v;
                       }) *
                       kgrid_.cell_volume();
  if (!(norm2 > 0.0) || !std::isfinite(norm2))
    throw ConfigError("DiracState: zero state, cannot normalise");
  const double s = 1.0 / std::sqrt(norm2);
  for (auto& a : amp_)
    for (auto& v : a) v *= s;

  double amax = 0.0;
  for (int b = 0; b < 4; ++b)
    for (std::size_t i = 0; i < n; ++i) amax = std::max(amax, std::abs(amp_[b][i]));
  double emin = std::numeric_limits<double>::infinity(), emax = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double a_pos = std::max(std::abs(amp_[0][i]), std::abs(amp_[1][i]));
    double a_neg = std::max(std::abs(amp_[2][i]), std::abs(amp_[3][i]));
    if (a_pos > support_rel * amax) has_pos_ = true;
    if (a_neg > support_rel * amax) has_neg_ = true;
    if (std::max(a_pos, a_neg) > support_rel * amax) {
      emin = std::min(emin, basis_[i].energy[0]);
      emax = std::max(emax, basis_[i].energy[0]);
    }
  }
  energy_min_ = emin;
  energy_max_ = emax;
}

Field<Spinor4> DiracState::synthesize(double t, const UniformGrid3& xgrid) const {
  const std::size_t n = kgrid_.node_count();
  std::array<Field<cplx>, 4> amp;
  for (auto& f : amp) {
    f.grid = kgrid_;
    f.values.resize(n);
  }
  const double inv_hbar = 1.0 / params_.hbar;
  parallel_for(n, [&](std::size_t i) {
    const DiracBranchBasis& bb = basis_[i];
    cplx coeff[4];
    for (int b = 0; b < 4; ++b)
      coeff[b] = amp_[b][i] * std::polar(1.0, -bb.energy[b] * t * inv_hbar);
    for (int s = 0; s < 4; ++s) {
      cplx v{0.0, 0.0};
      for (int b = 0; b < 4; ++b) v += coeff[b] * bb.spinor[b][s];
      amp[s].values[i] = v;
    }
  });

  std::array<Field<cplx>, 4> comp;
  for (int s = 0; s < 4; ++s) comp[s] = dft_synthesize(amp[s], {}, xgrid);

  Field<Spinor4> out;
  out.grid = xgrid;
  out.values.resize(comp[0].size());
  std::vector<double> mag2(comp[0].size());
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    double m2 = 0.0;
    for (int s = 0; s < 4; ++s) {
      out.values[i][s] = comp[s].values[i];
      m2 += std::norm(comp[s].values[i]);
    }
    mag2[i] = m2;
  }
  check_boundary(xgrid, mag2, "DiracState::synthesize");
  return out;
}

namespace {
struct SpinorAcc {
  std::array<cplx, 4> v{};
  SpinorAcc& operator+=(const SpinorAcc& o) {
    for (int s = 0; s < 4; ++s) v[s] += o.v[s];
    return *this;
  }
};
}  // namespace

Spinor4 DiracState::sample_at(double t, const Vec3& x) const {
  const std::size_t n = kgrid_.node_count();
  const double inv_hbar = 1.0 / params_.hbar;
  const SpinorAcc acc = pairwise_transform_sum<SpinorAcc>(n, [&](std::size_t i) {
    const DiracBranchBasis& bb = basis_[i];
    const cplx phase = std::polar(1.0, dot(kgrid_.position(i), x));
    SpinorAcc out;
    for (int b = 0; b < 4; ++b) {
      const cplx coeff = amp_[b][i] * std::polar(1.0, -bb.energy[b] * t * inv_hbar) * phase;
      for (int s = 0; s < 4; ++s) out.v[s] += coeff * bb.spinor[b][s];
    }
    return out;
  });
  const double scale = kgrid_.cell_volume() * std::pow(2.0 * M_PI, -1.5);
  Spinor4 psi;
  for (int s = 0; s < 4; ++s) psi[s] = acc.v[s] * scale;
  return psi;
}

double DiracState::max_angular_frequency() const {
  if (has_pos_ && has_neg_) return 2.0 * energy_max_ / params_.hbar;
  return (energy_max_ - energy_min_) / params_.hbar;
}

double DiracState::extent99(double t) const {
  return envelope_radius_ + params_.light_speed * std::fabs(t);
}

void dirac_current(const Field<Spinor4>& psi, const RelativisticParams& params,
                   Field<double>& rho, Field<Vec3>& current) {
  const std::size_t n = psi.size();
  rho.grid = psi.grid;
  current.grid = psi.grid;
  rho.values.resize(n);
  current.values.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    dirac_current_at(psi.values[i], params, rho.values[i], current.values[i]);
}

void dirac_current_at(const Spinor4& psi, const RelativisticParams& params, double& rho,
                      Vec3& current) {
  const double q = params.charge;
  const double cq = params.light_speed * q;
  const cplx a = psi[0], b = psi[1], c = psi[2], d = psi[3];
  rho = q * (std::norm(a) + std::norm(b) + std::norm(c) + std::norm(d));
  const cplx ad = std::conj(a) * d, bc = std::conj(b) * c;
  const cplx ac = std::conj(a) * c, bd = std::conj(b) * d;
  current.x = 2.0 * cq * (ad + bc).real();
  current.y = 2.0 * cq * (ad.imag() - bc.imag());
  current.z = 2.0 * cq * (ac - bd).real();
}

void DiracCurrentSource::evaluate(double t, Field<double>& rho, Field<Vec3>& current) const {
  const Field<Spinor4> psi = state_.synthesize(t, xgrid_);
  dirac_current(psi, state_.params(), rho, current);
}

// ---------------------------------------------------------------------------
// Zitterbewegung diagnostics
// ---------------------------------------------------------------------------

ZitterReport zitterbewegung_report(const VecSeries& I1, const RelativisticParams& params,
                                   double max_frequency, Window window,
                                   double peak_floor_rel) {
  ZitterReport rep;
  const double mc2_h =
      params.mass * params.light_speed * params.light_speed / params.hbar;
  rep.gap_frequency = 2.0 * mc2_h;

  const double resolve = max_frequency > 0.0 ? max_frequency : rep.gap_frequency;
  const double spp = I1.times.samples_per_period(resolve);
  if (spp < 8.0) {
    std::ostringstream msg;
    msg << "zitterbewegung_report: sampling gives " << spp
        << " samples per period at angular frequency " << resolve << " (need >= 8)";
    throw NumericalRejection(msg.str());
  }

  rep.spec = spectrum(I1, window, 1e-3, /*remove_mean=*/true);
  const double bin = rep.spec.bin_width;
  rep.low_band_power = rep.spec.band_power(0.0, mc2_h);
  rep.high_band_power =
      rep.spec.band_power(rep.gap_frequency - bin, std::numeric_limits<double>::infinity());
  if (rep.high_band_power > 0.0)
    rep.band_ratio = rep.low_band_power / rep.high_band_power;
  else
    rep.band_ratio = rep.low_band_power > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;

  // Bins 0..1 carry the mean-removal remnant and any slow drift; everything
  // above counts as a real spectral feature.
  const double dc_edge = 1.5 * bin;
  for (const auto& p : rep.spec.peaks)
    if (p.omega > dc_edge) rep.nondc_peaks.push_back(p);
  rep.peak_floor = peak_floor_rel * I1.max_abs();
  double nondc_max = 0.0;
  for (std::size_t k = 0; k < rep.spec.amplitude.size(); ++k)
    if (rep.spec.omega[k] > dc_edge) nondc_max = std::max(nondc_max, rep.spec.amplitude[k]);
  rep.quiet = nondc_max <= rep.peak_floor;

  if (!rep.nondc_peaks.empty()) {
    rep.lowest_peak_omega = rep.nondc_peaks.front().omega;
    for (const auto& p : rep.nondc_peaks)
      rep.lowest_peak_omega = std::min(rep.lowest_peak_omega, p.omega);
    rep.peaks_at_gap = true;
    for (const auto& p : rep.nondc_peaks)
      if (p.omega < rep.gap_frequency - bin) rep.peaks_at_gap = false;
  }
  return rep;
}

}  // namespace qrad
