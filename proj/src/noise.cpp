#include "rydsim/noise.hpp"

namespace rydsim {

double vdw_interaction(const VdwGeometry& g) {
  if (g.c6 <= 0.0 || g.d <= 0.0)
    throw std::invalid_argument("vdw_interaction: need c6 > 0, d > 0");
  return g.c6 / std::pow(g.d, 6.0);
}

double interaction_fluctuation(const VdwGeometry& g, double delta_d) {
  if (std::abs(delta_d) >= g.d)
    throw std::invalid_argument("interaction_fluctuation: |delta_d| >= d");
  return g.c6 / std::pow(g.d + delta_d, 6.0) - vdw_interaction(g);
}

double ErrorSpec::interaction_shift() const {
  if (geometry.d > 0.0) return interaction_fluctuation(geometry, delta_d);
  return delta_v;
}

namespace {

Operator drive_sum(const LabHamiltonian& h, double t,
                   const std::function<bool(const DriveTerm&)>& keep,
                   Complex scale) {
  const long dim = dim_for(h.n_atoms);
  Operator H(dim, dim);
  for (const DriveTerm& d : h.drives) {
    if (!keep(d)) continue;
    const Complex amp = scale * d.envelope(t) * std::exp(kI * d.phase(t));
    if (amp == Complex{}) continue;
    Operator A = embed_single(d.site, Level::ryd, d.transition, h.n_atoms);
    H += amp * A;
    H += std::conj(amp) * Operator(A.adjoint());
  }
  return H;
}

int left_site(const LabHamiltonian& h) {
  int site = h.n_atoms;
  for (const DriveTerm& d : h.drives) site = std::min(site, d.site);
  return site;
}

Operator rr_sum(const LabHamiltonian& h, double shift) {
  const long dim = dim_for(h.n_atoms);
  Operator H(dim, dim);
  for (int k = 0; k + 1 < h.n_atoms; ++k)
    H += shift * rr_projector(k, k + 1, h.n_atoms);
  return H;
}

}  // namespace

Operator error_hamiltonian(const ErrorSpec& spec, const LabHamiltonian& h,
                           double t) {
  auto all = [](const DriveTerm&) { return true; };
  switch (spec.kind) {
    case ErrorKind::none:
      return Operator(dim_for(h.n_atoms), dim_for(h.n_atoms));
    case ErrorKind::global:
      return drive_sum(h, t, all, spec.epsilon);
    case ErrorKind::local: {
      const int site = left_site(h);
      return drive_sum(
          h, t, [site](const DriveTerm& d) { return d.site == site; },
          spec.epsilon);
    }
    case ErrorKind::interaction:
      return rr_sum(h, spec.interaction_shift());
    case ErrorKind::phase: {
      const int site = left_site(h);
      auto keep = [site](const DriveTerm& d) {
        return d.site == site && d.role == DriveRole::primary;
      };
      return drive_sum(h, t, keep, std::exp(kI * spec.delta_phi) - 1.0);
    }
    case ErrorKind::combined:
      return Operator(drive_sum(h, t, all, spec.epsilon) +
                      rr_sum(h, spec.interaction_shift()));
  }
  throw std::invalid_argument("error_hamiltonian: unknown kind");
}

EffectiveTwoLevel perturbed_effective(const ErrorSpec& spec,
                                      const EffectiveTwoLevel& e) {
  EffectiveTwoLevel out = e;
  const double eps = spec.epsilon;
  auto scaled = [](std::function<double(double)> f, double c) {
    return [f = std::move(f), c](double t) { return f ? c * f(t) : 0.0; };
  };
  switch (spec.kind) {
    case ErrorKind::none:
      break;
    case ErrorKind::global: {
      const double s2 = (1.0 + eps) * (1.0 + eps);
      out.delta_r = scaled(e.delta_r, s2);
      out.delta_g = scaled(e.delta_g, s2);
      out.omega_eff = scaled(e.omega_eff, s2);
      break;
    }
    case ErrorKind::local:
    case ErrorKind::phase: {
      const double s1 = 1.0 + eps;
      out.delta_r = scaled(e.delta_r, s1 * s1);
      out.delta_g = scaled(e.delta_g, s1 * s1);
      out.omega_eff = scaled(e.omega_eff, s1);
      break;
    }
    case ErrorKind::interaction: {
      const double dv = spec.interaction_shift();
      out.delta_r = [f = e.delta_r, dv](double t) {
        return (f ? f(t) : 0.0) + dv;
      };
      break;
    }
    case ErrorKind::combined: {
      const double s1 = 1.0 + eps;
      const double dv = spec.interaction_shift();
      out.delta_r = [f = e.delta_r, s1, dv](double t) {
        return s1 * (f ? f(t) : 0.0) + dv;
      };
      out.delta_g = scaled(e.delta_g, s1);
      out.omega_eff = scaled(e.omega_eff, s1);
      break;
    }
  }
  return out;
}

std::vector<LindbladChannel> collapse_operators(const NoiseParams& noise,
                                                int n_atoms) {
  if (noise.kappa0 < 0.0 || noise.kappa1 < 0.0 || noise.kappa_z < 0.0)
    throw std::invalid_argument("collapse_operators: negative rate");
  std::vector<LindbladChannel> chans;
  for (int j = 0; j < n_atoms; ++j) {
    if (noise.kappa0 > 0.0)
      chans.push_back({0.5 * noise.kappa0,
                       embed_single(j, Level::g0, Level::ryd, n_atoms)});
    if (noise.kappa1 > 0.0)
      chans.push_back({0.5 * noise.kappa1,
                       embed_single(j, Level::g1, Level::ryd, n_atoms)});
    if (noise.kappa_z > 0.0) {
      Operator sz = embed_single(j, Level::g0, Level::g0, n_atoms) +
                    embed_single(j, Level::g1, Level::g1, n_atoms) -
                    embed_single(j, Level::ryd, Level::ryd, n_atoms);
      chans.push_back({0.5 * noise.kappa_z, sz});
    }
  }
  return chans;
}

}  // namespace rydsim
