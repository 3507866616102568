#include "pseudogap/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pseudogap/pruefer.hpp"

namespace pseudogap {

Mat2 single_site_transfer(double v, double t, double E) {
  if (!(t > 0.0)) throw DomainError("single_site_transfer: hopping must be positive");
  return {(v - E) / t, -t, 1.0 / t, 0.0};
}

Mat2 single_site_transfer_dE(double t) { return {-1.0 / t, 0.0, 0.0, 0.0}; }

Mat2 polymer_transfer(const Polymer& sigma, double E) {
  Mat2 prod = Mat2::identity();
  for (std::size_t k = 0; k < sigma.length(); ++k)
    prod = single_site_transfer(sigma.v[k], sigma.t[k], E) * prod;
  return prod;
}

Mat2 polymer_transfer_dE(const Polymer& sigma, double E) {
  const std::size_t K = sigma.length();
  // prefix[k] = T(k-1) * ... * T(0)
  std::vector<Mat2> prefix(K + 1);
  prefix[0] = Mat2::identity();
  for (std::size_t k = 0; k < K; ++k)
    prefix[k + 1] = single_site_transfer(sigma.v[k], sigma.t[k], E) * prefix[k];
  Mat2 dT = Mat2::zero();
  Mat2 suffix = Mat2::identity();  // T(K-1) * ... * T(k+1), built backwards
  for (std::size_t k = K; k-- > 0;) {
    dT = dT + suffix * single_site_transfer_dE(sigma.t[k]) * prefix[k];
    suffix = suffix * single_site_transfer(sigma.v[k], sigma.t[k], E);
  }
  return dT;
}

double transfer_product_norm(std::span<const Polymer> polymers, double E) {
  if (polymers.empty()) throw DomainError("transfer_product_norm: empty polymer array");
  Mat2 acc = Mat2::identity();
  double log_sum = 0.0;
  int since_renorm = 0;
  for (const auto& sigma : polymers) {
    acc = polymer_transfer(sigma, E) * acc;
    if (++since_renorm >= 16) {
      const double n = acc.norm();
      log_sum += std::log(n);
      acc = (1.0 / n) * acc;
      since_renorm = 0;
    }
  }
  return log_sum + std::log(acc.norm());
}

namespace {

double atom_defect(const Mat2& T) {
  if (std::abs(T.trace()) > 2.0) return 0.0;
  const Mat2 id = Mat2::identity();
  return std::min((T - id).norm(), (T + id).norm());
}

}  // namespace

namespace detail {
Mat2 q_remainder_impl(const CriticalData& critical, const Polymer& sigma,
                      const AtomCriticalData& ac, double eps);
}  // namespace detail

CriticalReport detect_critical(const PolymerEnsemble& ensemble, double E_c, double tol) {
  const auto& atoms = ensemble.atoms();  // throws UnsupportedOperationError if parametric
  std::vector<Mat2> mats;
  mats.reserve(atoms.size());
  for (const auto& a : atoms) mats.push_back(polymer_transfer(a.polymer, E_c));
  CriticalReport rep;
  rep.min_abs_trace = std::numeric_limits<double>::infinity();
  for (const auto& T : mats) {
    rep.max_atom_defect = std::max(rep.max_atom_defect, atom_defect(T));
    if (std::abs(T.trace()) > 2.0)
      rep.min_abs_trace = std::min(rep.min_abs_trace, std::abs(T.trace()));
  }
  for (std::size_t i = 0; i < mats.size(); ++i)
    for (std::size_t j = i + 1; j < mats.size(); ++j)
      rep.max_commutator = std::max(rep.max_commutator, commutator(mats[i], mats[j]).norm());
  rep.critical = rep.max_atom_defect <= tol && rep.max_commutator <= tol;
  return rep;
}

namespace {

// M from the unit eigenvectors of one hyperbolic representative, scaled to
// det M = 1, with a deterministic overall sign.
Mat2 diagonalizing_basis(const Mat2& T) {
  const double tr = T.trace();
  const double s = tr >= 0.0 ? 1.0 : -1.0;
  const double disc = std::sqrt(tr * tr - 4.0);
  const double lam_big = 0.5 * (tr + s * disc);
  const double lam_small = 1.0 / lam_big;
  auto eigvec = [&](double lam) {
    Vec2 u{T.a12, lam - T.a11};
    Vec2 w{lam - T.a22, T.a21};
    Vec2 v = u.norm() >= w.norm() ? u : w;
    const double n = v.norm();
    return Vec2{v.x / n, v.y / n};
  };
  const Vec2 vb = eigvec(lam_big);
  Vec2 vs = eigvec(lam_small);
  double dv = vb.x * vs.y - vb.y * vs.x;
  if (std::abs(dv) < 1e-12)
    throw ConsistencyError("compute_critical_data: eigenvectors nearly collinear");
  if (dv < 0.0) {
    vs = {-vs.x, -vs.y};
    dv = -dv;
  }
  const double scale = 1.0 / std::sqrt(dv);
  const Mat2 V{vb.x * scale, vs.x * scale, vb.y * scale, vs.y * scale};
  Mat2 M = V.inverse();
  for (double e : {M.a11, M.a12, M.a21, M.a22}) {
    if (std::abs(e) > 1e-14) {
      if (e < 0.0) M = -1.0 * M;
      break;
    }
  }
  return M;
}

struct DiagResult {
  double kappa;
  int sign;
  double offdiag;
};

DiagResult diagonalize_with(const Mat2& M, const Mat2& Minv, const Mat2& T) {
  const Mat2 G = M * T * Minv;
  const int s = G.trace() >= 0.0 ? 1 : -1;
  const double kappa = s * G.a11;
  if (!(kappa > 0.0))
    throw ConsistencyError("critical data: diagonalized atom has nonpositive kappa");
  const double scale = std::max(1.0, std::abs(G.a11));
  double off = std::max(std::abs(G.a12), std::abs(G.a21));
  off = std::max(off, std::abs(s * G.a22 - 1.0 / kappa) * std::min(1.0, kappa));
  return {kappa, s, off / scale};
}

}  // namespace

AtomCriticalData CriticalData::coeffs(const Polymer& sigma, double coeff_tol) const {
  const Mat2 Minv = M.inverse();
  const Mat2 T = polymer_transfer(sigma, E_c);
  const Mat2 G = M * T * Minv;
  const int s = G.trace() >= 0.0 ? 1 : -1;
  const double kappa = s * G.a11;
  if (!(kappa > 0.0)) throw ConsistencyError("coeffs: nonpositive kappa");
  const Mat2 dG = M * polymer_transfer_dE(sigma, E_c) * Minv;
  // X = s * dG * D_kappa^{-1} decomposed over {1, J, S, P}
  const double x11 = s * dG.a11 / kappa;
  const double x12 = s * dG.a12 * kappa;
  const double x21 = s * dG.a21 / kappa;
  const double x22 = s * dG.a22 * kappa;
  AtomCriticalData out;
  out.kappa = kappa;
  out.sign = s;
  out.a = 0.5 * (x21 - x12);
  out.b = 0.5 * (x21 + x12);
  out.c = 0.5 * (x11 - x22);
  const double id_coeff = 0.5 * (x11 + x22);
  const double scale = std::max(1.0, std::abs(out.a) + std::abs(out.b) + std::abs(out.c));
  if (std::abs(id_coeff) > coeff_tol * scale)
    throw ConsistencyError("coeffs: identity component " + std::to_string(id_coeff) +
                           " in the expansion; ensemble is not critical at this energy");
  return out;
}

CriticalData compute_critical_data(const PolymerEnsemble& ensemble, double E_c,
                                   const CriticalOptions& options) {
  const PolymerEnsemble working =
      ensemble.is_discrete() ? ensemble : ensemble.discretize(options.discretization);
  const CriticalReport rep = detect_critical(working, E_c, options.tol);
  if (!rep.critical)
    throw ConsistencyError(
        "compute_critical_data: not a hyperbolic critical energy (atom defect " +
        std::to_string(rep.max_atom_defect) + ", commutator " +
        std::to_string(rep.max_commutator) + ")");

  const auto& atoms = working.atoms();
  const Mat2* hyper = nullptr;
  std::vector<Mat2> mats;
  mats.reserve(atoms.size());
  double best_tr = 2.0;
  for (const auto& a : atoms) {
    mats.push_back(polymer_transfer(a.polymer, E_c));
    if (std::abs(mats.back().trace()) > best_tr) {
      best_tr = std::abs(mats.back().trace());
      hyper = &mats.back();
    }
  }
  // also consider support corners, a parametric ensemble can be hyperbolic
  // even if a node sits close to kappa = 1
  const std::vector<Polymer> probe = ensemble.support_probe();
  std::vector<Mat2> probe_mats;
  probe_mats.reserve(probe.size());
  for (const auto& p : probe) {
    probe_mats.push_back(polymer_transfer(p, E_c));
    if (std::abs(probe_mats.back().trace()) > best_tr) {
      best_tr = std::abs(probe_mats.back().trace());
      hyper = &probe_mats.back();
    }
  }
  if (!hyper)
    throw DegenerateEnsembleError(
        "compute_critical_data: every transfer matrix equals +-1, no basis to diagonalize");

  CriticalData data;
  data.E_c = E_c;
  data.M = diagonalizing_basis(*hyper);
  data.max_commutator = rep.max_commutator;
  data.weights.reserve(atoms.size());
  for (const auto& a : atoms) data.weights.push_back(a.weight);
  data.mean_length = working.mean_length();

  auto pass = [&](const Mat2& M) {
    const Mat2 Minv = M.inverse();
    double offmax = 0.0;
    double logmean = 0.0;
    for (std::size_t i = 0; i < mats.size(); ++i) {
      const DiagResult d = diagonalize_with(M, Minv, mats[i]);
      offmax = std::max(offmax, d.offdiag);
      logmean += data.weights[i] * std::log(d.kappa);
    }
    for (const auto& Tm : probe_mats) offmax = std::max(offmax, diagonalize_with(M, Minv, Tm).offdiag);
    return std::pair<double, double>{offmax, logmean};
  };

  auto [offmax, logmean] = pass(data.M);
  if (offmax > options.tol)
    throw ConsistencyError("compute_critical_data: joint diagonalization residual " +
                           std::to_string(offmax) + " exceeds tolerance");
  if (std::abs(logmean) < options.gamma0_tol)
    throw UnsupportedCaseError("compute_critical_data: <log kappa> = 0, drift-free case excluded");
  if (logmean > 0.0) {
    data.orientation_swapped = true;
    data.M = Mat2::rotation_j() * data.M;
    std::tie(offmax, logmean) = pass(data.M);
  }
  data.mean_log_kappa = logmean;
  data.max_offdiag = offmax;

  // per-atom expansion coefficients and gap labels
  data.atoms.reserve(atoms.size());
  double mean_label = 0.0;
  double max_abs_c = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    AtomCriticalData ac = data.coeffs(atoms[i].polymer, options.coeff_tol);
    ac.gap_label = gap_label(atoms[i].polymer, data);
    max_abs_c = std::max(max_abs_c, std::abs(ac.c));
    mean_label += data.weights[i] * ac.gap_label;
    data.atoms.push_back(ac);
  }
  data.mean_gap_label = mean_label;
  if (!options.allow_c_sigma && max_abs_c > options.coeff_tol)
    throw UnsupportedCaseError("compute_critical_data: c_sigma = " + std::to_string(max_abs_c) +
                               " != 0; pass allow_c_sigma to absorb it into kappa");

  // constants C1..C4 over the support probe (includes corner polymers)
  double c1 = std::numeric_limits<double>::infinity();
  double c2 = 0.0, c3 = 0.0, c4 = 0.0;
  auto fold_constants = [&](const Polymer& sigma, const AtomCriticalData& ac) {
    c1 = std::min(c1, ac.a - std::abs(ac.b));
    c2 = std::max(c2, ac.a + std::abs(ac.b));
    c4 = std::max(c4, ac.kappa);
    for (double eps : {1.0, -1.0, 0.5, -0.5, 0.25, -0.25, 0.1, -0.1}) {
      if (1.0 + eps * ac.c <= 0.05) continue;
      c3 = std::max(c3, detail::q_remainder_impl(data, sigma, ac, eps).norm() / (eps * eps));
    }
    if (ac.a < -1e-10 || ac.a * ac.a - ac.b * ac.b - ac.c * ac.c < -1e-8)
      throw ConsistencyError("compute_critical_data: expansion coefficients violate a >= 0, "
                             "a^2 >= b^2 + c^2");
  };
  for (std::size_t i = 0; i < atoms.size(); ++i) fold_constants(atoms[i].polymer, data.atoms[i]);
  const int probe_label = data.atoms.empty() ? 0 : data.atoms.front().gap_label;
  for (const auto& p : probe) {
    fold_constants(p, data.coeffs(p, options.coeff_tol));
    if (!ensemble.is_discrete() && gap_label(p, data) != probe_label)
      throw ConsistencyError("compute_critical_data: gap label varies across a connected support");
  }
  data.parametric_gap_label = probe_label;
  if (!(c1 > 0.0))
    throw UnsupportedCaseError("compute_critical_data: C1 = min(a - |b|) = " +
                               std::to_string(c1) + " is not positive");
  data.C1 = c1;
  data.C2 = c2;
  data.C3 = c3;
  data.C4 = c4;
  return data;
}

namespace detail {
Mat2 q_remainder_impl(const CriticalData& critical, const Polymer& sigma,
                      const AtomCriticalData& ac, double eps) {
  const Mat2 G = critical.M * polymer_transfer(sigma, critical.E_c + eps) * critical.M.inverse();
  const double kap = ac.kappa * (1.0 + eps * ac.c);
  const Mat2 Q = static_cast<double>(ac.sign) * (G * Mat2::diag(1.0 / kap, kap));
  return Q - Mat2::identity() - (eps * ac.a) * Mat2::rotation_j() - (eps * ac.b) * Mat2::symm_s();
}
}  // namespace detail

Mat2 q_matrix(const CriticalData& critical, const Polymer& sigma, double eps) {
  const AtomCriticalData ac = critical.coeffs(sigma);
  const Mat2 G = critical.M * polymer_transfer(sigma, critical.E_c + eps) * critical.M.inverse();
  const double kap = ac.kappa * (1.0 + eps * ac.c);
  return static_cast<double>(ac.sign) * (G * Mat2::diag(1.0 / kap, kap));
}

Mat2 q_remainder(const CriticalData& critical, const Polymer& sigma, double eps) {
  return detail::q_remainder_impl(critical, sigma, critical.coeffs(sigma), eps);
}

}  // namespace pseudogap
