#include "pseudogap/pruefer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace pseudogap {

namespace {
constexpr double kPi = std::numbers::pi;
}

double LiftedPhase::value() const { return kPi * static_cast<double>(half_turns) + frac; }

LiftedPhase LiftedPhase::from(double theta) {
  double k = std::floor(theta / kPi);
  double frac = theta - k * kPi;
  // roundoff can push frac onto pi
  if (frac >= kPi) {
    frac -= kPi;
    k += 1.0;
  }
  if (frac < 0.0) {
    frac += kPi;
    k -= 1.0;
  }
  return {static_cast<std::int64_t>(k), frac};
}

LiftedPhase free_pruefer_step(LiftedPhase theta, double v, double t, double E, double* log_r) {
  const double c = std::cos(theta.frac);
  const double s = std::sin(theta.frac);
  // single-site transfer applied to e_theta; the half-turn parity only flips
  // the sign of the vector, which the mod-2pi lift below absorbs exactly.
  const double w1 = ((v - E) * c - t * t * s) / t;
  const double w2 = c / t;
  if (log_r) *log_r += 0.5 * std::log(w1 * w1 + w2 * w2);
  const double phi = std::atan2(w2, w1);  // in (-pi, pi]
  // lift of the image with increment in [-pi/2, 3pi/2) relative to frac
  double d = std::fmod(phi - theta.frac, 2.0 * kPi);
  if (d < 0.0) d += 2.0 * kPi;
  if (d >= 1.5 * kPi) d -= 2.0 * kPi;
  double nf = theta.frac + d;
  std::int64_t nk = theta.half_turns;
  while (nf >= kPi) {
    nf -= kPi;
    ++nk;
  }
  while (nf < 0.0) {
    nf += kPi;
    --nk;
  }
  return {nk, nf};
}

double free_pruefer_step(double theta, double v, double t, double E) {
  return free_pruefer_step(LiftedPhase::from(theta), v, t, E).value();
}

LiftedPhase free_pruefer_run(std::span<const double> t, std::span<const double> v, double E,
                             LiftedPhase theta0, double* log_r) {
  LiftedPhase th = theta0;
  for (std::size_t n = 0; n < t.size(); ++n) th = free_pruefer_step(th, v[n], t[n], E, log_r);
  return th;
}

MModifier::MModifier(const Mat2& M) : M_(M) {
  if (std::abs(M.det() - 1.0) > 1e-9)
    throw DomainError("MModifier: matrix must have unit determinant");
  double m0 = std::atan2(M.a21, M.a11);  // angle of M e_0
  if (m0 >= kPi) m0 -= 2.0 * kPi;       // m(0) in [-pi, pi)
  m0_ = m0;
}

double MModifier::frac_image(double phi) const {
  const double c = std::cos(phi);
  const double s = std::sin(phi);
  const double a = std::atan2(M_.a21 * c + M_.a22 * s, M_.a11 * c + M_.a12 * s);
  // unique representative of a (mod 2pi) inside [m0, m0 + pi)
  double m = a + 2.0 * kPi * std::ceil((m0_ - a) / (2.0 * kPi));
  if (m >= m0_ + kPi) m -= 2.0 * kPi;  // guards the ceil against roundoff
  if (m < m0_) m = m0_;
  return m;
}

LiftedPhase MModifier::operator()(LiftedPhase theta) const {
  const double m = frac_image(theta.frac);
  double k = std::floor(m / kPi);
  double frac = m - k * kPi;
  if (frac >= kPi) {
    frac -= kPi;
    k += 1.0;
  }
  return {theta.half_turns + static_cast<std::int64_t>(k), frac};
}

double MModifier::amplitude(double phi) const {
  const double c = std::cos(phi);
  const double s = std::sin(phi);
  return std::hypot(M_.a11 * c + M_.a12 * s, M_.a21 * c + M_.a22 * s);
}

double m_modify(double theta, const Mat2& M) { return MModifier(M)(theta); }

int gap_label(const Polymer& sigma, const CriticalData& critical) {
  const Mat2 Minv = critical.M.inverse();
  // invariant direction M^{-1} e_{pi/2}
  const double phi0 = std::atan2(Minv.a22, Minv.a12);
  const LiftedPhase th0 = LiftedPhase::from(phi0);
  const LiftedPhase th1 = free_pruefer_run(sigma.t, sigma.v, critical.E_c, th0);
  const double inc = (static_cast<double>(th1.half_turns - th0.half_turns)) * kPi +
                     (th1.frac - th0.frac);
  const double l = std::round(inc / kPi);
  if (std::abs(inc - l * kPi) > 1e-6)
    throw ConsistencyError("gap_label: phase increment " + std::to_string(inc) +
                           " is not an integer multiple of pi; ensemble not critical");
  if (l < 0.0 || l > static_cast<double>(sigma.length()))
    throw ConsistencyError("gap_label: label outside {0..L}");
  return static_cast<int>(l);
}

PrueferTrajectory polymer_pruefer_run(std::span<const Polymer> polymers,
                                      const CriticalData& critical, double eps, double theta0) {
  const MModifier mod(critical.M);
  PrueferTrajectory out;
  out.granularity = PrueferTrajectory::Granularity::per_polymer;
  out.energy = critical.E_c + eps;
  out.epsilon = eps;
  out.theta.reserve(polymers.size() + 1);
  out.log_r.reserve(polymers.size() + 1);

  LiftedPhase th = LiftedPhase::from(theta0);
  const LiftedPhase m0 = mod(th);
  std::int64_t cum_label = 0;
  double log_r_free = 0.0;
  out.theta.push_back(m0.value());
  out.log_r.push_back(std::log(mod.amplitude(th.frac)));
  for (const auto& sigma : polymers) {
    for (std::size_t s = 0; s < sigma.length(); ++s)
      th = free_pruefer_step(th, sigma.v[s], sigma.t[s], critical.E_c + eps, &log_r_free);
    cum_label += gap_label(sigma, critical);
    const LiftedPhase m = mod(th);
    out.theta.push_back(static_cast<double>(m.half_turns - cum_label) * kPi + m.frac);
    out.log_r.push_back(log_r_free + std::log(mod.amplitude(th.frac)));
  }
  return out;
}

// ---- Dyson-Schmidt ----------------------------------------------------------

double moebius_point(const Mat2& B, double x) {
  double p, q;
  if (std::isinf(x)) {
    p = 1.0;
    q = 0.0;
  } else if (std::abs(x) > 1e12) {
    // homogeneous fallback keeps huge finite points exact
    p = 1.0;
    q = 1.0 / x;
  } else {
    p = x;
    q = 1.0;
  }
  const double pp = B.a11 * p - B.a12 * q;
  const double qq = B.a22 * q - B.a21 * p;
  if (qq == 0.0) return kProjectiveInfinity;
  const double r = pp / qq;
  if (std::isinf(r)) return kProjectiveInfinity;
  return r;
}

double ds_step_D(double x, double kappa) {
  if (!(kappa > 0.0)) throw DomainError("ds_step_D: kappa must be positive");
  if (std::isinf(x)) return kProjectiveInfinity;
  return kappa * kappa * x;
}

double ds_step_Q(double x, double a, double b, double eps, const Mat2& A) {
  const Mat2 Q = Mat2::identity() + (eps * a) * Mat2::rotation_j() + (eps * b) * Mat2::symm_s() +
                 (eps * eps) * A;
  return moebius_point(Q, x);
}

double x_of_phase(double theta) { return x_of_phase(LiftedPhase::from(theta)); }

double x_of_phase(const LiftedPhase& theta) {
  if (theta.frac == 0.0) return kProjectiveInfinity;
  return -std::cos(theta.frac) / std::sin(theta.frac);
}

std::string region_name(Region r) {
  switch (r) {
    case Region::I: return "I";
    case Region::II: return "II";
    case Region::III_lt: return "III<";
    case Region::III_gt: return "III>";
    case Region::IV: return "IV";
  }
  return "?";
}

RegionParams::RegionParams(double k_, double eps_, double C1_, double C2_, double C3_, double C4_)
    : k(k_), eps(eps_), C1(C1_), C2(C2_), C3(C3_), C4(C4_) {
  if (!(k > 1.0)) throw DomainError("RegionParams: need k > 1");
  if (!(eps > 0.0)) throw DomainError("RegionParams: need eps > 0");
  K = 2.0 * C2 / (1.0 - 1.0 / k);
  const double lo = K * eps;
  const double mid = 2.0 * C4 * C4 * K * eps;
  const double hi = 1.0 / (K * eps);
  if (!(0.0 < lo && lo < mid && mid < hi))
    throw DomainError("RegionParams: region boundaries out of order, eps too large for this k");
}

RegionParams::RegionParams(double k_, double eps_, const CriticalData& critical)
    : RegionParams(k_, eps_, critical.C1, critical.C2, critical.C3, critical.C4) {}

Region classify_region(double x, const RegionParams& params) {
  if (std::isinf(x)) return Region::IV;  // the point at infinity
  const double lo = params.K * params.eps;
  const double mid = 2.0 * params.C4 * params.C4 * lo;
  const double hi = 1.0 / lo;
  if (x <= 0.0) return Region::I;
  if (x < lo) return Region::II;
  if (x < mid) return Region::III_lt;
  if (x <= hi) return Region::III_gt;
  return Region::IV;
}

// ---- Lemma samplers ---------------------------------------------------------

Lemma41Report::Lemma41Report() {
  for (double& m : worst_margin) m = std::numeric_limits<double>::infinity();
}

Lemma41Report check_lemma_4_1(const PolymerEnsemble& ensemble, const CriticalData& critical,
                              const RegionParams& params, std::int64_t samples,
                              RealizationStream& stream) {
  Lemma41Report rep;
  rep.samples = samples;
  const double lo = params.K * params.eps;
  const double hi = 1.0 / lo;
  const double log_lo = std::log(lo), log_hi = std::log(hi);
  Polymer sigma;
  auto fold = [&rep](int i, double margin) {
    ++rep.tested[i];
    rep.worst_margin[i] = std::min(rep.worst_margin[i], margin);
    if (margin < 0.0) ++rep.violations[i];
  };
  for (std::int64_t n = 0; n < samples; ++n) {
    ensemble.sample_into(sigma, stream);
    const AtomCriticalData ac = critical.coeffs(sigma);
    const Mat2 Q = q_matrix(critical, sigma, params.eps);
    const double kap2 = ac.kappa * ac.kappa;

    // (1) on R_III: Q.x <= k x, and (2) (DQ).x <= k kappa^2 x
    {
      const double x = std::exp(stream.uniform(log_lo, log_hi));
      const double qx = moebius_point(Q, x);
      fold(0, params.k * x - qx);
      fold(1, params.k * kap2 * x - kap2 * qx);
    }
    // (3) x > 0 and (QD).x <= 0 imply D.x > (K eps)^-1
    {
      const double x = std::exp(stream.uniform(log_lo - 9.0, log_hi + 9.0));
      const double dx = ds_step_D(x, ac.kappa);
      const double qdx = moebius_point(Q, dx);
      if (qdx <= 0.0) fold(2, dx - hi);
    }
    // (4) x <= 0 implies Q.x < K eps
    {
      const double u = stream.next_double();
      const double x = u < 0.05 ? 0.0 : -std::exp(stream.uniform(log_lo - 9.0, log_hi + 9.0));
      fold(3, lo - moebius_point(Q, x));
    }
  }
  return rep;
}

Lemma42Report check_lemma_4_2(const PolymerEnsemble& ensemble, const CriticalData& critical,
                              const RegionParams& params, std::int64_t samples,
                              RealizationStream& stream) {
  Lemma42Report rep;
  rep.samples = samples;
  const double lo = params.K * params.eps;
  const double mid = 2.0 * params.C4 * params.C4 * lo;
  Polymer sigma, sigma_d;
  for (std::int64_t n = 0; n < samples; ++n) {
    const double x = stream.uniform(0.0, lo);  // region II
    ensemble.sample_into(sigma_d, stream);
    const double kap_d = critical.coeffs(sigma_d).kappa;
    double x_next;
    if (stream.bernoulli(0.5)) {
      // integer time: next half-step applies D only
      x_next = ds_step_D(x, kap_d);
    } else {
      // half-integer time: Q of this block, then D of the next
      ensemble.sample_into(sigma, stream);
      x_next = ds_step_D(moebius_point(q_matrix(critical, sigma, params.eps), x), kap_d);
    }
    const Region r = classify_region(x_next, params);
    if (r == Region::II) continue;
    ++rep.exits;
    rep.worst_margin = std::min(rep.worst_margin, mid - x_next);
    if (r != Region::III_lt) ++rep.violations;
  }
  return rep;
}

// ---- Loops ------------------------------------------------------------------

namespace {

struct LoopTracker {
  std::int64_t next_level = 0;
  std::int64_t last_time = 0;
  LoopStats stats;
  bool collect = true;

  void init(std::int64_t half_turns) { next_level = half_turns + 1; }
  void advance(std::int64_t half_turns, std::int64_t time) {
    while (half_turns >= next_level) {
      ++stats.crossings;
      if (collect) stats.interarrivals.push_back(time - last_time);
      last_time = time;
      ++next_level;
    }
  }
};

}  // namespace

LoopStats loop_stats(std::span<const double> theta_eps) {
  LoopStats out;
  if (theta_eps.empty()) return out;
  LoopTracker tracker;
  tracker.init(LiftedPhase::from(theta_eps[0]).half_turns);
  for (std::size_t n = 1; n < theta_eps.size(); ++n)
    tracker.advance(LiftedPhase::from(theta_eps[n]).half_turns, static_cast<std::int64_t>(n));
  return tracker.stats;
}

std::vector<std::int64_t> detect_loops(std::span<const double> theta_eps) {
  return loop_stats(theta_eps).interarrivals;
}

RotationResult rotation_run(const PolymerEnsemble& ensemble, const CriticalData& critical,
                            double eps, std::int64_t n_polymers, RealizationStream& stream,
                            bool collect_interarrivals, double theta0) {
  const MModifier mod(critical.M);
  RotationResult out;
  out.n_polymers = n_polymers;

  LiftedPhase th = LiftedPhase::from(theta0);
  const LiftedPhase m_start = mod(th);
  std::int64_t cum_label = 0;
  LoopTracker tracker;
  tracker.collect = collect_interarrivals;
  tracker.init(m_start.half_turns);

  Polymer sigma;
  int atom_index = -1;
  const double E = critical.E_c + eps;
  for (std::int64_t n = 0; n < n_polymers; ++n) {
    ensemble.sample_into(sigma, stream, &atom_index);
    for (std::size_t s = 0; s < sigma.length(); ++s)
      th = free_pruefer_step(th, sigma.v[s], sigma.t[s], E);
    out.n_sites += static_cast<std::int64_t>(sigma.length());
    cum_label += critical.label_for(atom_index);
    tracker.advance(mod(th).half_turns - cum_label, n + 1);
  }
  const LiftedPhase m_end = mod(th);
  const double modified_increment =
      static_cast<double>(m_end.half_turns - m_start.half_turns) * kPi + (m_end.frac - m_start.frac);
  out.theta_eps_increment = modified_increment - kPi * static_cast<double>(cum_label);
  out.ids = modified_increment / (kPi * static_cast<double>(out.n_sites));
  out.loops = std::move(tracker.stats);
  return out;
}

}  // namespace pseudogap
