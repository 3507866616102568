#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "pseudogap/mat2.hpp"
#include "pseudogap/polymer.hpp"
#include "pseudogap/rng.hpp"
#include "pseudogap/transfer.hpp"

namespace pseudogap {

// Lifted phase theta = pi * half_turns + frac with frac in [0, pi). Keeping
// the winding as an integer leaves full double precision in the fractional
// part, which matters for rotation drifts as small as 1e-9 per step.
struct LiftedPhase {
  std::int64_t half_turns = 0;
  double frac = 0.0;

  double value() const;
  static LiftedPhase from(double theta);
};

// One site of the free Pruefer recursion at energy E; the image direction is
// lifted into the window (theta - pi/2, theta + 3pi/2). If log_r is given it
// accumulates log of the amplitude factor.
LiftedPhase free_pruefer_step(LiftedPhase theta, double v, double t, double E,
                              double* log_r = nullptr);
double free_pruefer_step(double theta, double v, double t, double E);

LiftedPhase free_pruefer_run(std::span<const double> t, std::span<const double> v, double E,
                             LiftedPhase theta0, double* log_r = nullptr);

// The circle map m of an SL(2,R) matrix: r(theta) e_{m(theta)} = M e_theta,
// m(theta + pi) = m(theta) + pi, m(0) in [-pi, pi), continuous lift.
class MModifier {
 public:
  explicit MModifier(const Mat2& M);
  double base() const { return m0_; }
  // phi in [0, pi) -> the unique representative in [m0, m0 + pi)
  double frac_image(double phi) const;
  LiftedPhase operator()(LiftedPhase theta) const;
  double operator()(double theta) const { return (*this)(LiftedPhase::from(theta)).value(); }
  double amplitude(double phi) const;  // r(phi)

 private:
  Mat2 M_;
  double m0_;
};

double m_modify(double theta, const Mat2& M);

struct PrueferTrajectory {
  enum class Granularity { per_site, per_polymer };
  Granularity granularity = Granularity::per_polymer;
  double energy = 0.0;   // E, or E_c + eps for polymer runs
  double epsilon = 0.0;  // offset from E_c (polymer runs)
  // Lifted phases theta(0..N). For per-polymer runs these are the modified
  // polymer phases with the pi * l_sigma gap-label offsets already removed.
  std::vector<double> theta;
  std::vector<double> log_r;
};

// Modified polymer Pruefer run over an explicit polymer sequence: per-site
// free recursion underneath, m-modification and gap-label renormalization at
// the block boundaries. theta0 is the initial free phase (Dirichlet 0 by
// default elsewhere).
PrueferTrajectory polymer_pruefer_run(std::span<const Polymer> polymers,
                                      const CriticalData& critical, double eps,
                                      double theta0 = 0.0);

// Gap label l_sigma: phase increment across one block at E_c, started from
// the invariant direction M^{-1} e_{pi/2}, in units of pi. Throws
// ConsistencyError if the increment is further than 1e-6 from an integer.
int gap_label(const Polymer& sigma, const CriticalData& critical);

// ---- Dyson-Schmidt dynamics -------------------------------------------------

// Projective infinity is represented as +inf (the compactification has a
// single point at infinity); finite doubles are ordinary points x = -cot(theta).
inline constexpr double kProjectiveInfinity = std::numeric_limits<double>::infinity();

// Moebius action matching x = -cot(theta): B.x = (B11 x - B12) / (B22 - B21 x).
double moebius_point(const Mat2& B, double x);

double ds_step_D(double x, double kappa);
double ds_step_Q(double x, double a, double b, double eps, const Mat2& A = Mat2::zero());

double x_of_phase(double theta);
double x_of_phase(const LiftedPhase& theta);

enum class Region { I, II, III_lt, III_gt, IV };
std::string region_name(Region r);

struct RegionParams {
  double k = 2.0;
  double K = 0.0;  // 2 C2 / (1 - 1/k)
  double eps = 0.0;
  double C1 = 0.0, C2 = 0.0, C3 = 0.0, C4 = 0.0;

  RegionParams(double k, double eps, double C1, double C2, double C3, double C4);
  RegionParams(double k, double eps, const CriticalData& critical);
};

Region classify_region(double x, const RegionParams& params);

// ---- Lemma samplers ---------------------------------------------------------

struct Lemma41Report {
  std::int64_t samples = 0;
  // one slot per statement of the lemma, in the paper's order
  std::int64_t tested[4] = {0, 0, 0, 0};
  std::int64_t violations[4] = {0, 0, 0, 0};
  double worst_margin[4];  // smallest slack seen; negative = violation

  Lemma41Report();
  std::int64_t total_violations() const {
    return violations[0] + violations[1] + violations[2] + violations[3];
  }
};

Lemma41Report check_lemma_4_1(const PolymerEnsemble& ensemble, const CriticalData& critical,
                              const RegionParams& params, std::int64_t samples,
                              RealizationStream& stream);

struct Lemma42Report {
  std::int64_t samples = 0;
  std::int64_t exits = 0;       // samples that actually left region II
  std::int64_t violations = 0;  // exits that did not land in III_lt
  double worst_margin = std::numeric_limits<double>::infinity();
};

Lemma42Report check_lemma_4_2(const PolymerEnsemble& ensemble, const CriticalData& critical,
                              const RegionParams& params, std::int64_t samples,
                              RealizationStream& stream);

// ---- Loops / renewal --------------------------------------------------------

struct LoopStats {
  std::int64_t crossings = 0;                 // completed passages of pi levels
  std::vector<std::int64_t> interarrivals;    // gaps between crossing times (first
                                              // measured from the start of the run)
};

// Crossing times of consecutive pi-multiples of the lifted phase.
std::vector<std::int64_t> detect_loops(std::span<const double> theta_eps);
LoopStats loop_stats(std::span<const double> theta_eps);

// Streaming rotation-number run: samples n_polymers blocks from the ensemble,
// iterates the per-site dynamics at E_c + eps and returns the per-realization
// IDS estimate together with the loop statistics of the renormalized phase.
struct RotationResult {
  double ids = 0.0;                  // (theta_M(N) - theta_M(0)) / (pi * n_sites)
  double theta_eps_increment = 0.0;  // theta^eps(N) - theta^eps(0)
  std::int64_t n_polymers = 0;
  std::int64_t n_sites = 0;
  LoopStats loops;
};

RotationResult rotation_run(const PolymerEnsemble& ensemble, const CriticalData& critical,
                            double eps, std::int64_t n_polymers, RealizationStream& stream,
                            bool collect_interarrivals = false, double theta0 = 0.0);

}  // namespace pseudogap
