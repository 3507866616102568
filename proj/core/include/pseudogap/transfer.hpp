#pragma once

#include <span>
#include <vector>

#include "pseudogap/mat2.hpp"
#include "pseudogap/polymer.hpp"

namespace pseudogap {

// Single-site transfer matrix (1/t) [[v - E, -t^2], [1, 0]]; det = 1.
Mat2 single_site_transfer(double v, double t, double E);

// d/dE of the single-site matrix: (1/t) [[-1, 0], [0, 0]].
Mat2 single_site_transfer_dE(double t);

// Ordered product T_hat(site K-1) * ... * T_hat(site 0) over one block.
Mat2 polymer_transfer(const Polymer& sigma, double E);

// Analytic energy derivative of the block product (product-rule accumulation).
Mat2 polymer_transfer_dE(const Polymer& sigma, double E);

// log of the operator norm of the ordered product over many blocks, with
// periodic renormalization so long products cannot overflow.
double transfer_product_norm(std::span<const Polymer> polymers, double E);

struct CriticalReport {
  bool critical = false;
  double max_commutator = 0.0;  // worst pairwise commutator norm
  double max_atom_defect = 0.0; // worst distance from "hyperbolic or +-1"
  double min_abs_trace = 0.0;   // over non-identity atoms
};

// Checks Definition of a hyperbolic critical energy on a finite atom list:
// every T^Ec hyperbolic (|tr| > 2) or equal to +-1 within tol, all pairs
// commuting within tol.
CriticalReport detect_critical(const PolymerEnsemble& ensemble, double E_c, double tol = 1e-8);

struct AtomCriticalData {
  double kappa = 1.0;  // positive diagonal eigenvalue of sign * M T M^-1
  int sign = 1;        // sign in M T M^-1 = sign * D_kappa
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  int gap_label = 0;   // integer l_sigma, phase increment across the block in units of pi
                       // (filled by compute_critical_data, not by coeffs())
};

struct CriticalOptions {
  double tol = 1e-8;              // criticality residual tolerance
  double coeff_tol = 1e-8;        // identity-component residual in the (a,b,c) split
  double gamma0_tol = 1e-10;      // |<log kappa>| below this is the excluded drift-free case
  bool allow_c_sigma = false;     // accept ensembles with c_sigma != 0
  int discretization = 16;        // quadrature nodes for parametric ensembles
};

class PrueferLift;  // pruefer.hpp

struct CriticalData {
  double E_c = 0.0;
  Mat2 M = Mat2::identity();
  bool orientation_swapped = false;  // kappa -> 1/kappa, M -> J M applied
  std::vector<AtomCriticalData> atoms;  // aligned with ensemble().atoms() of the working ensemble
  std::vector<double> weights;
  double mean_log_kappa = 0.0;  // < 0 after orientation normalization
  double mean_length = 0.0;
  double mean_gap_label = 0.0;
  double C1 = 0.0, C2 = 0.0, C3 = 0.0, C4 = 0.0;
  double max_commutator = 0.0;
  double max_offdiag = 0.0;  // worst off-diagonal left by the joint diagonalization
  int parametric_gap_label = 0;  // label shared by the whole support of a parametric ensemble

  // On-the-fly coefficients for a polymer sampled from a continuous ensemble.
  // Does not fill gap_label.
  AtomCriticalData coeffs(const Polymer& sigma, double coeff_tol = 1e-8) const;

  // Cached label: atom_index from sampling a discrete ensemble, or -1 for a
  // draw from a parametric one.
  int label_for(int atom_index) const {
    return atom_index >= 0 ? atoms[static_cast<std::size_t>(atom_index)].gap_label
                           : parametric_gap_label;
  }
};

// Builds M from one hyperbolic atom's eigenvectors, verifies it diagonalizes
// every atom, extracts kappa/sign/(a,b,c) per atom and the constants C1..C4,
// and normalizes the orientation so that <log kappa> < 0.
CriticalData compute_critical_data(const PolymerEnsemble& ensemble, double E_c,
                                   const CriticalOptions& options = {});

// Exact Q factor of M T^{Ec+eps} M^-1 = sign * Q * D_{kappa(1+eps c)}.
Mat2 q_matrix(const CriticalData& critical, const Polymer& sigma, double eps);

// eps^2 remainder of Q relative to 1 + eps(aJ + bS).
Mat2 q_remainder(const CriticalData& critical, const Polymer& sigma, double eps);

}  // namespace pseudogap
