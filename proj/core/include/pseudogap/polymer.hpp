#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pseudogap/errors.hpp"
#include "pseudogap/rng.hpp"

namespace pseudogap {

// Upper bound on polymer block lengths; never pinned by the theory, so it is
// a plain configurable default.
inline constexpr std::size_t kDefaultMaxPolymerLength = 8;

// One block sigma: K sites of hoppings t_hat (all > 0) and potentials v_hat.
struct Polymer {
  std::vector<double> t;
  std::vector<double> v;

  std::size_t length() const { return t.size(); }
  void validate(std::size_t max_length = kDefaultMaxPolymerLength) const;
};

Polymer make_dimer(double t_even, double t_odd);

// Hopping distributions t_ev = c_ev + lambda_ev * x, t_od = c_od + lambda_od * x
// with x drawn independently per site, uniform on [-1,1] or Bernoulli on {-1,+1}.
struct DimerHoppingModel {
  enum class XDist { uniform, bernoulli };

  double c_ev = 1.0;
  double lambda_ev = 0.0;
  double c_od = 1.0;
  double lambda_od = 0.0;
  XDist x_dist = XDist::uniform;
  double p = 0.5;  // Bernoulli weight of x = +1

  void validate() const;
  bool even_random() const { return lambda_ev > 0.0; }
  bool odd_random() const { return lambda_od > 0.0; }
};

struct EnsembleAtom {
  Polymer polymer;
  double weight = 1.0;
};

// Probability distribution over polymers: either a finite atom list or the
// parametric dimer family above (sampled on the fly).
class PolymerEnsemble {
 public:
  static PolymerEnsemble discrete(std::vector<EnsembleAtom> atoms,
                                  std::size_t max_length = kDefaultMaxPolymerLength);
  static PolymerEnsemble dimer(const DimerHoppingModel& model);

  bool is_discrete() const { return !model_.has_value(); }
  const std::vector<EnsembleAtom>& atoms() const;
  const DimerHoppingModel& dimer_model() const;
  std::optional<DimerHoppingModel> dimer_model_opt() const { return model_; }

  std::size_t max_length() const { return max_length_; }
  double mean_length() const;

  Polymer sample(RealizationStream& stream) const;
  void sample_into(Polymer& out, RealizationStream& stream, int* atom_index = nullptr) const;

  // Finite set of polymers covering the support extremes (atoms for discrete
  // ensembles; support corners plus quadrature nodes for parametric ones).
  // Used for the C1..C4 constants and the criticality residuals.
  std::vector<Polymer> support_probe() const;

  // Gauss-Legendre discretization of a parametric ensemble; identity on
  // discrete ones.
  PolymerEnsemble discretize(int nodes) const;

 private:
  PolymerEnsemble() = default;

  std::vector<EnsembleAtom> atoms_;
  std::optional<DimerHoppingModel> model_;
  std::size_t max_length_ = kDefaultMaxPolymerLength;
};

std::vector<Polymer> sample_polymers(const PolymerEnsemble& ensemble, std::size_t count,
                                     RealizationStream& stream);

// Concatenates blocks into site sequences (t(0..N-1), v(0..N-1)), N = sum of lengths.
std::pair<std::vector<double>, std::vector<double>> flatten(std::span<const Polymer> polymers);

// Length-2 zero-potential ensemble for the random hopping model. Bernoulli x
// gives a finite atom list; uniform x stays parametric unless `discretization`
// asks for a quadrature approximation.
PolymerEnsemble dimer_to_ensemble(const DimerHoppingModel& model,
                                  std::optional<int> discretization = std::nullopt);

// Gauss-Legendre nodes/weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace pseudogap
