#include "pseudogap/polymer.hpp"

#include <cmath>
#include <numbers>

namespace pseudogap {

void Polymer::validate(std::size_t max_length) const {
  if (t.empty() || t.size() != v.size())
    throw ConfigError("polymer: hopping/potential arrays empty or of unequal length");
  if (t.size() > max_length)
    throw ConfigError("polymer: length " + std::to_string(t.size()) + " exceeds maximum " +
                      std::to_string(max_length));
  for (double ti : t)
    if (!(ti > 0.0)) throw ConfigError("polymer: hoppings must be strictly positive");
  for (double vi : v)
    if (!std::isfinite(vi)) throw ConfigError("polymer: potentials must be finite");
}

Polymer make_dimer(double t_even, double t_odd) { return Polymer{{t_even, t_odd}, {0.0, 0.0}}; }

void DimerHoppingModel::validate() const {
  if (!(c_ev > 0.0) || !(c_od > 0.0)) throw ConfigError("dimer model: centers must be positive");
  if (lambda_ev < 0.0 || lambda_od < 0.0)
    throw ConfigError("dimer model: spreads must be nonnegative");
  if (!(c_ev - lambda_ev > 0.0) || !(c_od - lambda_od > 0.0))
    throw ConfigError("dimer model: hopping support must stay compact in (0, inf), need lambda < c");
  if (x_dist == XDist::bernoulli && (p < 0.0 || p > 1.0))
    throw ConfigError("dimer model: Bernoulli parameter p must lie in [0,1]");
}

PolymerEnsemble PolymerEnsemble::discrete(std::vector<EnsembleAtom> atoms,
                                          std::size_t max_length) {
  if (atoms.empty()) throw ConfigError("ensemble: no atoms");
  double total = 0.0;
  for (const auto& a : atoms) {
    a.polymer.validate(max_length);
    if (!(a.weight > 0.0) || a.weight > 1.0)
      throw ConfigError("ensemble: atom weights must lie in (0, 1]");
    total += a.weight;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw ConfigError("ensemble: weights sum to " + std::to_string(total) + ", expected 1");
  PolymerEnsemble e;
  e.atoms_ = std::move(atoms);
  e.max_length_ = max_length;
  return e;
}

PolymerEnsemble PolymerEnsemble::dimer(const DimerHoppingModel& model) {
  model.validate();
  PolymerEnsemble e;
  e.model_ = model;
  e.max_length_ = kDefaultMaxPolymerLength;
  return e;
}

const std::vector<EnsembleAtom>& PolymerEnsemble::atoms() const {
  if (!is_discrete())
    throw UnsupportedOperationError("ensemble: atom list requested from a parametric ensemble; "
                                    "discretize() it first");
  return atoms_;
}

const DimerHoppingModel& PolymerEnsemble::dimer_model() const {
  if (is_discrete()) throw UnsupportedOperationError("ensemble: not a parametric dimer ensemble");
  return *model_;
}

double PolymerEnsemble::mean_length() const {
  if (!is_discrete()) return 2.0;
  double m = 0.0;
  for (const auto& a : atoms_) m += a.weight * static_cast<double>(a.polymer.length());
  return m;
}

void PolymerEnsemble::sample_into(Polymer& out, RealizationStream& stream,
                                  int* atom_index) const {
  if (is_discrete()) {
    // cumulative inversion on one uniform draw
    const double u = stream.next_double();
    double acc = 0.0;
    std::size_t pick = atoms_.size() - 1;
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      acc += atoms_[i].weight;
      if (u < acc) {
        pick = i;
        break;
      }
    }
    out = atoms_[pick].polymer;
    if (atom_index) *atom_index = static_cast<int>(pick);
    return;
  }
  const DimerHoppingModel& m = *model_;
  auto draw_x = [&]() {
    return m.x_dist == DimerHoppingModel::XDist::uniform ? stream.uniform(-1.0, 1.0)
                                                         : (stream.bernoulli(m.p) ? 1.0 : -1.0);
  };
  const double t_ev = m.even_random() ? m.c_ev + m.lambda_ev * draw_x() : m.c_ev;
  const double t_od = m.odd_random() ? m.c_od + m.lambda_od * draw_x() : m.c_od;
  out.t.assign({t_ev, t_od});
  out.v.assign({0.0, 0.0});
  if (atom_index) *atom_index = -1;
}

Polymer PolymerEnsemble::sample(RealizationStream& stream) const {
  Polymer p;
  sample_into(p, stream);
  return p;
}

std::vector<Polymer> PolymerEnsemble::support_probe() const {
  std::vector<Polymer> probe;
  if (is_discrete()) {
    probe.reserve(atoms_.size());
    for (const auto& a : atoms_) probe.push_back(a.polymer);
    return probe;
  }
  const DimerHoppingModel& m = *model_;
  std::vector<double> evs = {m.c_ev - m.lambda_ev, m.c_ev + m.lambda_ev};
  std::vector<double> ods = {m.c_od - m.lambda_od, m.c_od + m.lambda_od};
  if (!m.even_random()) evs = {m.c_ev};
  if (!m.odd_random()) ods = {m.c_od};
  if (m.x_dist == DimerHoppingModel::XDist::uniform) {
    // interior nodes on top of the support corners
    std::vector<double> nodes, weights;
    gauss_legendre(8, nodes, weights);
    for (double x : nodes) {
      if (m.even_random()) evs.push_back(m.c_ev + m.lambda_ev * x);
      if (m.odd_random()) ods.push_back(m.c_od + m.lambda_od * x);
    }
  }
  for (double te : evs)
    for (double to : ods) probe.push_back(make_dimer(te, to));
  return probe;
}

PolymerEnsemble PolymerEnsemble::discretize(int n) const {
  if (is_discrete()) return *this;
  if (n < 1) throw DomainError("discretize: need at least one node");
  const DimerHoppingModel& m = *model_;
  std::vector<double> nodes, weights;
  std::vector<std::pair<double, double>> evs, ods;  // (value, weight)
  if (m.x_dist == DimerHoppingModel::XDist::uniform) {
    gauss_legendre(n, nodes, weights);
    for (int i = 0; i < n; ++i) {
      if (m.even_random()) evs.emplace_back(m.c_ev + m.lambda_ev * nodes[i], weights[i] / 2.0);
      if (m.odd_random()) ods.emplace_back(m.c_od + m.lambda_od * nodes[i], weights[i] / 2.0);
    }
  } else {
    if (m.even_random()) {
      if (m.p > 0.0) evs.emplace_back(m.c_ev + m.lambda_ev, m.p);
      if (m.p < 1.0) evs.emplace_back(m.c_ev - m.lambda_ev, 1.0 - m.p);
    }
    if (m.odd_random()) {
      if (m.p > 0.0) ods.emplace_back(m.c_od + m.lambda_od, m.p);
      if (m.p < 1.0) ods.emplace_back(m.c_od - m.lambda_od, 1.0 - m.p);
    }
  }
  if (evs.empty()) evs.emplace_back(m.c_ev, 1.0);
  if (ods.empty()) ods.emplace_back(m.c_od, 1.0);
  std::vector<EnsembleAtom> atoms;
  atoms.reserve(evs.size() * ods.size());
  for (const auto& [te, we] : evs)
    for (const auto& [to, wo] : ods) atoms.push_back({make_dimer(te, to), we * wo});
  // renormalize away quadrature roundoff before the ctor's 1e-12 gate
  double total = 0.0;
  for (const auto& a : atoms) total += a.weight;
  for (auto& a : atoms) a.weight /= total;
  return discrete(std::move(atoms), max_length_);
}

std::vector<Polymer> sample_polymers(const PolymerEnsemble& ensemble, std::size_t count,
                                     RealizationStream& stream) {
  std::vector<Polymer> out(count);
  for (auto& p : out) ensemble.sample_into(p, stream);
  return out;
}

std::pair<std::vector<double>, std::vector<double>> flatten(std::span<const Polymer> polymers) {
  if (polymers.empty()) throw DomainError("flatten: empty polymer array");
  std::size_t n = 0;
  for (const auto& p : polymers) n += p.length();
  std::vector<double> t, v;
  t.reserve(n);
  v.reserve(n);
  for (const auto& p : polymers) {
    t.insert(t.end(), p.t.begin(), p.t.end());
    v.insert(v.end(), p.v.begin(), p.v.end());
  }
  return {std::move(t), std::move(v)};
}

PolymerEnsemble dimer_to_ensemble(const DimerHoppingModel& model,
                                  std::optional<int> discretization) {
  model.validate();
  const bool continuous =
      model.x_dist == DimerHoppingModel::XDist::uniform && (model.even_random() || model.odd_random());
  if (!continuous) {
    // deterministic or Bernoulli: finite atom list (at most 4 atoms)
    return PolymerEnsemble::dimer(model).discretize(1);
  }
  PolymerEnsemble e = PolymerEnsemble::dimer(model);
  if (discretization) return e.discretize(*discretization);
  return e;
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      // Legendre recursion and Newton update
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * pp * pp);
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
  if (n == 1) {
    nodes[0] = 0.0;
    weights[0] = 2.0;
  }
}

}  // namespace pseudogap
