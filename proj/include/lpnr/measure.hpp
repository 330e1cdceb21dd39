#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lpnr/errors.hpp"
#include "lpnr/scalar.hpp"

namespace lpnr {

/// Hard cap on the number of atoms of any space built by the library.
inline constexpr std::size_t kMaxAtoms = std::size_t{1} << 20;
inline constexpr int kMaxDyadicLevel = 20;

/// Map from the atoms of a refined space to the atoms of the space it was
/// refined from. Every coarse atom owns at least one fine atom.
struct Refinement {
  std::vector<std::size_t> parent;
  std::size_t coarse_size = 0;

  std::size_t fine_size() const { return parent.size(); }

  std::vector<std::vector<std::size_t>> children() const {
    std::vector<std::vector<std::size_t>> out(coarse_size);
    for (std::size_t i = 0; i < parent.size(); ++i) out[parent[i]].push_back(i);
    return out;
  }

  static Refinement identity(std::size_t n) {
    Refinement r;
    r.parent.resize(n);
    std::iota(r.parent.begin(), r.parent.end(), std::size_t{0});
    r.coarse_size = n;
    return r;
  }

  /// Composes `this` (mid -> coarse) with `finer` (fine -> mid).
  Refinement then(const Refinement& finer) const {
    if (finer.coarse_size != parent.size()) {
      throw InvalidArgument("refinement composition: size mismatch");
    }
    Refinement r;
    r.coarse_size = coarse_size;
    r.parent.reserve(finer.parent.size());
    for (std::size_t m : finer.parent) r.parent.push_back(parent[m]);
    return r;
  }

  void validate() const {
    std::vector<char> hit(coarse_size, 0);
    for (std::size_t c : parent) {
      if (c >= coarse_size) throw InvalidArgument("refinement: parent index out of range");
      hit[c] = 1;
    }
    if (std::find(hit.begin(), hit.end(), 0) != hit.end()) {
      throw InvalidArgument("refinement: coarse atom without children");
    }
  }
};

/// A finite measure given by strictly positive atom masses.
class MeasureSpace {
 public:
  explicit MeasureSpace(std::vector<double> weights, std::optional<Refinement> lineage = std::nullopt)
      : weights_(std::move(weights)), lineage_(std::move(lineage)) {
    if (weights_.empty()) throw InvalidArgument("measure space needs at least one atom");
    if (weights_.size() > kMaxAtoms) throw ResourceError("measure space exceeds the atom cap");
    for (double w : weights_) {
      if (!(w > 0.0) || !std::isfinite(w)) {
        throw InvalidArgument("atom weights must be positive and finite");
      }
    }
    if (lineage_) {
      if (lineage_->parent.size() != weights_.size()) {
        throw InvalidArgument("lineage size does not match atom count");
      }
      lineage_->validate();
    }
    total_ = std::accumulate(weights_.begin(), weights_.end(), 0.0);
  }

  std::size_t size() const { return weights_.size(); }
  double weight(std::size_t i) const { return weights_.at(i); }
  std::span<const double> weights() const { return weights_; }
  double total_mass() const { return total_; }
  const std::optional<Refinement>& lineage() const { return lineage_; }

 private:
  std::vector<double> weights_;
  std::optional<Refinement> lineage_;
  double total_ = 0.0;
};

using SpacePtr = std::shared_ptr<const MeasureSpace>;

inline SpacePtr make_space(std::vector<double> weights, std::optional<Refinement> lineage = std::nullopt) {
  return std::make_shared<const MeasureSpace>(std::move(weights), std::move(lineage));
}

/// Unit weights, i.e. the counting measure on n points.
inline SpacePtr counting_space(std::size_t n) { return make_space(std::vector<double>(n, 1.0)); }

inline bool same_space(const MeasureSpace& a, const MeasureSpace& b) {
  if (&a == &b) return true;
  return std::ranges::equal(a.weights(), b.weights());
}

/// Sorted, duplicate-free set of atom indices of a space with `universe` atoms.
class MeasurableSet {
 public:
  MeasurableSet() = default;

  MeasurableSet(std::vector<std::size_t> indices, std::size_t universe)
      : indices_(std::move(indices)), universe_(universe) {
    std::sort(indices_.begin(), indices_.end());
    indices_.erase(std::unique(indices_.begin(), indices_.end()), indices_.end());
    if (!indices_.empty() && indices_.back() >= universe_) {
      throw IndexError("measurable set: atom index out of range");
    }
  }

  static MeasurableSet all(std::size_t n) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    return MeasurableSet(std::move(idx), n);
  }

  static MeasurableSet none(std::size_t n) { return MeasurableSet({}, n); }

  std::span<const std::size_t> indices() const { return indices_; }
  std::size_t size() const { return indices_.size(); }
  bool empty() const { return indices_.empty(); }
  std::size_t universe() const { return universe_; }

  bool contains(std::size_t i) const { return std::binary_search(indices_.begin(), indices_.end(), i); }

  std::vector<char> mask() const {
    std::vector<char> m(universe_, 0);
    for (std::size_t i : indices_) m[i] = 1;
    return m;
  }

  friend bool operator==(const MeasurableSet&, const MeasurableSet&) = default;

 private:
  std::vector<std::size_t> indices_;
  std::size_t universe_ = 0;
};

inline double mass(const MeasureSpace& space, const MeasurableSet& set) {
  if (set.universe() != space.size()) throw InvalidArgument("set does not belong to this space");
  double m = 0.0;
  for (std::size_t i : set.indices()) m += space.weight(i);
  return m;
}

inline MeasurableSet set_union(const MeasurableSet& a, const MeasurableSet& b) {
  std::vector<std::size_t> out;
  std::ranges::set_union(a.indices(), b.indices(), std::back_inserter(out));
  return MeasurableSet(std::move(out), a.universe());
}

inline MeasurableSet set_intersection(const MeasurableSet& a, const MeasurableSet& b) {
  std::vector<std::size_t> out;
  std::ranges::set_intersection(a.indices(), b.indices(), std::back_inserter(out));
  return MeasurableSet(std::move(out), a.universe());
}

inline MeasurableSet set_difference(const MeasurableSet& a, const MeasurableSet& b) {
  std::vector<std::size_t> out;
  std::ranges::set_difference(a.indices(), b.indices(), std::back_inserter(out));
  return MeasurableSet(std::move(out), a.universe());
}

inline MeasurableSet complement(const MeasurableSet& a) {
  return set_difference(MeasurableSet::all(a.universe()), a);
}

/// Disjoint measurable sets covering the whole space.
class PartitionPlan {
 public:
  PartitionPlan(SpacePtr space, std::vector<MeasurableSet> parts) : space_(std::move(space)), parts_(std::move(parts)) {
    std::vector<char> seen(space_->size(), 0);
    for (const auto& part : parts_) {
      if (part.universe() != space_->size()) throw InvalidArgument("partition part from another space");
      for (std::size_t i : part.indices()) {
        if (seen[i]) throw InvalidArgument("partition parts are not disjoint");
        seen[i] = 1;
      }
    }
    if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
      throw InvalidArgument("partition parts do not cover the space");
    }
  }

  const SpacePtr& space() const { return space_; }
  std::span<const MeasurableSet> parts() const { return parts_; }
  std::size_t size() const { return parts_.size(); }
  const MeasurableSet& operator[](std::size_t k) const { return parts_.at(k); }

 private:
  SpacePtr space_;
  std::vector<MeasurableSet> parts_;
};

struct RefinedSpace {
  SpacePtr space;
  Refinement refinement;
};

/// Splits every atom i into pieces with the masses fractions[i][k] * mu_i.
/// Children of atom i are laid out contiguously, in the order of atoms.
inline RefinedSpace refine_atoms(const MeasureSpace& space, const std::vector<std::vector<double>>& fractions) {
  if (fractions.size() != space.size()) throw InvalidArgument("one fraction list per atom required");
  std::vector<double> w;
  Refinement r;
  r.coarse_size = space.size();
  for (std::size_t i = 0; i < space.size(); ++i) {
    const auto& fr = fractions[i];
    if (fr.empty()) throw InvalidArgument("empty fraction list");
    double used = 0.0;
    for (std::size_t k = 0; k < fr.size(); ++k) {
      const bool last = k + 1 == fr.size();
      // The last child takes the remainder so the children sum to the parent.
      const double piece = last ? space.weight(i) - used : fr[k] * space.weight(i);
      used += piece;
      w.push_back(piece);
      r.parent.push_back(i);
    }
  }
  if (w.size() > kMaxAtoms) throw ResourceError("refinement exceeds the atom cap");
  auto fine = make_space(std::move(w), r);
  return {std::move(fine), std::move(r)};
}

/// Splits one atom into children of masses fraction*mu and (1-fraction)*mu.
inline RefinedSpace split_atom(const MeasureSpace& space, std::size_t atom, double fraction) {
  if (atom >= space.size()) throw IndexError("split_atom: atom index out of range");
  if (!(fraction > 0.0 && fraction < 1.0)) throw InvalidArgument("split_atom: fraction must lie in (0,1)");
  std::vector<std::vector<double>> fr(space.size(), std::vector<double>{1.0});
  fr[atom] = {fraction, 1.0 - fraction};
  return refine_atoms(space, fr);
}

/// Inverse of a refinement: merges children back into their parents.
inline SpacePtr coarsen(const MeasureSpace& fine) {
  if (!fine.lineage()) throw InvalidArgument("coarsen: space has no lineage");
  const auto& r = *fine.lineage();
  std::vector<double> w(r.coarse_size, 0.0);
  for (std::size_t i = 0; i < fine.size(); ++i) w[r.parent[i]] += fine.weight(i);
  return make_space(std::move(w));
}

/// Extends a simple function on the coarse space to the fine one (values copied to children).
template <class T>
std::vector<T> replicate(std::span<const T> coarse, const Refinement& r) {
  if (coarse.size() != r.coarse_size) throw InvalidArgument("replicate: size mismatch");
  std::vector<T> out(r.parent.size());
  for (std::size_t i = 0; i < r.parent.size(); ++i) out[i] = coarse[r.parent[i]];
  return out;
}

/// Maps a coarse set to the set of all its children.
inline MeasurableSet lift_set(const MeasurableSet& coarse, const Refinement& r) {
  auto m = coarse.mask();
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < r.parent.size(); ++i) {
    if (m.at(r.parent[i])) idx.push_back(i);
  }
  return MeasurableSet(std::move(idx), r.parent.size());
}

struct LambdaPartition {
  SpacePtr space;
  Refinement refinement;
  MeasurableSet a;
  MeasurableSet b;
  /// The input functions carried over to the refined space.
  std::vector<std::vector<cplx>> funcs;
};

/// Refines the space and returns A, B with integral_A f = lambda * integral f and
/// integral_B f = (1 - lambda) * integral f for every supplied simple function f.
/// Atoms on which every function vanishes go to A unsplit; every other atom is
/// split into children of relative mass lambda (to A) and 1 - lambda (to B).
inline LambdaPartition lambda_partition(const MeasureSpace& space, const std::vector<std::vector<cplx>>& funcs,
                                        double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidArgument("lambda_partition: lambda must lie in [0,1]");
  for (const auto& f : funcs) {
    if (f.size() != space.size()) throw InvalidArgument("lambda_partition: function length mismatch");
  }
  const std::size_t n = space.size();
  std::vector<std::vector<double>> fr(n, std::vector<double>{1.0});
  // 0: all functions vanish, 1: split, 2: whole atom to A, 3: whole atom to B.
  std::vector<int> kind(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const bool null = std::all_of(funcs.begin(), funcs.end(), [&](const auto& f) { return f[i] == cplx{}; });
    if (null) continue;
    if (lambda == 0.0) {
      kind[i] = 3;
    } else if (lambda == 1.0) {
      kind[i] = 2;
    } else {
      kind[i] = 1;
      fr[i] = {lambda, 1.0 - lambda};
    }
  }
  auto refined = refine_atoms(space, fr);
  const auto& r = refined.refinement;
  std::vector<std::size_t> a, b;
  for (std::size_t i = 0; i < r.parent.size(); ++i) {
    const std::size_t c = r.parent[i];
    switch (kind[c]) {
      case 0:
      case 2:
        a.push_back(i);
        break;
      case 3:
        b.push_back(i);
        break;
      default:
        // First child carries the lambda share.
        if (i == 0 || r.parent[i - 1] != c) {
          a.push_back(i);
        } else {
          b.push_back(i);
        }
    }
  }
  LambdaPartition out;
  const std::size_t fine = r.parent.size();
  out.space = refined.space;
  out.refinement = r;
  out.a = MeasurableSet(std::move(a), fine);
  out.b = MeasurableSet(std::move(b), fine);
  for (const auto& f : funcs) out.funcs.push_back(replicate<cplx>(f, r));
  return out;
}

inline LambdaPartition lambda_partition(const MeasureSpace& space, const std::vector<std::vector<double>>& funcs,
                                        double lambda) {
  std::vector<std::vector<cplx>> c;
  for (const auto& f : funcs) c.emplace_back(f.begin(), f.end());
  return lambda_partition(space, c, lambda);
}

/// Refinement map of the dyadic tree from level `from` down to level `to`.
inline Refinement dyadic_refinement(int from, int to) {
  if (from < 0 || to < from) throw InvalidArgument("dyadic_refinement: need 0 <= from <= to");
  if (to > kMaxDyadicLevel) throw ResourceError("dyadic level above the cap");
  Refinement r;
  r.coarse_size = std::size_t{1} << from;
  const std::size_t n = std::size_t{1} << to;
  r.parent.resize(n);
  for (std::size_t i = 0; i < n; ++i) r.parent[i] = i >> (to - from);
  return r;
}

/// [0,1] with Lebesgue measure at resolution 2^-level.
inline SpacePtr dyadic_space(int level) {
  if (level < 0) throw InvalidArgument("dyadic_space: negative level");
  if (level > kMaxDyadicLevel) throw ResourceError("dyadic_space: level above the cap");
  const std::size_t n = std::size_t{1} << level;
  std::vector<double> w(n, std::ldexp(1.0, -level));
  if (level == 0) return make_space(std::move(w));
  return make_space(std::move(w), dyadic_refinement(level - 1, level));
}

/// Level L when the space has 2^L atoms of equal mass.
inline std::optional<int> dyadic_level(const MeasureSpace& space) {
  const std::size_t n = space.size();
  if (!std::has_single_bit(n)) return std::nullopt;
  const double w0 = space.weight(0);
  for (double w : space.weights()) {
    if (w != w0) return std::nullopt;
  }
  return std::countr_zero(n);
}

/// Smallest r such that the set is a union of level-r dyadic intervals of a
/// level-`level` space. The empty set has resolution 0.
inline int dyadic_resolution(const MeasurableSet& set, int level) {
  auto idx = set.indices();
  int aligned = level;
  std::size_t k = 0;
  while (k < idx.size() && aligned > 0) {
    std::size_t start = idx[k];
    std::size_t end = start + 1;
    while (k + 1 < idx.size() && idx[k + 1] == end) {
      ++k;
      ++end;
    }
    ++k;
    const int a = std::min(std::countr_zero(start | (std::size_t{1} << level)),
                           std::countr_zero(end | (std::size_t{1} << level)));
    aligned = std::min(aligned, a);
  }
  return level - aligned;
}

}  // namespace lpnr
