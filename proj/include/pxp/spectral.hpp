#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pxp/lattice.hpp"
#include "pxp/linalg.hpp"
#include "pxp/signatures.hpp"

namespace pxp {

enum class Parity { even, odd, none };

inline const char* to_string(Parity p) {
  switch (p) {
    case Parity::even: return "even";
    case Parity::odd: return "odd";
    default: return "none";
  }
}

namespace detail {

inline SpinConfig translate_config(const LatticeSpec& spec, SpinConfig c, int shift) {
  const int n = spec.n_sites;
  shift %= n;
  if (shift == 0) return c;
  return ((c << shift) | (c >> (n - shift))) & spec.config_mask();
}

inline SpinConfig reflect_config(const LatticeSpec& spec, SpinConfig c) {
  SpinConfig r = 0;
  for (int j = 0; j < spec.n_sites; ++j)
    if ((c >> j) & 1) r |= SpinConfig{1} << (spec.n_sites - 1 - j);
  return r;
}

inline Signature translate_signature(const LatticeSpec& spec, Signature s, int shift) {
  const int n = spec.qim_count();
  shift %= n;
  if (shift == 0) return s;
  return ((s << shift) | (s >> (n - shift))) & spec.signature_mask();
}

inline Signature reflect_signature(const LatticeSpec& spec, Signature s) {
  // I_i(Rc) = I_{N-i}(c): bit i-1 of the image comes from bit N-i-1
  const int n = spec.qim_count();
  Signature r = 0;
  for (int i = 1; i <= n; ++i) {
    const int src = n - i;  // 0-based bit of I_{N-i}
    if ((s >> (src % n)) & 1) r |= Signature{1} << (i - 1);
  }
  return r;
}

}  // namespace detail

/// Orthonormal basis of one (momentum, parity) block of a signature sector.
/// Momentum is restricted to k in {0, N/2} where all characters are real.
/// Each basis vector is the normalized character-weighted sum over one group
/// orbit; orbits have disjoint support so the basis is orthonormal.
struct SymmetrySector {
  LatticeSpec spec;
  Signature sig = 0;
  int momentum = 0;
  Parity parity = Parity::none;
  std::vector<SpinConfig> reps;          // orbit representatives (ascending)
  std::vector<std::uint32_t> orbit_sizes;
  std::unordered_map<SpinConfig, std::pair<std::int32_t, std::int8_t>> lookup;  // config -> (vector, sign)

  std::size_t dimension() const { return reps.size(); }
};

inline SymmetrySector resolve_symmetry(const LatticeSpec& spec, Signature s, int k,
                                       Parity parity) {
  spec.require_full_basis();
  if (spec.boundary != Boundary::periodic)
    throw UsageError("momentum resolution requires periodic boundary");
  if (s > spec.signature_mask()) throw UsageError("signature wider than the QIM family");
  const int n = spec.n_sites;
  if (!(k == 0 || (n % 2 == 0 && k == n / 2)))
    throw UsageError("unsupported momentum k=" + std::to_string(k) +
                     " (real blocks exist for k=0" +
                     (n % 2 == 0 ? " and k=N/2" : "") + ")");
  const int omega = k == 0 ? 1 : -1;
  const bool use_reflection = parity != Parity::none;
  const int par = parity == Parity::odd ? -1 : 1;

  // the invariant set of signatures: the group orbit of s
  std::set<Signature> sig_orbit;
  for (int m = 0; m < n; ++m) {
    sig_orbit.insert(detail::translate_signature(spec, s, m));
    if (use_reflection)
      sig_orbit.insert(
          detail::translate_signature(spec, detail::reflect_signature(spec, s), m));
  }

  SymmetrySector sector;
  sector.spec = spec;
  sector.sig = s;
  sector.momentum = k;
  sector.parity = parity;

  const SpinConfig end = SpinConfig{1} << n;
  for (SpinConfig c = 0; c < end; ++c) {
    if (!sig_orbit.count(detail::signature_word(spec, c))) continue;
    if (sector.lookup.count(c)) continue;
    // collect the orbit of c with characters; reject the orbit when the
    // character is inconsistent on it (nonzero projection impossible)
    std::map<SpinConfig, int> image_sign;
    bool supported = true;
    for (int m = 0; m < n; ++m) {
      const SpinConfig t = detail::translate_config(spec, c, m);
      int chi = (omega == 1 || m % 2 == 0) ? 1 : -1;
      auto it = image_sign.find(t);
      if (it == image_sign.end())
        image_sign.emplace(t, chi);
      else if (it->second != chi)
        supported = false;
      if (use_reflection) {
        const SpinConfig rt = detail::translate_config(spec, detail::reflect_config(spec, c), m);
        chi = ((omega == 1 || m % 2 == 0) ? 1 : -1) * par;
        auto rit = image_sign.find(rt);
        if (rit == image_sign.end())
          image_sign.emplace(rt, chi);
        else if (rit->second != chi)
          supported = false;
      }
    }
    if (!supported) {
      for (const auto& [t, sgn] : image_sign) sector.lookup.emplace(t, std::make_pair(-1, 0));
      continue;
    }
    const SpinConfig rep = image_sign.begin()->first;
    // re-anchor signs at the representative: sign(d) = chi(g) for g rep = d
    const int rep_sign = image_sign.at(rep);
    const auto index = std::int32_t(sector.reps.size());
    sector.reps.push_back(rep);
    sector.orbit_sizes.push_back(std::uint32_t(image_sign.size()));
    for (const auto& [t, sgn] : image_sign)
      sector.lookup.emplace(t, std::make_pair(index, std::int8_t(sgn * rep_sign)));
  }
  return sector;
}

/// Restriction of H to the block: real symmetric by construction.
inline Matrix block_hamiltonian(const SymmetrySector& sector) {
  const std::size_t d = sector.dimension();
  Matrix H(d, d);
  for (std::size_t b = 0; b < d; ++b) {
    const double szb = double(sector.orbit_sizes[b]);
    for (SpinConfig c : apply_hamiltonian(sector.spec, sector.reps[b])) {
      auto it = sector.lookup.find(c);
      if (it == sector.lookup.end() || it->second.first < 0) continue;
      const std::size_t a = std::size_t(it->second.first);
      H.at(a, b) += double(it->second.second) * std::sqrt(szb / double(sector.orbit_sizes[a]));
    }
  }
  double scale = 0.0, asym = 0.0;
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = r; c < d; ++c) {
      scale = std::max(scale, std::fabs(H.at(r, c)));
      asym = std::max(asym, std::fabs(H.at(r, c) - H.at(c, r)));
    }
  if (asym > 1e-12 * std::max(scale, 1.0))
    throw std::logic_error("symmetry block came out non-symmetric");
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = r + 1; c < d; ++c) {
      const double v = 0.5 * (H.at(r, c) + H.at(c, r));
      H.at(r, c) = v;
      H.at(c, r) = v;
    }
  return H;
}

/// Combinatorial block dimensions for every momentum (no basis built):
/// a translation orbit of periodicity R is compatible with k iff k*R = 0 mod N.
inline std::vector<std::size_t> momentum_block_dimensions(const LatticeSpec& spec, Signature s) {
  spec.require_full_basis();
  if (spec.boundary != Boundary::periodic)
    throw UsageError("momentum resolution requires periodic boundary");
  const int n = spec.n_sites;
  std::set<Signature> sig_orbit;
  for (int m = 0; m < n; ++m) sig_orbit.insert(detail::translate_signature(spec, s, m));
  std::vector<std::size_t> dims(n, 0);
  std::set<SpinConfig> seen;
  const SpinConfig end = SpinConfig{1} << n;
  for (SpinConfig c = 0; c < end; ++c) {
    if (seen.count(c) || !sig_orbit.count(detail::signature_word(spec, c))) continue;
    int period = 0;
    for (int m = 1; m <= n; ++m)
      if (detail::translate_config(spec, c, m) == c) {
        period = m;
        break;
      }
    for (int m = 0; m < period; ++m) seen.insert(detail::translate_config(spec, c, m));
    for (int k = 0; k < n; ++k)
      if ((std::int64_t(k) * period) % n == 0) ++dims[k];
  }
  return dims;
}

struct LevelStatReport {
  double mean_r = 0.0;
  std::size_t levels_used = 0;
  double trimmed_fraction = 0.0;
  std::size_t zero_modes_discarded = 0;
  std::vector<std::pair<double, std::size_t>> histogram;  // (bin lower edge, count)
  bool statistically_meaningful = false;                  // levels_used >= 50
};

inline constexpr std::size_t kRHistogramBins = 20;
inline constexpr std::size_t kMeaningfulLevelCount = 50;

/// Consecutive-gap ratio statistic r_n = min(d_n, d_{n+1}) / max(d_n, d_{n+1})
/// after discarding |E| < zero_cutoff and trimming `trim` of the levels at
/// each spectral edge. Two equal (including doubly degenerate) gaps count as
/// ratio 1.
inline LevelStatReport r_statistic(std::vector<double> eigenvalues, double trim = 0.05,
                                   double zero_cutoff = 1e-10) {
  if (trim < 0.0 || trim >= 0.5) throw UsageError("trim fraction must lie in [0, 0.5)");
  std::sort(eigenvalues.begin(), eigenvalues.end());
  LevelStatReport rep;
  rep.trimmed_fraction = trim;
  std::vector<double> levels;
  levels.reserve(eigenvalues.size());
  for (double e : eigenvalues) {
    if (std::fabs(e) < zero_cutoff)
      ++rep.zero_modes_discarded;
    else
      levels.push_back(e);
  }
  const std::size_t cut = std::size_t(std::floor(trim * double(levels.size())));
  if (levels.size() < 2 * cut + 3) throw UsageError("too few levels for gap-ratio statistics");
  levels.erase(levels.end() - cut, levels.end());
  levels.erase(levels.begin(), levels.begin() + cut);
  rep.levels_used = levels.size();
  rep.statistically_meaningful = rep.levels_used >= kMeaningfulLevelCount;

  rep.histogram.assign(kRHistogramBins, {0.0, 0});
  for (std::size_t b = 0; b < kRHistogramBins; ++b)
    rep.histogram[b].first = double(b) / double(kRHistogramBins);
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i + 2 < levels.size(); ++i) {
    const double d1 = levels[i + 1] - levels[i];
    const double d2 = levels[i + 2] - levels[i + 1];
    const double hi = std::max(d1, d2);
    const double r = hi == 0.0 ? 1.0 : std::min(d1, d2) / hi;
    sum += r;
    ++count;
    const std::size_t bin =
        std::min(kRHistogramBins - 1, std::size_t(r * double(kRHistogramBins)));
    ++rep.histogram[bin].second;
  }
  rep.mean_r = sum / double(count);
  return rep;
}

/// Lagrange expansion of a commuting diagonal operator through a
/// nondegenerate one: I_target = sum_mu t_mu prod_{nu != mu} (x - b_nu)/(b_mu - b_nu).
/// `coefficients` is the monomial form (the d-term complexity exhibit);
/// reconstruction is checked in the stable Lagrange form.
struct NeumannExpansion {
  std::vector<double> base_eigenvalues;
  std::vector<double> target_eigenvalues;
  std::size_t dimension = 0;                // d; polynomial degree d-1
  std::vector<double> coefficients;         // monomial coefficients, degree ascending
  double max_reconstruction_error = 0.0;

  double evaluate(double x) const {
    const std::size_t d = dimension;
    double acc = 0.0;
    for (std::size_t mu = 0; mu < d; ++mu) {
      double w = 1.0;
      for (std::size_t nu = 0; nu < d; ++nu) {
        if (nu == mu) continue;
        w *= (x - base_eigenvalues[nu]) / (base_eigenvalues[mu] - base_eigenvalues[nu]);
      }
      acc += target_eigenvalues[mu] * w;
    }
    return acc;
  }
};

inline NeumannExpansion neumann_interpolate(const std::vector<double>& base,
                                            const std::vector<double>& target) {
  if (base.size() != target.size())
    throw UsageError("base and target eigenvalue lists must have equal length");
  if (base.empty()) throw UsageError("empty eigenvalue lists");
  std::vector<double> sorted = base;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 1; i < sorted.size(); ++i)
    if (sorted[i] == sorted[i - 1])
      throw UsageError("degenerate base spectrum: eigenvalue " + std::to_string(sorted[i]) +
                       " repeats");

  NeumannExpansion exp;
  exp.base_eigenvalues = base;
  exp.target_eigenvalues = target;
  exp.dimension = base.size();
  const std::size_t d = exp.dimension;

  // master polynomial P(x) = prod (x - b_mu), then synthetic division per node
  std::vector<double> master(d + 1, 0.0);
  master[0] = 1.0;
  for (std::size_t mu = 0; mu < d; ++mu) {
    for (std::size_t j = mu + 1; j-- > 0;) {
      master[j + 1] += master[j];
      master[j] *= -base[mu];
    }
  }

  exp.coefficients.assign(d, 0.0);
  for (std::size_t mu = 0; mu < d; ++mu) {
    // Q(x) = P(x) / (x - b_mu) by synthetic division (highest degree first)
    std::vector<double> q(d, 0.0);
    double carry = master[d];
    for (std::size_t j = d; j-- > 0;) {
      q[j] = carry;
      carry = master[j] + carry * base[mu];
    }
    double denom = 1.0;
    for (std::size_t nu = 0; nu < d; ++nu)
      if (nu != mu) denom *= (base[mu] - base[nu]);
    const double w = target[mu] / denom;
    for (std::size_t j = 0; j < d; ++j) exp.coefficients[j] += w * q[j];
  }

  double err = 0.0;
  for (std::size_t mu = 0; mu < d; ++mu)
    err = std::max(err, std::fabs(exp.evaluate(base[mu]) - target[mu]));
  exp.max_reconstruction_error = err;
  return exp;
}

/// Diagonal aggregate I_Sigma = sum_i c_i I_i with its degeneracy summary.
struct DegeneracyReport {
  std::size_t distinct_eigenvalues = 0;
  std::size_t max_multiplicity = 0;
  double most_degenerate_value = 0.0;
};

struct AggregatedQim {
  LatticeSpec spec;
  std::vector<double> coefficients;

  double value(SpinConfig c) const {
    double v = 0.0;
    for (int i = 1; i <= spec.qim_count(); ++i)
      if (qim_eigenvalue(spec, c, i)) v += coefficients[i - 1];
    return v;
  }

  DegeneracyReport degeneracy_report() const {
    spec.require_full_basis();
    std::map<double, std::size_t> mult;
    const SpinConfig end = SpinConfig{1} << spec.n_sites;
    for (SpinConfig c = 0; c < end; ++c) ++mult[value(c)];
    DegeneracyReport rep;
    rep.distinct_eigenvalues = mult.size();
    for (const auto& [v, m] : mult)
      if (m > rep.max_multiplicity) {
        rep.max_multiplicity = m;
        rep.most_degenerate_value = v;
      }
    return rep;
  }
};

inline AggregatedQim aggregate_qims(const LatticeSpec& spec, std::vector<double> coefficients) {
  spec.validate();
  if ((int)coefficients.size() != spec.qim_count())
    throw UsageError("coefficient list must have one entry per QIM (" +
                     std::to_string(spec.qim_count()) + ")");
  return AggregatedQim{spec, std::move(coefficients)};
}

namespace detail {

/// Spectrum of the open PXP chain of `length` sites restricted to its own
/// all-zero sector (no two adjacent up spins); length 0 is the empty chain.
inline std::vector<double> open_zero_sector_spectrum(int length) {
  if (length == 0) return {0.0};
  std::vector<SpinConfig> basis;
  const SpinConfig end = SpinConfig{1} << length;
  for (SpinConfig c = 0; c < end; ++c) {
    bool ok = true;
    for (int j = 0; j + 1 < length; ++j)
      if (((c >> j) & 1) && ((c >> (j + 1)) & 1)) ok = false;
    if (ok) basis.push_back(c);
  }
  std::map<SpinConfig, std::size_t> index;
  for (std::size_t i = 0; i < basis.size(); ++i) index[basis[i]] = i;
  Matrix H(basis.size(), basis.size());
  for (std::size_t col = 0; col < basis.size(); ++col) {
    const SpinConfig c = basis[col];
    for (int j = 0; j < length; ++j) {
      if (j > 0 && ((c >> (j - 1)) & 1)) continue;
      if (j + 1 < length && ((c >> (j + 1)) & 1)) continue;
      auto it = index.find(c ^ (SpinConfig{1} << j));
      if (it != index.end()) H.at(it->second, col) += 1.0;
    }
  }
  return eigensolve_symmetric(H, false).eigenvalues;
}

}  // namespace detail

struct CutFactorizationReport {
  bool passed = false;
  double max_deviation = 0.0;
  std::size_t sector_dimension = 0;
  std::vector<int> subchain_lengths;  // free stretches between frozen domains
};

/// Frozen 11-domains cut the ring into independent open chains: the sector
/// spectrum of `s` must equal the multiset of sums of the open sub-chain
/// spectra. Each domain of L consecutive QIM ones freezes L+1 up spins plus
/// its two neighbouring down spins.
inline CutFactorizationReport cut_factorization_check(const LatticeSpec& spec, Signature s,
                                                      double tol = 1e-9) {
  spec.require_full_basis();
  if (spec.boundary != Boundary::periodic)
    throw UsageError("cut factorization is defined on the periodic chain");
  const auto verdict = is_attainable(spec, s);
  if (!verdict.attainable)
    throw UsageError("signature is unattainable (frozen domains collide)");
  if (s == 0) throw UsageError("signature has no frozen domain");
  const int n = spec.n_sites;

  CutFactorizationReport rep;
  std::vector<double> expected;
  if (s == spec.signature_mask()) {
    expected = {0.0};  // the fully frozen ring
  } else {
    // walk the ring starting at a zero bit; runs of ones never straddle the
    // walk boundary, so blocks alternate zeros / ones
    int z = 0;
    while ((s >> z) & 1) ++z;
    std::vector<int> zero_blocks, runs;
    int i = 0;
    while (i < n) {
      int zb = 0;
      while (i < n && !((s >> ((z + i) % n)) & 1)) ++zb, ++i;
      zero_blocks.push_back(zb);
      if (i >= n) break;
      int rb = 0;
      while (i < n && ((s >> ((z + i) % n)) & 1)) ++rb, ++i;
      runs.push_back(rb);
    }
    // cyclic zero-gaps between consecutive runs; the final gap wraps through
    // the starting block
    std::vector<int> gaps;
    for (std::size_t j = 1; j < runs.size(); ++j) gaps.push_back(zero_blocks[j]);
    int wrap = zero_blocks[0];
    if (zero_blocks.size() > runs.size()) wrap += zero_blocks[runs.size()];
    gaps.push_back(wrap);
    for (int g : gaps) {
      if (g < 2) throw UsageError("frozen domains too close (gap " + std::to_string(g) + ")");
      rep.subchain_lengths.push_back(std::max(0, g - 3));
    }
    expected = {0.0};
    for (int len : rep.subchain_lengths) {
      const std::vector<double> part = detail::open_zero_sector_spectrum(len);
      std::vector<double> next;
      next.reserve(expected.size() * part.size());
      for (double a : expected)
        for (double b : part) next.push_back(a + b);
      expected = std::move(next);
    }
    std::sort(expected.begin(), expected.end());
  }

  const std::vector<SpinConfig> basis = sector_of(spec, s);
  rep.sector_dimension = basis.size();
  const SparseOperator op = build_sector_hamiltonian(spec, basis);
  Matrix H(basis.size(), basis.size());
  H.a = op.to_dense();
  std::vector<double> actual = eigensolve_symmetric(H, false).eigenvalues;

  if (actual.size() != expected.size())
    throw std::logic_error("sector dimension does not factorize: " +
                           std::to_string(actual.size()) + " vs " +
                           std::to_string(expected.size()));
  double dev = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i)
    dev = std::max(dev, std::fabs(actual[i] - expected[i]));
  rep.max_deviation = dev;
  rep.passed = dev <= tol;
  return rep;
}

}  // namespace pxp
