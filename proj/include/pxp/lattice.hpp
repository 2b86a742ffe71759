#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

// Bit conventions used throughout the library:
//   * a spin configuration is an N-bit word; bit i-1 set <=> spin at site i is up
//   * a signature packs the QIM eigenvalues; bit i-1 holds the eigenvalue of I_i,
//     where I_i projects onto "spins i and i+1 both up"
// Site and QIM indices are 1-based in every public interface.

namespace pxp {

using SpinConfig = std::uint64_t;
using Signature = std::uint64_t;

enum class Boundary { periodic, open };

inline constexpr int kMaxFullBasisSites = 24;  // 2^N sweeps stay desk-sized
inline constexpr int kMaxSectorSites = 32;     // sector-restricted work only

/// Bad input or exceeded limit; the CLI maps this to exit code 2.
struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

inline const char* to_string(Boundary b) {
  return b == Boundary::periodic ? "periodic" : "open";
}

struct LatticeSpec {
  int n_sites = 0;
  Boundary boundary = Boundary::periodic;

  void validate() const {
    if (n_sites < 3 || n_sites > kMaxSectorSites)
      throw UsageError("n_sites must be in [3, " + std::to_string(kMaxSectorSites) +
                       "], got " + std::to_string(n_sites));
  }

  void require_full_basis() const {
    validate();
    if (n_sites > kMaxFullBasisSites)
      throw UsageError("full-basis operation limited to n_sites <= " +
                       std::to_string(kMaxFullBasisSites) + ", got " +
                       std::to_string(n_sites));
  }

  /// Number of QIMs: N for periodic (I_N wraps), N-1 for open.
  int qim_count() const { return boundary == Boundary::periodic ? n_sites : n_sites - 1; }

  SpinConfig config_mask() const {
    return n_sites >= 64 ? ~SpinConfig{0} : (SpinConfig{1} << n_sites) - 1;
  }

  Signature signature_mask() const { return (Signature{1} << qim_count()) - 1; }

  /// 1-based site lookup.
  bool spin_up(SpinConfig c, int site) const { return (c >> (site - 1)) & 1u; }

  int next_site(int site) const {  // 0 when the neighbour falls off an open end
    if (site == n_sites) return boundary == Boundary::periodic ? 1 : 0;
    return site + 1;
  }

  int prev_site(int site) const {
    if (site == 1) return boundary == Boundary::periodic ? n_sites : 0;
    return site - 1;
  }

  void check_config(SpinConfig c) const {
    if (c > config_mask())
      throw UsageError("configuration 0x" + std::to_string(c) + " wider than " +
                       std::to_string(n_sites) + " sites");
  }

  friend bool operator==(const LatticeSpec&, const LatticeSpec&) = default;
};

/// Eigenvalue of I_i = n_i n_{i+1} on a basis state: 1 iff spins i and i+1 are both up.
inline int qim_eigenvalue(const LatticeSpec& spec, SpinConfig c, int i) {
  spec.validate();
  spec.check_config(c);
  if (i < 1 || i > spec.qim_count())
    throw UsageError("QIM index " + std::to_string(i) + " out of range [1, " +
                     std::to_string(spec.qim_count()) + "]");
  const int j = spec.next_site(i);
  return (spec.spin_up(c, i) && spec.spin_up(c, j)) ? 1 : 0;
}

/// H|c> = sum over returned configurations, each with amplitude +1.
/// A term flips spin j exactly when both neighbours are down; for the open
/// chain a missing neighbour imposes no constraint (boundary terms
/// sigma^x_1 P_2 and P_{N-1} sigma^x_N).
inline std::vector<SpinConfig> apply_hamiltonian(const LatticeSpec& spec, SpinConfig c) {
  spec.validate();
  spec.check_config(c);
  std::vector<SpinConfig> out;
  out.reserve(spec.n_sites);
  for (int j = 1; j <= spec.n_sites; ++j) {
    const int l = spec.prev_site(j);
    const int r = spec.next_site(j);
    if (l != 0 && spec.spin_up(c, l)) continue;
    if (r != 0 && spec.spin_up(c, r)) continue;
    out.push_back(c ^ (SpinConfig{1} << (j - 1)));
  }
  return out;
}

/// Integer symmetric sparse matrix in coordinate form; both (r,c) and (c,r)
/// entries are stored.
struct SparseOperator {
  std::size_t dimension = 0;
  struct Entry {
    std::size_t row = 0;
    std::size_t col = 0;
    long long value = 0;
  };
  std::vector<Entry> entries;

  /// Row-major dense copy.
  std::vector<double> to_dense() const {
    std::vector<double> a(dimension * dimension, 0.0);
    for (const Entry& e : entries) a[e.row * dimension + e.col] += double(e.value);
    return a;
  }
};

/// A basis handed to build_sector_hamiltonian was not closed under H.
struct ClosureViolation : std::runtime_error {
  SpinConfig source;
  SpinConfig escaped;
  ClosureViolation(SpinConfig src, SpinConfig esc)
      : std::runtime_error("Hamiltonian leaves the given basis: " + std::to_string(src) +
                           " -> " + std::to_string(esc)),
        source(src),
        escaped(esc) {}
};

/// Matrix of H restricted to `basis` (integer entries, all equal to 1).
/// Throws ClosureViolation naming the escaping configuration when the basis
/// is not invariant.
inline SparseOperator build_sector_hamiltonian(const LatticeSpec& spec,
                                               const std::vector<SpinConfig>& basis) {
  spec.validate();
  // index lookup; basis order defines row/column order
  std::vector<std::pair<SpinConfig, std::size_t>> index;
  index.reserve(basis.size());
  for (std::size_t i = 0; i < basis.size(); ++i) index.emplace_back(basis[i], i);
  std::sort(index.begin(), index.end());
  auto find = [&](SpinConfig c) -> std::optional<std::size_t> {
    auto it = std::lower_bound(index.begin(), index.end(), std::make_pair(c, std::size_t{0}));
    if (it == index.end() || it->first != c) return std::nullopt;
    return it->second;
  };

  SparseOperator op;
  op.dimension = basis.size();
  for (std::size_t col = 0; col < basis.size(); ++col) {
    for (SpinConfig target : apply_hamiltonian(spec, basis[col])) {
      auto row = find(target);
      if (!row) throw ClosureViolation(basis[col], target);
      op.entries.push_back({*row, col, 1});
    }
  }
  std::sort(op.entries.begin(), op.entries.end(), [](const auto& a, const auto& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  return op;
}

struct ConservationViolation {
  SpinConfig source = 0;
  SpinConfig target = 0;
  int qim_index = 0;  // first I_i whose eigenvalue changed along the edge
};

struct ConservationReport {
  bool passed = false;
  std::uint64_t edges_checked = 0;
  bool hermitian = false;      // c' in H|c>  <=>  c in H|c'>
  bool involution_ok = false;  // I_i I_j = I_j I_i on every basis state
  std::optional<ConservationViolation> violation;
};

namespace detail {

inline Signature signature_word(const LatticeSpec& spec, SpinConfig c) {
  // same as signatures.hpp::signature_of but without revalidation; hot path
  Signature s = 0;
  const int m = spec.qim_count();
  for (int i = 1; i <= m; ++i) {
    const int j = spec.next_site(i);
    if (spec.spin_up(c, i) && spec.spin_up(c, j)) s |= Signature{1} << (i - 1);
  }
  return s;
}

}  // namespace detail

/// Sweep the full basis checking [H, I_i] = 0 for every i (every H edge keeps
/// the signature) plus hermiticity of the edge set and pairwise commutation of
/// the QIM family, all in exact integer arithmetic. `apply` is injectable so a
/// deliberately broken Hamiltonian can be shown to fail.
template <typename ApplyFn>
ConservationReport verify_conservation_with(const LatticeSpec& spec, ApplyFn&& apply) {
  spec.require_full_basis();
  ConservationReport rep;
  rep.hermitian = true;
  const SpinConfig end = SpinConfig{1} << spec.n_sites;
  for (SpinConfig c = 0; c < end; ++c) {
    const Signature sc = detail::signature_word(spec, c);
    for (SpinConfig t : apply(spec, c)) {
      ++rep.edges_checked;
      const Signature st = detail::signature_word(spec, t);
      if (st != sc) {
        Signature diff = st ^ sc;
        int i = 1;
        while (!(diff & 1)) {
          diff >>= 1;
          ++i;
        }
        rep.passed = false;
        rep.violation = ConservationViolation{c, t, i};
        return rep;
      }
      // hermiticity: the reverse edge must exist
      bool back = false;
      for (SpinConfig u : apply(spec, t))
        if (u == c) back = true;
      if (!back) rep.hermitian = false;
    }
  }
  // involution: diagonal projector family, checked via eigenvalue products
  rep.involution_ok = true;
  const int m = spec.qim_count();
  for (SpinConfig c = 0; c < end && rep.involution_ok; ++c)
    for (int i = 1; i <= m && rep.involution_ok; ++i)
      for (int j = i + 1; j <= m; ++j) {
        const int a = qim_eigenvalue(spec, c, i);
        const int b = qim_eigenvalue(spec, c, j);
        if (a * b != b * a) {
          rep.involution_ok = false;
          break;
        }
      }
  rep.passed = rep.hermitian && rep.involution_ok;
  return rep;
}

inline ConservationReport verify_conservation(const LatticeSpec& spec) {
  return verify_conservation_with(
      spec, [](const LatticeSpec& s, SpinConfig c) { return apply_hamiltonian(s, c); });
}

}  // namespace pxp
