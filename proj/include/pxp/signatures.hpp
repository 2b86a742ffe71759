#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "pxp/lattice.hpp"

namespace pxp {

/// Joint QIM eigenvalues of a basis state, packed as a bit word.
inline Signature signature_of(const LatticeSpec& spec, SpinConfig c) {
  spec.validate();
  spec.check_config(c);
  return detail::signature_word(spec, c);
}

inline std::string signature_to_string(const LatticeSpec& spec, Signature s) {
  std::string out(spec.qim_count(), '0');
  for (int i = 0; i < spec.qim_count(); ++i)
    if ((s >> i) & 1) out[i] = '1';
  return out;  // site order: bit of I_1 first
}

inline Signature signature_from_string(const LatticeSpec& spec, const std::string& str) {
  if ((int)str.size() != spec.qim_count())
    throw UsageError("signature string must have " + std::to_string(spec.qim_count()) +
                     " bits, got \"" + str + "\"");
  Signature s = 0;
  for (int i = 0; i < spec.qim_count(); ++i) {
    if (str[i] == '1')
      s |= Signature{1} << i;
    else if (str[i] != '0')
      throw UsageError("signature string must be over {0,1}: \"" + str + "\"");
  }
  return s;
}

inline std::string config_to_string(const LatticeSpec& spec, SpinConfig c) {
  std::string out(spec.n_sites, '0');
  for (int i = 0; i < spec.n_sites; ++i)
    if ((c >> i) & 1) out[i] = '1';
  return out;  // site 1 first; '1' = spin up
}

/// A signature is attainable iff some basis state realizes it. For the
/// periodic chain these are exactly the cyclic bit strings with no 101
/// substring; for the open chain the scan is non-cyclic.
inline bool signature_scan_attainable(const LatticeSpec& spec, Signature s) {
  const int m = spec.qim_count();
  auto bit = [&](int pos) { return int((s >> (pos % m)) & 1); };
  if (spec.boundary == Boundary::periodic) {
    for (int i = 0; i < m; ++i)
      if (bit(i) && !bit(i + 1) && bit(i + 2)) return false;
  } else {
    for (int i = 0; i + 2 < m; ++i)
      if (bit(i) && !bit(i + 1) && bit(i + 2)) return false;
  }
  return true;
}

/// Canonical witness candidate: every QIM with eigenvalue 1 contributes its
/// pair of up spins, all other spins stay down.
inline SpinConfig witness_candidate(const LatticeSpec& spec, Signature s) {
  SpinConfig c = 0;
  for (int i = 1; i <= spec.qim_count(); ++i)
    if ((s >> (i - 1)) & 1) {
      c |= SpinConfig{1} << (i - 1);
      c |= SpinConfig{1} << (spec.next_site(i) - 1);
    }
  return c;
}

struct AttainabilityVerdict {
  bool attainable = false;
  std::optional<SpinConfig> witness;
};

/// Decides attainability by the no-101 scan and cross-checks it against the
/// constructive witness; the two routes must agree.
inline AttainabilityVerdict is_attainable(const LatticeSpec& spec, Signature s) {
  spec.validate();
  if (s > spec.signature_mask())
    throw UsageError("signature wider than " + std::to_string(spec.qim_count()) + " bits");
  const bool scan = signature_scan_attainable(spec, s);
  const SpinConfig cand = witness_candidate(spec, s);
  const bool constructive = signature_of(spec, cand) == s;
  if (scan != constructive)
    throw std::logic_error("attainability routes disagree on signature " + std::to_string(s));
  if (!scan) return {false, std::nullopt};
  return {true, cand};
}

/// Partition of the full 2^N basis into signature-labeled invariant sectors.
/// Keys ascend as integers; each sector lists configurations ascending.
struct SectorFoliation {
  std::map<Signature, std::vector<SpinConfig>> sectors;

  std::size_t total_states() const {
    std::size_t n = 0;
    for (const auto& [sig, list] : sectors) n += list.size();
    return n;
  }
};

/// Full-basis foliation. The sweep may be split across `workers`
/// configuration ranges; the merged result is independent of the split.
inline SectorFoliation foliate(const LatticeSpec& spec, unsigned workers = 1) {
  spec.require_full_basis();
  const SpinConfig end = SpinConfig{1} << spec.n_sites;
  if (workers <= 1 || end < 4096) {
    SectorFoliation f;
    for (SpinConfig c = 0; c < end; ++c) f.sectors[detail::signature_word(spec, c)].push_back(c);
    return f;
  }
  std::vector<SectorFoliation> parts(workers);
  std::vector<std::thread> pool;
  const SpinConfig chunk = end / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const SpinConfig lo = chunk * w;
    const SpinConfig hi = (w + 1 == workers) ? end : chunk * (w + 1);
    pool.emplace_back([&, w, lo, hi] {
      for (SpinConfig c = lo; c < hi; ++c)
        parts[w].sectors[detail::signature_word(spec, c)].push_back(c);
    });
  }
  for (auto& t : pool) t.join();
  SectorFoliation f = std::move(parts[0]);
  for (unsigned w = 1; w < workers; ++w)  // ranges ascend, so appends keep order
    for (auto& [sig, list] : parts[w].sectors) {
      auto& dst = f.sectors[sig];
      dst.insert(dst.end(), list.begin(), list.end());
    }
  return f;
}

/// Configurations of one invariant sector, ascending (full-basis sweep).
inline std::vector<SpinConfig> sector_of(const LatticeSpec& spec, Signature s) {
  spec.require_full_basis();
  std::vector<SpinConfig> basis;
  const SpinConfig end = SpinConfig{1} << spec.n_sites;
  for (SpinConfig c = 0; c < end; ++c)
    if (detail::signature_word(spec, c) == s) basis.push_back(c);
  return basis;
}

enum class CountKind { zero_sector_dim, attainable_signatures };

namespace detail {

// 2x2 integer matrix power; entries stay below 2^63 for N <= 32
inline std::array<std::uint64_t, 4> mat2_mul(const std::array<std::uint64_t, 4>& a,
                                             const std::array<std::uint64_t, 4>& b) {
  return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3],
          a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
}

}  // namespace detail

/// Exact transfer-matrix counts.
///   zero_sector_dim: states with no two adjacent up spins -- for the
///     periodic ring the trace of [[1,1],[1,0]]^N (a Lucas number), for the
///     open chain the total of all entries of the (N-1)-th power.
///   attainable_signatures: signature words avoiding 101, counted by a
///     transfer matrix on two-bit windows.
inline std::uint64_t count_via_transfer_matrix(const LatticeSpec& spec, CountKind what) {
  spec.validate();
  const int n = spec.n_sites;
  if (what == CountKind::zero_sector_dim) {
    // state = current spin; transition allowed unless both up
    std::array<std::uint64_t, 4> t = {1, 1, 1, 0};
    std::array<std::uint64_t, 4> p = {1, 0, 0, 1};
    if (spec.boundary == Boundary::periodic) {
      for (int i = 0; i < n; ++i) p = detail::mat2_mul(p, t);
      return p[0] + p[3];
    }
    for (int i = 0; i < n - 1; ++i) p = detail::mat2_mul(p, t);
    return p[0] + p[1] + p[2] + p[3];
  }
  // window transfer matrix over (s_i, s_{i+1}); forbids the triple 101
  const int m = spec.qim_count();
  auto allowed = [](int a, int b, int c) { return !(a == 1 && b == 0 && c == 1); };
  if (spec.boundary == Boundary::periodic) {
    // closed walks of length m over windows
    std::uint64_t total = 0;
    for (int w0 = 0; w0 < 4; ++w0) {
      std::array<std::uint64_t, 4> reach{};
      reach[w0] = 1;
      for (int step = 0; step < m; ++step) {
        std::array<std::uint64_t, 4> next{};
        for (int w = 0; w < 4; ++w) {
          if (!reach[w]) continue;
          const int a = w >> 1, b = w & 1;
          for (int c = 0; c < 2; ++c)
            if (allowed(a, b, c)) next[(b << 1) | c] += reach[w];
        }
        reach = next;
      }
      total += reach[w0];
    }
    return total;
  }
  if (m == 1) return 2;
  std::array<std::uint64_t, 4> reach = {1, 1, 1, 1};  // any first window
  for (int step = 0; step < m - 2; ++step) {
    std::array<std::uint64_t, 4> next{};
    for (int w = 0; w < 4; ++w) {
      if (!reach[w]) continue;
      const int a = w >> 1, b = w & 1;
      for (int c = 0; c < 2; ++c)
        if (allowed(a, b, c)) next[(b << 1) | c] += reach[w];
    }
    reach = next;
  }
  return reach[0] + reach[1] + reach[2] + reach[3];
}

/// Brute-force companions to the transfer-matrix counts (full sweep).
inline std::uint64_t count_by_enumeration(const LatticeSpec& spec, CountKind what) {
  spec.require_full_basis();
  const SpinConfig end = SpinConfig{1} << spec.n_sites;
  if (what == CountKind::zero_sector_dim) {
    std::uint64_t n = 0;
    for (SpinConfig c = 0; c < end; ++c)
      if (detail::signature_word(spec, c) == 0) ++n;
    return n;
  }
  std::map<Signature, bool> seen;
  for (SpinConfig c = 0; c < end; ++c) seen[detail::signature_word(spec, c)] = true;
  return seen.size();
}

struct CountReport {
  std::uint64_t attainable_count = 0;
  std::uint64_t zero_sector_dim = 0;
  bool by_enumeration = false;
  bool by_transfer_matrix = false;
};

/// Runs the requested counting routes; when both run their results are
/// compared and a mismatch is a hard error.
inline CountReport count_report(const LatticeSpec& spec, bool enumeration, bool transfer_matrix) {
  CountReport r;
  if (!enumeration && !transfer_matrix) throw UsageError("no counting method selected");
  if (transfer_matrix) {
    r.attainable_count = count_via_transfer_matrix(spec, CountKind::attainable_signatures);
    r.zero_sector_dim = count_via_transfer_matrix(spec, CountKind::zero_sector_dim);
    r.by_transfer_matrix = true;
  }
  if (enumeration) {
    const std::uint64_t att = count_by_enumeration(spec, CountKind::attainable_signatures);
    const std::uint64_t dim = count_by_enumeration(spec, CountKind::zero_sector_dim);
    if (r.by_transfer_matrix && (att != r.attainable_count || dim != r.zero_sector_dim))
      throw std::logic_error("enumeration and transfer-matrix counts disagree at N=" +
                             std::to_string(spec.n_sites));
    r.attainable_count = att;
    r.zero_sector_dim = dim;
    r.by_enumeration = true;
  }
  return r;
}

}  // namespace pxp
