#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pxp/multilinear.hpp"
#include "pxp/signatures.hpp"

namespace pxp {

/// Strictly increasing 1-based QIM indices; M is its size.
struct QimSubset {
  std::vector<int> indices;

  int size() const { return (int)indices.size(); }

  void validate(const LatticeSpec& spec) const {
    if (indices.empty()) throw UsageError("QIM subset must be nonempty");
    int prev = 0;
    for (int i : indices) {
      if (i <= prev) throw UsageError("QIM subset indices must be strictly increasing");
      if (i > spec.qim_count())
        throw UsageError("QIM index " + std::to_string(i) + " out of range [1, " +
                         std::to_string(spec.qim_count()) + "]");
      prev = i;
    }
  }
};

/// Projected eigenvalue tuple over a subset: bit k holds the eigenvalue of
/// the k-th subset member.
using QimTuple = std::uint32_t;

namespace detail {

// Feasibility of a partial signature assignment against the attainable set
// (cyclic/no-101 strings), via the window transfer walk. `fixed` maps 0-based
// QIM position -> required bit; -1 marks a free position.
inline bool assignment_feasible(const LatticeSpec& spec, const std::vector<int>& fixed) {
  const int m = spec.qim_count();
  auto ok_bit = [&](int pos, int b) { return fixed[pos] < 0 || fixed[pos] == b; };
  auto allowed = [](int a, int b, int c) { return !(a == 1 && b == 0 && c == 1); };
  if (spec.boundary == Boundary::periodic) {
    for (int w0 = 0; w0 < 4; ++w0) {
      const int s1 = w0 >> 1, s2 = w0 & 1;
      if (!ok_bit(0, s1) || !ok_bit(1, s2)) continue;
      std::uint8_t reach = std::uint8_t(1u << w0);
      for (int step = 0; step < m; ++step) {
        // window (s_{i}, s_{i+1}) -> (s_{i+1}, s_{i+2}); positions 0-based mod m
        const int nxt = (step + 2) % m;
        std::uint8_t next = 0;
        for (int w = 0; w < 4; ++w) {
          if (!(reach & (1u << w))) continue;
          const int a = w >> 1, b = w & 1;
          for (int c = 0; c < 2; ++c) {
            if (!allowed(a, b, c)) continue;
            // once we wrap, the bit is already pinned by the start window
            if (nxt == 0 && c != s1) continue;
            if (nxt == 1 && c != s2) continue;
            if (nxt > 1 && !ok_bit(nxt, c)) continue;
            next |= std::uint8_t(1u << ((b << 1) | c));
          }
        }
        reach = next;
        if (!reach) break;
      }
      if (reach & (1u << w0)) return true;
    }
    return false;
  }
  // open chain: plain forward walk over m >= 2 positions
  std::uint8_t reach = 0;
  for (int w = 0; w < 4; ++w)
    if (ok_bit(0, w >> 1) && ok_bit(1, w & 1)) reach |= std::uint8_t(1u << w);
  for (int pos = 2; pos < m; ++pos) {
    std::uint8_t next = 0;
    for (int w = 0; w < 4; ++w) {
      if (!(reach & (1u << w))) continue;
      const int a = w >> 1, b = w & 1;
      for (int c = 0; c < 2; ++c)
        if (allowed(a, b, c) && ok_bit(pos, c)) next |= std::uint8_t(1u << ((b << 1) | c));
    }
    reach = next;
    if (!reach) return false;
  }
  return reach != 0;
}

// Least attainable signature consistent with the assignment, deciding sites
// 1..M in order and preferring eigenvalue 0. Empty when infeasible.
inline std::optional<Signature> least_feasible_signature(const LatticeSpec& spec,
                                                         std::vector<int> fixed) {
  if (!assignment_feasible(spec, fixed)) return std::nullopt;
  const int m = spec.qim_count();
  for (int pos = 0; pos < m; ++pos) {
    if (fixed[pos] >= 0) continue;
    fixed[pos] = 0;
    if (!assignment_feasible(spec, fixed)) fixed[pos] = 1;
  }
  Signature s = 0;
  for (int pos = 0; pos < m; ++pos)
    if (fixed[pos] == 1) s |= Signature{1} << pos;
  return s;
}

inline std::vector<int> tuple_to_assignment(const LatticeSpec& spec, const QimSubset& sub,
                                            QimTuple t) {
  std::vector<int> fixed(spec.qim_count(), -1);
  for (int k = 0; k < sub.size(); ++k) fixed[sub.indices[k] - 1] = int((t >> k) & 1);
  return fixed;
}

}  // namespace detail

/// True iff some attainable signature restricts to tuple `t` on `sub`.
inline bool tuple_attainable(const LatticeSpec& spec, const QimSubset& sub, QimTuple t) {
  return detail::assignment_feasible(spec, detail::tuple_to_assignment(spec, sub, t));
}

/// Exact projection of the attainable signature set onto a subset, by full
/// configuration sweep (possible for N <= 14).
inline std::set<QimTuple> project_attainable_enumeration(const LatticeSpec& spec,
                                                         const QimSubset& sub) {
  spec.require_full_basis();
  sub.validate(spec);
  std::set<QimTuple> out;
  const SpinConfig end = SpinConfig{1} << spec.n_sites;
  for (SpinConfig c = 0; c < end; ++c) {
    const Signature s = detail::signature_word(spec, c);
    QimTuple t = 0;
    for (int k = 0; k < sub.size(); ++k)
      if ((s >> (sub.indices[k] - 1)) & 1) t |= QimTuple{1} << k;
    out.insert(t);
  }
  return out;
}

/// Same projection via the transfer-walk feasibility test, one query per
/// candidate tuple; independent of any 2^N sweep.
inline std::set<QimTuple> project_attainable_walk(const LatticeSpec& spec, const QimSubset& sub) {
  spec.validate();
  sub.validate(spec);
  if (sub.size() > 20) throw UsageError("subset too large for tuple projection (M <= 20)");
  std::set<QimTuple> out;
  for (QimTuple t = 0; t < (QimTuple{1} << sub.size()); ++t)
    if (tuple_attainable(spec, sub, t)) out.insert(t);
  return out;
}

inline std::set<QimTuple> project_attainable(const LatticeSpec& spec, const QimSubset& sub) {
  sub.validate(spec);
  if (spec.n_sites <= 14) return project_attainable_enumeration(spec, sub);
  return project_attainable_walk(spec, sub);
}

/// Two joint eigenstates agreeing on every subset QIM except `qim_index`:
/// the paper-style demonstration that this QIM is not a function of the rest.
struct WeakWitness {
  int qim_index = 0;
  SpinConfig config_hi = 0;  // realizes eigenvalue 1 at qim_index
  SpinConfig config_lo = 0;  // realizes eigenvalue 0, same elsewhere
  Signature sig_hi = 0;
  Signature sig_lo = 0;
};

struct WeakVerdict {
  bool weakly_independent = false;
  std::vector<WeakWitness> witnesses;  // one per subset member when independent
  std::optional<int> dependent_qim;    // first failing index otherwise
  // the functional assignment demonstrating dependence: reduced tuple over
  // the remaining members -> forced eigenvalue at dependent_qim
  std::vector<std::pair<QimTuple, int>> dependence_table;
};

/// Definition-1 test: independent unless some member is a function of the
/// others on the attainable joint spectrum.
inline WeakVerdict is_weakly_independent(const LatticeSpec& spec, const QimSubset& sub) {
  sub.validate(spec);
  const std::set<QimTuple> tuples = project_attainable(spec, sub);
  WeakVerdict verdict;
  const int m = sub.size();
  for (int k = 0; k < m; ++k) {
    const QimTuple bit = QimTuple{1} << k;
    std::optional<QimTuple> hi;
    for (QimTuple t : tuples)
      if ((t & bit) && tuples.count(t & ~bit)) {
        hi = t;
        break;
      }
    if (!hi) {
      // the member is a function of the others; tabulate it
      verdict.weakly_independent = false;
      verdict.dependent_qim = sub.indices[k];
      std::map<QimTuple, int> table;
      for (QimTuple t : tuples) {
        QimTuple reduced = 0;
        int out = 0;
        for (int j = 0; j < m; ++j) {
          if (j == k) continue;
          if (t & (QimTuple{1} << j)) reduced |= QimTuple{1} << out;
          ++out;
        }
        table[reduced] = int((t >> k) & 1);
      }
      verdict.dependence_table.assign(table.begin(), table.end());
      return verdict;
    }
    // realize the pair: extend the hi tuple to a least attainable signature,
    // then drop the distinguished QIM by flipping one of its two up spins
    WeakWitness w;
    w.qim_index = sub.indices[k];
    auto sig_hi = detail::least_feasible_signature(
        spec, detail::tuple_to_assignment(spec, sub, *hi));
    if (!sig_hi) throw std::logic_error("projection routes disagree on an attainable tuple");
    w.sig_hi = *sig_hi;
    w.config_hi = witness_candidate(spec, w.sig_hi);
    const QimTuple lo = *hi & ~bit;
    bool placed = false;
    for (int flip : {w.qim_index, spec.next_site(w.qim_index)}) {
      const SpinConfig cand = w.config_hi & ~(SpinConfig{1} << (flip - 1));
      const Signature s = signature_of(spec, cand);
      QimTuple proj = 0;
      for (int j = 0; j < m; ++j)
        if ((s >> (sub.indices[j] - 1)) & 1) proj |= QimTuple{1} << j;
      if (proj == lo) {
        w.config_lo = cand;
        w.sig_lo = s;
        placed = true;
        break;
      }
    }
    if (!placed) {  // realize the lo tuple independently
      auto sig_lo = detail::least_feasible_signature(
          spec, detail::tuple_to_assignment(spec, sub, lo));
      if (!sig_lo) throw std::logic_error("projection routes disagree on an attainable tuple");
      w.sig_lo = *sig_lo;
      w.config_lo = witness_candidate(spec, w.sig_lo);
    }
    verdict.witnesses.push_back(w);
  }
  verdict.weakly_independent = true;
  return verdict;
}

struct StrongVerdict {
  bool strongly_independent = false;
  std::uint64_t attainable_count = 0;  // certificate: equals 2^M when independent
  std::optional<QimTuple> forbidden_tuple;
  std::vector<int> witness_support;  // minimal QIM indices already unattainable
  std::optional<MultilinearRelation> indicator;  // explicit nontrivial relation
  std::size_t indicator_term_count = 0;
};

namespace detail {

// Infeasibility of the forbidden tuple restricted to the support positions.
inline bool support_infeasible(const LatticeSpec& spec, const QimSubset& sub, QimTuple t,
                               const std::vector<int>& positions) {
  std::vector<int> fixed(spec.qim_count(), -1);
  for (int k : positions) fixed[sub.indices[k] - 1] = int((t >> k) & 1);
  return !assignment_feasible(spec, fixed);
}

}  // namespace detail

/// Definition-3 certificate: strong independence holds iff every one of the
/// 2^M eigenvalue tuples is attainable (full attainability makes every
/// vanishing polynomial trivial per Definition 2). A failing subset yields
/// the first forbidden tuple, its minimal support, and the support indicator
/// polynomial as an explicit nontrivial relation.
inline StrongVerdict is_strongly_independent(const LatticeSpec& spec, const QimSubset& sub) {
  sub.validate(spec);
  const int m = sub.size();
  if (m > 20) throw UsageError("strong-independence check limited to M <= 20 variables");
  StrongVerdict verdict;
  std::optional<QimTuple> forbidden;
  for (QimTuple t = 0; t < (QimTuple{1} << m); ++t) {
    if (tuple_attainable(spec, sub, t))
      ++verdict.attainable_count;
    else if (!forbidden)
      forbidden = t;
  }
  if (!forbidden) {
    verdict.strongly_independent = true;
    return verdict;
  }
  verdict.forbidden_tuple = forbidden;

  // minimal support: greedy shrink, then exhaustive over the survivor set
  std::vector<int> support(m);
  for (int k = 0; k < m; ++k) support[k] = k;
  for (int k = 0; k < m; ++k) {
    std::vector<int> trial;
    for (int p : support)
      if (p != k) trial.push_back(p);
    if (trial.size() < support.size() && detail::support_infeasible(spec, sub, *forbidden, trial))
      support = trial;
  }
  if (support.size() <= 16) {
    const int s = (int)support.size();
    std::vector<int> best = support;
    for (int size = 1; size < s; ++size) {
      bool found = false;
      for (std::uint32_t mask = 0; mask < (1u << s) && !found; ++mask) {
        if (__builtin_popcount(mask) != size) continue;
        std::vector<int> trial;
        for (int b = 0; b < s; ++b)
          if (mask & (1u << b)) trial.push_back(support[b]);
        if (detail::support_infeasible(spec, sub, *forbidden, trial)) {
          best = trial;
          found = true;
        }
      }
      if (found) break;
    }
    support = best;
  }
  for (int p : support) verdict.witness_support.push_back(sub.indices[p]);

  // indicator of the forbidden tuple over the support: vanishes on every
  // attainable tuple, nonzero as a multilinear polynomial
  MultilinearRelation ind;
  ind.set(0, Rational(1));
  for (int p : support) {
    const bool one = (*forbidden >> p) & 1;
    MultilinearRelation next;
    for (const auto& [mask, coeff] : ind.coefficients) {
      const MonomialMask with = mask | (MonomialMask{1} << p);
      if (one) {
        next.set(with, next.coefficients.count(with) ? next.coefficients[with] + coeff : coeff);
      } else {
        auto cur = next.coefficients.count(mask) ? next.coefficients[mask] : Rational(0);
        next.set(mask, cur + coeff);
        auto curw = next.coefficients.count(with) ? next.coefficients[with] : Rational(0);
        next.set(with, curw - coeff);
      }
    }
    ind = std::move(next);
  }
  verdict.indicator = ind;
  verdict.indicator_term_count = ind.coefficients.size();
  return verdict;
}

/// Basis of the exact rational nullspace of the evaluation matrix
/// (rows: attainable tuples, columns: multilinear monomials of degree up to
/// `max_degree`, ascending mask order). Every returned relation vanishes on
/// the attainable joint spectrum and is a nonzero multilinear polynomial.
inline std::vector<MultilinearRelation> find_relations(const LatticeSpec& spec,
                                                       const QimSubset& sub, int max_degree) {
  sub.validate(spec);
  const int m = sub.size();
  if (m > 20) throw UsageError("relation search limited to M <= 20 variables");
  if (max_degree < 0 || max_degree > m)
    throw UsageError("max_degree must be in [0, M]");
  std::vector<MonomialMask> monomials;
  for (MonomialMask mask = 0; mask < (MonomialMask{1} << m); ++mask)
    if (__builtin_popcount(mask) <= max_degree) monomials.push_back(mask);
  const std::vector<QimTuple> tuples = [&] {
    const auto s = project_attainable(spec, sub);
    return std::vector<QimTuple>(s.begin(), s.end());
  }();
  if (tuples.size() * monomials.size() > (std::size_t{1} << 24))
    throw UsageError("evaluation matrix too large (" + std::to_string(tuples.size()) + " x " +
                     std::to_string(monomials.size()) + ")");

  std::vector<std::vector<Rational>> matrix(tuples.size());
  for (std::size_t r = 0; r < tuples.size(); ++r) {
    matrix[r].reserve(monomials.size());
    for (MonomialMask mask : monomials)
      matrix[r].emplace_back((tuples[r] & mask) == mask ? 1 : 0);
  }
  const auto basis = rational_nullspace(std::move(matrix), monomials.size());
  std::vector<MultilinearRelation> out;
  out.reserve(basis.size());
  for (const auto& v : basis) {
    MultilinearRelation rel;
    for (std::size_t j = 0; j < v.size(); ++j)
      if (v[j] != 0) rel.coefficients.emplace(monomials[j], v[j]);
    out.push_back(std::move(rel));
  }
  return out;
}

enum class RelationClass { trivial, nontrivial, not_a_relation };

inline const char* to_string(RelationClass c) {
  switch (c) {
    case RelationClass::trivial: return "trivial";
    case RelationClass::nontrivial: return "nontrivial";
    default: return "not_a_relation";
  }
}

struct ClassifyResult {
  RelationClass cls = RelationClass::trivial;
  MultilinearRelation normal_form;
  std::optional<QimTuple> failing_tuple;  // attainable tuple where F != 0
};

/// Definition-2 classifier. Reduce F by x^2 = x; an identically-zero normal
/// form is trivial; otherwise F is a nontrivial relation iff it vanishes on
/// every attainable tuple of the subset.
inline ClassifyResult classify_relation(const LatticeSpec& spec, const QimSubset& sub,
                                        const Polynomial& f) {
  sub.validate(spec);
  if ((int)f.n_vars != sub.size())
    throw UsageError("polynomial arity " + std::to_string(f.n_vars) +
                     " does not match subset size " + std::to_string(sub.size()));
  ClassifyResult res;
  res.normal_form = multilinear_normal_form(f);
  if (res.normal_form.is_zero()) {
    res.cls = RelationClass::trivial;
    return res;
  }
  for (QimTuple t : project_attainable(spec, sub)) {
    if (res.normal_form.evaluate(t) != 0) {
      res.cls = RelationClass::not_a_relation;
      res.failing_tuple = t;
      return res;
    }
  }
  res.cls = RelationClass::nontrivial;
  return res;
}

struct MaxSubsetResult {
  int size = 0;
  QimSubset subset;       // lexicographically least maximizer
  bool exhaustive = true; // false when the branch-and-bound was skipped for large N
};

namespace detail {

// Local pruning rule: three cyclically consecutive QIM indices can never be
// strongly independent (their (1,0,1) tuple is forbidden).
inline bool rule_allows(const LatticeSpec& spec, const std::vector<char>& in, int just_added) {
  const int m = spec.qim_count();
  auto has = [&](int idx) {  // 1-based, wrapped for periodic
    if (spec.boundary == Boundary::periodic)
      idx = (idx - 1 + m) % m + 1;
    else if (idx < 1 || idx > m)
      return false;
    return in[idx] != 0;
  };
  auto triple = [&](int a) { return has(a) && has(a + 1) && has(a + 2); };
  if (triple(just_added - 2) || triple(just_added - 1) || triple(just_added)) return false;
  return true;
}

inline void max_subset_dfs(const LatticeSpec& spec, int next, std::vector<char>& in, int chosen,
                           MaxSubsetResult& best) {
  const int m = spec.qim_count();
  if (chosen + (m - next + 1) <= best.size) return;  // bound
  if (next > m) {
    if (chosen <= best.size) return;
    QimSubset cand;
    for (int i = 1; i <= m; ++i)
      if (in[i]) cand.indices.push_back(i);
    // certify with the real attainability count, not just the rule
    if (is_strongly_independent(spec, cand).strongly_independent) {
      best.size = chosen;
      best.subset = cand;
    }
    return;
  }
  in[next] = 1;
  if (rule_allows(spec, in, next)) max_subset_dfs(spec, next + 1, in, chosen + 1, best);
  in[next] = 0;
  max_subset_dfs(spec, next + 1, in, chosen, best);
}

}  // namespace detail

/// Maximum-cardinality strongly independent subset of {I_1..I_M}, by
/// branch-and-bound with the consecutive-triple pruning rule; candidates are
/// certified by the full attainability check. N <= 15 runs exhaustively;
/// larger N falls back to the greedy rule-constrained set, flagged in the
/// result and still certified.
inline MaxSubsetResult max_independent_subset(const LatticeSpec& spec) {
  spec.validate();
  MaxSubsetResult best;
  if (spec.n_sites <= 15) {
    std::vector<char> in(spec.qim_count() + 2, 0);
    detail::max_subset_dfs(spec, 1, in, 0, best);
    return best;
  }
  best.exhaustive = false;
  std::vector<char> in(spec.qim_count() + 2, 0);
  for (int i = 1; i <= spec.qim_count(); ++i) {
    in[i] = 1;
    if (detail::rule_allows(spec, in, i))
      best.subset.indices.push_back(i);
    else
      in[i] = 0;
  }
  best.size = best.subset.size();
  if (!is_strongly_independent(spec, best.subset).strongly_independent)
    throw std::logic_error("greedy rule-constrained subset failed certification");
  return best;
}

struct InclusionExtension {
  int qim_index = 0;
  bool still_strong = false;
};

struct InclusionReport {
  bool precondition_ok = false;  // the given subset is itself strongly independent
  bool maximal_by_inclusion = false;
  std::vector<InclusionExtension> extensions;
};

/// Checks whether adding any single QIM outside `sub` preserves strong
/// independence. A failed precondition is reported, not thrown.
inline InclusionReport maximal_by_inclusion_check(const LatticeSpec& spec, const QimSubset& sub) {
  sub.validate(spec);
  InclusionReport rep;
  rep.precondition_ok = is_strongly_independent(spec, sub).strongly_independent;
  if (!rep.precondition_ok) return rep;
  rep.maximal_by_inclusion = true;
  for (int i = 1; i <= spec.qim_count(); ++i) {
    if (std::find(sub.indices.begin(), sub.indices.end(), i) != sub.indices.end()) continue;
    QimSubset ext = sub;
    ext.indices.insert(std::lower_bound(ext.indices.begin(), ext.indices.end(), i), i);
    const bool strong = is_strongly_independent(spec, ext).strongly_independent;
    rep.extensions.push_back({i, strong});
    if (strong) rep.maximal_by_inclusion = false;
  }
  return rep;
}

}  // namespace pxp
