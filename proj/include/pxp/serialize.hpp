#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "pxp/independence.hpp"
#include "pxp/signatures.hpp"
#include "pxp/spectral.hpp"

namespace pxp {

// ordered_json keeps key insertion order so emitted reports are
// byte-reproducible and round-trip through parse/dump unchanged.
using Json = nlohmann::ordered_json;

inline Json foliation_to_json(const LatticeSpec& spec, const SectorFoliation& f,
                              const CountReport& counts) {
  Json sectors = Json::array();
  for (const auto& [sig, states] : f.sectors) {
    Json entry;
    entry["signature"] = signature_to_string(spec, sig);
    entry["dimension"] = states.size();
    sectors.push_back(std::move(entry));
  }
  Json out;
  out["n"] = spec.n_sites;
  out["boundary"] = to_string(spec.boundary);
  out["sectors"] = std::move(sectors);
  out["attainable_count"] = counts.attainable_count;
  return out;
}

inline std::string foliation_to_csv(const LatticeSpec& spec, const SectorFoliation& f) {
  std::ostringstream os;
  os << "signature,dimension\n";
  for (const auto& [sig, states] : f.sectors)
    os << signature_to_string(spec, sig) << "," << states.size() << "\n";
  return os.str();
}

inline Json relation_to_json(const QimSubset& sub, const MultilinearRelation& rel) {
  Json monomials = Json::array();
  // highest-mask monomial first; its coefficient is 1 for nullspace output
  for (auto it = rel.coefficients.rbegin(); it != rel.coefficients.rend(); ++it) {
    Json term;
    Json vars = Json::array();
    for (int k = 0; k < sub.size(); ++k)
      if (it->first & (MonomialMask{1} << k)) vars.push_back(sub.indices[k]);
    term["vars"] = std::move(vars);
    term["coeff"] = rational_to_string(it->second);
    monomials.push_back(std::move(term));
  }
  Json out;
  out["monomials"] = std::move(monomials);
  return out;
}

inline Json relations_to_json(const QimSubset& sub, const std::vector<MultilinearRelation>& rels) {
  Json out;
  out["subset"] = sub.indices;
  Json list = Json::array();
  for (const auto& r : rels) list.push_back(relation_to_json(sub, r));
  out["relations"] = std::move(list);
  return out;
}

inline Json weak_verdict_to_json(const LatticeSpec& spec, const QimSubset& sub,
                                 const WeakVerdict& v) {
  Json out;
  out["weak"] = v.weakly_independent;
  if (v.weakly_independent) {
    Json witnesses = Json::array();
    for (const WeakWitness& w : v.witnesses) {
      Json jw;
      jw["qim"] = w.qim_index;
      jw["config_hi"] = config_to_string(spec, w.config_hi);
      jw["config_lo"] = config_to_string(spec, w.config_lo);
      jw["signature_hi"] = signature_to_string(spec, w.sig_hi);
      jw["signature_lo"] = signature_to_string(spec, w.sig_lo);
      witnesses.push_back(std::move(jw));
    }
    out["witness"] = std::move(witnesses);
  } else {
    Json dep;
    dep["dependent_qim"] = *v.dependent_qim;
    Json table = Json::array();
    for (const auto& [reduced, value] : v.dependence_table) {
      Json row;
      std::string bits(sub.size() - 1, '0');
      for (int k = 0; k + 1 < sub.size(); ++k)
        if (reduced & (QimTuple{1} << k)) bits[k] = '1';
      row["others"] = bits;
      row["value"] = value;
      table.push_back(std::move(row));
    }
    dep["assignment"] = std::move(table);
    out["witness"] = std::move(dep);
  }
  return out;
}

inline std::string tuple_to_string(const QimSubset& sub, QimTuple t) {
  std::string bits(sub.size(), '0');
  for (int k = 0; k < sub.size(); ++k)
    if (t & (QimTuple{1} << k)) bits[k] = '1';
  return bits;
}

inline Json strong_verdict_to_json(const QimSubset& sub, const StrongVerdict& v) {
  Json out;
  out["strong"] = v.strongly_independent;
  out["attainable_count"] = v.attainable_count;
  out["full_count"] = std::uint64_t{1} << sub.size();
  if (!v.strongly_independent) {
    Json w;
    w["forbidden_tuple"] = tuple_to_string(sub, *v.forbidden_tuple);
    w["support"] = v.witness_support;
    w["support_size"] = v.witness_support.size();
    w["indicator_term_count"] = v.indicator_term_count;
    if (v.indicator) w["indicator"] = relation_to_json(sub, *v.indicator);
    out["witness"] = std::move(w);
  }
  return out;
}

inline Json levelstat_to_json(const LatticeSpec& spec, Signature sig, int k, Parity parity,
                              const LevelStatReport& rep) {
  Json out;
  out["n"] = spec.n_sites;
  out["signature"] = signature_to_string(spec, sig);
  out["k"] = k;
  out["parity"] = to_string(parity);
  out["mean_r"] = rep.mean_r;
  out["levels_used"] = rep.levels_used;
  out["trimmed_fraction"] = rep.trimmed_fraction;
  out["zero_modes_discarded"] = rep.zero_modes_discarded;
  out["statistically_meaningful"] = rep.statistically_meaningful;
  return out;
}

inline std::string spectrum_to_csv(const std::vector<double>& eigenvalues) {
  std::ostringstream os;
  os.precision(17);
  os << "eigenvalue\n";
  for (double e : eigenvalues) os << e << "\n";
  return os.str();
}

inline std::string histogram_to_csv(const LevelStatReport& rep) {
  std::ostringstream os;
  os.precision(17);
  os << "bin,count\n";
  for (const auto& [edge, count] : rep.histogram) os << edge << "," << count << "\n";
  return os.str();
}

inline Json neumann_to_json(const NeumannExpansion& exp) {
  Json out;
  out["d"] = exp.dimension;
  out["degree"] = exp.dimension - 1;
  out["term_count"] = exp.dimension;
  out["max_reconstruction_error"] = exp.max_reconstruction_error;
  out["coefficients"] = exp.coefficients;
  return out;
}

/// Whole-string write; nothing is left behind on failure.
inline void write_file_atomically(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + tmp + " for writing");
    os << contents;
    if (!os) throw std::runtime_error("short write to " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("cannot rename " + tmp + " to " + path);
}

}  // namespace pxp
