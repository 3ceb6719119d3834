#pragma once

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <json.hpp>

#include <curvlab/biquot.hpp>

namespace curvlab {

enum class SpaceKind { eschenburg, bazaikin };

inline std::string kind_name(SpaceKind k) {
  return k == SpaceKind::eschenburg ? "eschenburg" : "bazaikin";
}

struct CensusRecord {
  SpaceKind kind = SpaceKind::eschenburg;
  std::optional<EschenburgParams> esch;
  std::optional<BazaikinParams> baz;
  bool free_action = false;
  bool positive = false;                // implies free_action (predicate ordering)
  std::optional<long long> r;           // order invariant; populated only when free
  std::vector<std::string> warnings;

  friend bool operator==(const CensusRecord& a, const CensusRecord& b) {
    auto key = [](const CensusRecord& c) {
      return std::make_tuple(c.kind, c.esch ? std::optional(std::make_pair(c.esch->k, c.esch->l))
                                            : std::nullopt,
                             c.baz ? std::optional(c.baz->q) : std::nullopt, c.free_action,
                             c.positive, c.r, c.warnings);
    };
    return key(a) == key(b);
  }
};

struct CensusFilter {
  bool free_only = false;
  bool positive_only = false;
};

namespace detail {

inline constexpr const char* kScalarKernelWarning = "scalar-kernel exception candidate";

inline std::array<long long, 3> sorted_desc(std::array<long long, 3> a) {
  std::sort(a.begin(), a.end(), std::greater<>());
  return a;
}

// Canonical orbit representative under permutations of k, permutations of l,
// simultaneous translation, and the k<->l swap: sort both triples descending,
// translate so min(l) = 0, then pick the lexicographically smaller of the
// tuple and its swapped-and-recanonicalized form.
inline std::array<long long, 6> esch_canonical(const std::array<long long, 3>& k,
                                               const std::array<long long, 3>& l) {
  auto shape = [](std::array<long long, 3> ks, std::array<long long, 3> ls) {
    ks = sorted_desc(ks);
    ls = sorted_desc(ls);
    const long long c = ls[2];  // min of l after descending sort
    return std::array<long long, 6>{ks[0] - c, ks[1] - c, ks[2] - c,
                                    ls[0] - c, ls[1] - c, ls[2] - c};
  };
  return std::min(shape(k, l), shape(l, k));
}

inline std::array<long long, 5> baz_canonical(std::array<long long, 5> q) {
  std::sort(q.begin(), q.end(), std::greater<>());
  std::array<long long, 5> neg;
  for (int i = 0; i < 5; ++i) neg[i] = -q[i];
  std::sort(neg.begin(), neg.end(), std::greater<>());
  return std::max(q, neg);
}

inline CensusRecord make_esch_record(const EschenburgParams& p) {
  CensusRecord rec;
  rec.kind = SpaceKind::eschenburg;
  rec.esch = p;
  rec.free_action = esch_is_free(p);
  rec.positive = rec.free_action && esch_is_positive(p);
  if (rec.free_action) rec.r = esch_order_h4(p);
  if (!rec.free_action && esch_scalar_kernel_candidate(p))
    rec.warnings.push_back(kScalarKernelWarning);
  return rec;
}

inline CensusRecord make_baz_record(const BazaikinParams& p) {
  CensusRecord rec;
  rec.kind = SpaceKind::bazaikin;
  rec.baz = p;
  rec.free_action = baz_is_free(p);
  rec.positive = rec.free_action && baz_is_positive(p);
  if (rec.free_action) rec.r = baz_order_h6(p);
  return rec;
}

inline bool keep(const CensusRecord& rec, const CensusFilter& f) {
  if (f.free_only && !rec.free_action) return false;
  if (f.positive_only && !rec.positive) return false;
  return true;
}

} // namespace detail

/// All Eschenburg tuples with entries in [-bound, bound] and matching sums.
/// With normalize set, exactly one representative per orbit of the symmetry
/// group (independent permutations, simultaneous translation, k<->l swap) is
/// emitted, in lexicographic order of the canonical form.
inline std::vector<CensusRecord> esch_census(long long bound, bool normalize = true,
                                             const CensusFilter& filter = {}) {
  if (bound < 1) throw std::invalid_argument("esch_census: bound must be at least 1");
  std::set<std::array<long long, 6>> seen;
  std::vector<CensusRecord> out;
  std::array<long long, 3> k{}, l{};
  for (k[0] = -bound; k[0] <= bound; ++k[0])
    for (k[1] = -bound; k[1] <= bound; ++k[1])
      for (k[2] = -bound; k[2] <= bound; ++k[2])
        for (l[0] = -bound; l[0] <= bound; ++l[0])
          for (l[1] = -bound; l[1] <= bound; ++l[1]) {
            l[2] = k[0] + k[1] + k[2] - l[0] - l[1];
            if (l[2] < -bound || l[2] > bound) continue;
            if (normalize) {
              seen.insert(detail::esch_canonical(k, l));
            } else {
              const CensusRecord rec = detail::make_esch_record({k, l});
              if (detail::keep(rec, filter)) out.push_back(rec);
            }
          }
  if (normalize) {
    for (const auto& c : seen) {
      const CensusRecord rec =
          detail::make_esch_record({{c[0], c[1], c[2]}, {c[3], c[4], c[5]}});
      if (detail::keep(rec, filter)) out.push_back(rec);
    }
  }
  return out;
}

/// All Bazaikin tuples with odd entries in [-bound, bound], one representative
/// per orbit of permutations and the global sign flip.
inline std::vector<CensusRecord> baz_census(long long bound, const CensusFilter& filter = {}) {
  if (bound < 1) throw std::invalid_argument("baz_census: bound must be at least 1");
  std::set<std::array<long long, 5>> seen;
  std::array<long long, 5> q{};
  // descending odd entries enumerate each sorted tuple once
  for (q[0] = bound % 2 ? bound : bound - 1; q[0] >= -bound; q[0] -= 2)
    for (q[1] = q[0]; q[1] >= -bound; q[1] -= 2)
      for (q[2] = q[1]; q[2] >= -bound; q[2] -= 2)
        for (q[3] = q[2]; q[3] >= -bound; q[3] -= 2)
          for (q[4] = q[3]; q[4] >= -bound; q[4] -= 2) seen.insert(detail::baz_canonical(q));
  std::vector<CensusRecord> out;
  for (const auto& c : seen) {
    const CensusRecord rec = detail::make_baz_record({c});
    if (detail::keep(rec, filter)) out.push_back(rec);
  }
  return out;
}

/// Exhaustive check against the definition: the action is free iff no root of
/// unity z != 1 makes (z^{k_i}) a permutation of (z^{l_j}).  Works modulo the
/// order of z with exact integer arithmetic.  The order bound must dominate
/// every |gcd(k - l o sigma)| so the search is complete.
inline bool brute_force_free_oracle(const std::array<long long, 3>& k,
                                    const std::array<long long, 3>& l, long long order_bound) {
  long long required = 2;
  std::array<int, 3> perm{0, 1, 2};
  do {
    long long g = 0;
    for (int i = 0; i < 3; ++i) g = detail::gcd_ll(g, k[i] - l[perm[i]]);
    required = std::max(required, g == 0 ? 2 : g);
  } while (std::next_permutation(perm.begin(), perm.end()));
  if (order_bound < required)
    throw std::invalid_argument("brute_force_free_oracle: order_bound " +
                                std::to_string(order_bound) + " is below the gcd bound " +
                                std::to_string(required));
  auto mod = [](long long v, long long m) { return ((v % m) + m) % m; };
  for (long long m = 2; m <= order_bound; ++m)
    for (long long a = 1; a < m; ++a) {
      std::array<long long, 3> ek, el;
      for (int i = 0; i < 3; ++i) {
        ek[i] = mod(a * k[i], m);
        el[i] = mod(a * l[i], m);
      }
      std::sort(ek.begin(), ek.end());
      std::sort(el.begin(), el.end());
      if (ek == el) return false;
    }
  return true;
}

struct CoincidenceGroup {
  SpaceKind kind = SpaceKind::eschenburg;
  long long abs_r = 0;
  std::vector<CensusRecord> members;
};

/// Groups free records sharing |order invariant|, the candidate relation for
/// homeomorphic pairs.  Only groups with at least two members are returned,
/// sorted by |r|.
inline std::vector<CoincidenceGroup> find_coincidences(const std::vector<CensusRecord>& records) {
  std::map<std::pair<int, long long>, CoincidenceGroup> groups;
  for (const CensusRecord& rec : records) {
    if (!rec.free_action || !rec.r) continue;
    const long long abs_r = rec.r < 0 ? -*rec.r : *rec.r;
    auto& g = groups[{static_cast<int>(rec.kind), abs_r}];
    g.kind = rec.kind;
    g.abs_r = abs_r;
    g.members.push_back(rec);
  }
  auto member_key = [](const CensusRecord& rec) {
    std::array<long long, 6> key{};
    if (rec.esch) {
      for (int i = 0; i < 3; ++i) {
        key[i] = rec.esch->k[i];
        key[3 + i] = rec.esch->l[i];
      }
    } else if (rec.baz) {
      for (int i = 0; i < 5; ++i) key[i] = rec.baz->q[i];
    }
    return key;
  };
  std::vector<CoincidenceGroup> out;
  for (auto& [key, g] : groups)
    if (g.members.size() >= 2) {
      // member order independent of input order
      std::sort(g.members.begin(), g.members.end(),
                [&](const CensusRecord& a, const CensusRecord& b) {
                  return member_key(a) < member_key(b);
                });
      out.push_back(std::move(g));
    }
  std::sort(out.begin(), out.end(), [](const CoincidenceGroup& a, const CoincidenceGroup& b) {
    return std::make_pair(a.abs_r, static_cast<int>(a.kind)) <
           std::make_pair(b.abs_r, static_cast<int>(b.kind));
  });
  return out;
}

enum class CensusFormat { csv, jsonl };

inline constexpr const char* kCensusCsvHeader =
    "kind,k1,k2,k3,l1,l2,l3,q1,q2,q3,q4,q5,free,positive,r,warnings";

namespace detail {

inline std::string join_warnings(const std::vector<std::string>& w) {
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) out += (i ? ";" : "") + w[i];
  return out;
}

} // namespace detail

inline void write_census(const std::vector<CensusRecord>& records, std::ostream& os,
                         CensusFormat format) {
  if (format == CensusFormat::csv) {
    os << kCensusCsvHeader << '\n';
    for (const CensusRecord& rec : records) {
      for (const std::string& w : rec.warnings)
        if (w.find_first_of(",;\n\"") != std::string::npos)
          throw std::invalid_argument("write_census: warning text not CSV-safe: " + w);
      os << kind_name(rec.kind) << ',';
      for (int i = 0; i < 3; ++i) {
        if (rec.esch) os << rec.esch->k[i];
        os << ',';
      }
      for (int i = 0; i < 3; ++i) {
        if (rec.esch) os << rec.esch->l[i];
        os << ',';
      }
      for (int i = 0; i < 5; ++i) {
        if (rec.baz) os << rec.baz->q[i];
        os << ',';
      }
      os << (rec.free_action ? "true" : "false") << ','
         << (rec.positive ? "true" : "false") << ',';
      if (rec.r) os << *rec.r;
      os << ',' << detail::join_warnings(rec.warnings) << '\n';
    }
    return;
  }
  for (const CensusRecord& rec : records) {
    nlohmann::ordered_json j;
    j["kind"] = kind_name(rec.kind);
    if (rec.esch) {
      j["k"] = rec.esch->k;
      j["l"] = rec.esch->l;
    }
    if (rec.baz) j["q"] = rec.baz->q;
    j["free"] = rec.free_action;
    j["positive"] = rec.positive;
    if (rec.r)
      j["r"] = *rec.r;
    else
      j["r"] = nullptr;
    j["warnings"] = rec.warnings;
    os << j.dump() << '\n';
  }
}

namespace detail {

[[noreturn]] inline void census_fail(const std::string& name, std::size_t line,
                                     const std::string& message) {
  throw std::invalid_argument(name + ":line " + std::to_string(line) + ": " + message);
}

inline long long parse_ll(const std::string& field, const std::string& name, std::size_t line) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(field, &used);
    if (used != field.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    census_fail(name, line, "expected integer, got '" + field + "'");
  }
}

inline bool parse_bool(const std::string& field, const std::string& name, std::size_t line) {
  if (field == "true") return true;
  if (field == "false") return false;
  census_fail(name, line, "expected true/false, got '" + field + "'");
}

inline SpaceKind parse_kind(const std::string& field, const std::string& name, std::size_t line) {
  if (field == kind_name(SpaceKind::eschenburg)) return SpaceKind::eschenburg;
  if (field == kind_name(SpaceKind::bazaikin)) return SpaceKind::bazaikin;
  census_fail(name, line, "unknown kind '" + field + "'");
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline CensusRecord parse_csv_record(const std::string& text, const std::string& name,
                                     std::size_t line) {
  const std::vector<std::string> f = split(text, ',');
  if (f.size() != 16)
    census_fail(name, line, "expected 16 fields, got " + std::to_string(f.size()));
  CensusRecord rec;
  rec.kind = parse_kind(f[0], name, line);
  const bool has_esch = !f[1].empty();
  const bool has_baz = !f[7].empty();
  if ((rec.kind == SpaceKind::eschenburg) != has_esch ||
      (rec.kind == SpaceKind::bazaikin) != has_baz)
    census_fail(name, line, "parameter columns do not match kind '" + f[0] + "'");
  if (has_esch) {
    EschenburgParams p;
    for (int i = 0; i < 3; ++i) p.k[i] = parse_ll(f[1 + i], name, line);
    for (int i = 0; i < 3; ++i) p.l[i] = parse_ll(f[4 + i], name, line);
    rec.esch = p;
  }
  if (has_baz) {
    BazaikinParams p;
    for (int i = 0; i < 5; ++i) p.q[i] = parse_ll(f[7 + i], name, line);
    rec.baz = p;
  }
  rec.free_action = parse_bool(f[12], name, line);
  rec.positive = parse_bool(f[13], name, line);
  if (!f[14].empty()) rec.r = parse_ll(f[14], name, line);
  if (!f[15].empty()) rec.warnings = split(f[15], ';');
  return rec;
}

inline CensusRecord parse_jsonl_record(const std::string& text, const std::string& name,
                                       std::size_t line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    census_fail(name, line, e.what());
  }
  try {
    CensusRecord rec;
    rec.kind = parse_kind(j.at("kind").get<std::string>(), name, line);
    if (j.contains("k")) {
      EschenburgParams p;
      p.k = j.at("k").get<std::array<long long, 3>>();
      p.l = j.at("l").get<std::array<long long, 3>>();
      rec.esch = p;
    }
    if (j.contains("q")) {
      BazaikinParams p;
      p.q = j.at("q").get<std::array<long long, 5>>();
      rec.baz = p;
    }
    if ((rec.kind == SpaceKind::eschenburg) != rec.esch.has_value() ||
        (rec.kind == SpaceKind::bazaikin) != rec.baz.has_value())
      census_fail(name, line, "parameter keys do not match kind");
    rec.free_action = j.at("free").get<bool>();
    rec.positive = j.at("positive").get<bool>();
    if (!j.at("r").is_null()) rec.r = j.at("r").get<long long>();
    rec.warnings = j.at("warnings").get<std::vector<std::string>>();
    return rec;
  } catch (const nlohmann::json::exception& e) {
    census_fail(name, line, e.what());
  }
}

} // namespace detail

inline std::vector<CensusRecord> read_census(std::istream& is, const std::string& name) {
  std::vector<CensusRecord> out;
  std::string text;
  std::size_t line = 0;
  bool saw_header = false;
  bool jsonl = false;
  while (std::getline(is, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.empty()) continue;
    if (!saw_header && !jsonl) {
      if (text == kCensusCsvHeader) {
        saw_header = true;
        continue;
      }
      if (text.front() == '{') {
        jsonl = true;
      } else {
        detail::census_fail(name, line, "expected CSV header or JSONL object");
      }
    }
    out.push_back(jsonl ? detail::parse_jsonl_record(text, name, line)
                        : detail::parse_csv_record(text, name, line));
  }
  return out;
}

inline void write_census(const std::vector<CensusRecord>& records, const std::string& path,
                         CensusFormat format) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::invalid_argument("write_census: cannot open " + path);
  write_census(records, os, format);
}

inline std::vector<CensusRecord> read_census(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::invalid_argument("read_census: cannot open " + path);
  return read_census(is, path);
}

} // namespace curvlab
