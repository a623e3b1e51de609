#pragma once

// JSON configuration documents <-> DesignSpec. The schema is described in
// docs/config-schema.md.

#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gsdopt/design.hpp"
#include "gsdopt/error.hpp"

namespace gsdopt {

using json = nlohmann::ordered_json;

inline constexpr int kReportFormatVersion = 1;

namespace detail {

inline const json& require(const json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) throw SchemaError(path + key, "required field is missing");
  return j.at(key);
}

inline double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw SchemaError(path, "expected a number");
  return j.get<double>();
}

inline double number_or(const json& j, const std::string& key, const std::string& path, double fallback) {
  return j.contains(key) ? number(j.at(key), path + key) : fallback;
}

inline std::string text(const json& j, const std::string& path) {
  if (!j.is_string()) throw SchemaError(path, "expected a string");
  return j.get<std::string>();
}

inline void reject_unknown(const json& j, std::initializer_list<const char*> allowed, const std::string& path) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw SchemaError(path + it.key(), "unknown field");
  }
}

inline BoundaryFamily parse_family(const json& j, const std::string& path) {
  if (!j.is_object()) throw SchemaError(path.substr(0, path.size() - 1), "expected an object");
  const std::string name = text(require(j, "family", path), path + "family");
  BoundaryFamily f;
  if (name == "haybittle-peto") {
    reject_unknown(j, {"family", "interim_bound"}, path);
    f = HaybittlePeto{number_or(j, "interim_bound", path, 3.0)};
  } else if (name == "pocock") {
    reject_unknown(j, {"family"}, path);
    f = PocockSpending{};
  } else if (name == "obrien-fleming") {
    reject_unknown(j, {"family"}, path);
    f = OBrienFlemingSpending{};
  } else if (name == "kim-demets") {
    reject_unknown(j, {"family", "rho"}, path);
    f = KimDeMetsPower{number(require(j, "rho", path), path + "rho")};
  } else if (name == "hwang-shih-decani") {
    reject_unknown(j, {"family", "gamma"}, path);
    f = HwangShihDeCani{number(require(j, "gamma", path), path + "gamma")};
  } else if (name == "custom") {
    reject_unknown(j, {"family", "table"}, path);
    const json& t = require(j, "table", path);
    if (!t.is_array()) throw SchemaError(path + "table", "expected an array of [t, spend] pairs");
    CustomSpending c;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const std::string p = path + "table[" + std::to_string(i) + "]";
      if (!t[i].is_array() || t[i].size() != 2) throw SchemaError(p, "expected a [t, spend] pair");
      c.table.emplace_back(number(t[i][0], p), number(t[i][1], p));
    }
    f = std::move(c);
  } else {
    throw SchemaError(path + "family", "unknown family '" + name + "'");
  }
  try {
    validate_family(f);
  } catch (const DomainError& e) {
    throw SchemaError(path.substr(0, path.size() - 1), e.what());
  }
  return f;
}

inline json family_to_json(const BoundaryFamily& f) {
  json j;
  j["family"] = family_name(f);
  if (const auto* hp = std::get_if<HaybittlePeto>(&f)) j["interim_bound"] = hp->interim_bound;
  if (const auto* kd = std::get_if<KimDeMetsPower>(&f)) j["rho"] = kd->rho;
  if (const auto* hsd = std::get_if<HwangShihDeCani>(&f)) j["gamma"] = hsd->gamma;
  if (const auto* c = std::get_if<CustomSpending>(&f)) {
    j["table"] = json::array();
    for (const auto& [t, s] : c->table) j["table"].push_back({t, s});
  }
  return j;
}

inline const char* futility_mode_name(FutilityMode m) {
  switch (m) {
    case FutilityMode::None: return "none";
    case FutilityMode::Binding: return "binding";
    case FutilityMode::NonBinding: return "nonbinding";
  }
  return "none";
}

}  // namespace detail

inline FutilityMode parse_futility_mode(const std::string& s) {
  if (s == "none") return FutilityMode::None;
  if (s == "binding") return FutilityMode::Binding;
  if (s == "nonbinding" || s == "non-binding") return FutilityMode::NonBinding;
  throw SchemaError("futility.mode", "expected one of none, binding, nonbinding");
}

/// Parses a design document. A full report (with a top-level "design" block) is
/// accepted too, so reports can be fed back as input.
inline DesignSpec parse_design(const json& doc) {
  if (!doc.is_object()) throw SchemaError("(root)", "expected an object");
  if (doc.contains("design")) return parse_design(doc.at("design"));
  detail::reject_unknown(doc,
                         {"stages", "alpha", "beta", "sidedness", "boundary", "futility", "endpoint", "rates",
                          "planned_sizes", "name"},
                         "");
  DesignSpec s;
  const json& st = detail::require(doc, "stages", "");
  if (!st.is_number_integer() || st.get<long long>() < 1 || st.get<long long>() > 20) {
    throw SchemaError("stages", "expected an integer between 1 and 20");
  }
  s.stages = st.get<int>();
  s.alpha = detail::number(detail::require(doc, "alpha", ""), "alpha");
  s.beta = detail::number(detail::require(doc, "beta", ""), "beta");

  Sidedness sided = Sidedness::OneSided;
  if (doc.contains("sidedness")) {
    const std::string v = detail::text(doc.at("sidedness"), "sidedness");
    if (v == "one-sided") {
      sided = Sidedness::OneSided;
    } else if (v == "two-sided") {
      sided = Sidedness::TwoSidedSymmetric;
    } else {
      throw SchemaError("sidedness", "expected one-sided or two-sided");
    }
  }
  s.boundary_rule = {detail::parse_family(detail::require(doc, "boundary", ""), "boundary."), sided};

  if (doc.contains("futility")) {
    const json& f = doc.at("futility");
    if (!f.is_object()) throw SchemaError("futility", "expected an object");
    detail::reject_unknown(f, {"mode", "spending"}, "futility.");
    s.futility.mode = parse_futility_mode(detail::text(detail::require(f, "mode", "futility."), "futility.mode"));
    if (f.contains("spending")) {
      if (s.futility.mode == FutilityMode::None) {
        throw SchemaError("futility.spending", "must be absent when mode is none");
      }
      s.futility.spending = detail::parse_family(f.at("spending"), "futility.spending.");
    } else if (s.futility.mode != FutilityMode::None) {
      throw SchemaError("futility.spending", "required when mode is binding or nonbinding");
    }
  }

  const json& e = detail::require(doc, "endpoint", "");
  if (!e.is_object()) throw SchemaError("endpoint", "expected an object");
  const std::string kind = detail::text(detail::require(e, "kind", "endpoint."), "endpoint.kind");
  if (kind == "continuous") {
    detail::reject_unknown(e, {"kind", "delta_star", "sigma", "allocation_ratio"}, "endpoint.");
    s.endpoint.kind = ContinuousEndpoint{detail::number(detail::require(e, "delta_star", "endpoint."), "endpoint.delta_star"),
                                         detail::number_or(e, "sigma", "endpoint.", 1.0)};
  } else if (kind == "binary") {
    detail::reject_unknown(e, {"kind", "p_control", "p_treatment", "allocation_ratio"}, "endpoint.");
    s.endpoint.kind = BinaryEndpoint{detail::number(detail::require(e, "p_control", "endpoint."), "endpoint.p_control"),
                                     detail::number(detail::require(e, "p_treatment", "endpoint."), "endpoint.p_treatment")};
  } else {
    throw SchemaError("endpoint.kind", "expected continuous or binary");
  }
  s.endpoint.allocation_ratio = detail::number_or(e, "allocation_ratio", "endpoint.", 1.0);

  if (doc.contains("rates") && doc.contains("planned_sizes")) {
    throw SchemaError("rates", "give either rates or planned_sizes, not both");
  }
  std::vector<double> t;
  std::string rates_field = "rates";
  if (doc.contains("rates")) {
    const json& r = doc.at("rates");
    if (!r.is_array()) throw SchemaError("rates", "expected an array of numbers");
    for (std::size_t i = 0; i < r.size(); ++i) t.push_back(detail::number(r[i], "rates[" + std::to_string(i) + "]"));
  } else if (doc.contains("planned_sizes")) {
    rates_field = "planned_sizes";
    const json& r = doc.at("planned_sizes");
    if (!r.is_array() || r.empty()) throw SchemaError("planned_sizes", "expected a non-empty array of numbers");
    for (std::size_t i = 0; i < r.size(); ++i) {
      t.push_back(detail::number(r[i], "planned_sizes[" + std::to_string(i) + "]"));
    }
    const double total = t.back();
    if (!(total > 0.0)) throw SchemaError("planned_sizes", "final size must be positive");
    for (double& v : t) v /= total;
    t.back() = 1.0;
  }
  if (t.empty()) {
    s.rates = InformationRates::equally_spaced(s.stages);
  } else {
    if (static_cast<int>(t.size()) != s.stages) {
      throw SchemaError(rates_field, "expected " + std::to_string(s.stages) + " entries, one per stage");
    }
    try {
      s.rates = InformationRates(t);
    } catch (const DomainError& ex) {
      throw SchemaError(rates_field, ex.what());
    }
  }
  try {
    validate(s);
  } catch (const DomainError& ex) {
    throw SchemaError("(root)", ex.what());
  }
  return s;
}

/// Parses document text; syntax errors report the line number.
inline DesignSpec parse_design_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    int line = 1;
    for (std::size_t i = 0; i < std::min<std::size_t>(e.byte, text.size()); ++i) line += text[i] == '\n';
    throw SchemaError("", std::string("syntax error: ") + e.what(), line);
  }
  return parse_design(doc);
}

inline DesignSpec load_design_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("(input)", "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_design_text(ss.str());
}

/// Canonical document for a spec; parse_design(design_to_json(s)) == s.
inline json design_to_json(const DesignSpec& s) {
  json j;
  j["stages"] = s.stages;
  j["alpha"] = s.alpha;
  j["beta"] = s.beta;
  j["sidedness"] = s.sidedness() == Sidedness::OneSided ? "one-sided" : "two-sided";
  j["boundary"] = detail::family_to_json(s.boundary_rule.family);
  json f;
  f["mode"] = detail::futility_mode_name(s.futility.mode);
  if (s.futility.spending) f["spending"] = detail::family_to_json(*s.futility.spending);
  j["futility"] = f;
  json e;
  if (const auto* c = std::get_if<ContinuousEndpoint>(&s.endpoint.kind)) {
    e["kind"] = "continuous";
    e["delta_star"] = c->delta_star;
    e["sigma"] = c->sigma;
  } else {
    const auto& b = std::get<BinaryEndpoint>(s.endpoint.kind);
    e["kind"] = "binary";
    e["p_control"] = b.p_control;
    e["p_treatment"] = b.p_treatment;
  }
  e["allocation_ratio"] = s.endpoint.allocation_ratio;
  j["endpoint"] = e;
  j["rates"] = s.rates.vector();
  return j;
}

}  // namespace gsdopt
