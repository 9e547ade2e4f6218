#pragma once

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "padic/cauchy.hpp"
#include "padic/core.hpp"
#include "padic/elliptic.hpp"
#include "padic/radial.hpp"

namespace padic {

using nlohmann::json;

// ---- scalars and points -------------------------------------------------
// A scalar serializes as ["<ord>", "<digits>"]: the valuation as a decimal
// string ("inf" for zero) and the digit window as base-p characters, least
// significant first.

namespace jsondetail {

inline char digit_char(uint32_t d) { return d < 10 ? char('0' + d) : char('a' + d - 10); }

inline uint32_t digit_value(char c) {
  if (c >= '0' && c <= '9') return uint32_t(c - '0');
  if (c >= 'a' && c <= 'z') return uint32_t(c - 'a' + 10);
  throw std::domain_error(std::string("invalid digit character '") + c + "'");
}

inline json complex_to_json(complex_t v) { return json::array({v.real(), v.imag()}); }

inline complex_t complex_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) throw std::domain_error("expected [re, im]");
  return complex_t(j[0].get<double>(), j[1].get<double>());
}

}  // namespace jsondetail

inline json scalar_to_json(const PAdicScalar& x) {
  if (x.is_zero()) return json::array({"inf", ""});
  std::string digits;
  for (uint32_t d : x.digits()) digits.push_back(jsondetail::digit_char(d));
  return json::array({std::to_string(x.order()), digits});
}

inline PAdicScalar scalar_from_json(const json& j, long long prime) {
  if (!j.is_array() || j.size() != 2) throw std::domain_error("scalar: expected [ord, digits]");
  std::string ord = j[0].get<std::string>();
  std::string digits = j[1].get<std::string>();
  if (ord == "inf") return PAdicScalar::zero(prime);
  std::vector<uint32_t> d;
  d.reserve(digits.size());
  for (char c : digits) {
    uint32_t v = jsondetail::digit_value(c);
    if (v >= uint32_t(prime)) throw std::domain_error("scalar: digit out of range for base p");
    d.push_back(v);
  }
  return PAdicScalar::from_digits(prime, std::stoi(ord), d);
}

inline json point_to_json(const PAdicPoint& x) {
  json arr = json::array();
  for (const auto& c : x.coords()) arr.push_back(scalar_to_json(c));
  return arr;
}

inline PAdicPoint point_from_json(const json& j, long long prime) {
  if (!j.is_array() || j.empty()) throw std::domain_error("point: expected coordinate array");
  std::vector<PAdicScalar> cs;
  cs.reserve(j.size());
  for (const auto& e : j) cs.push_back(scalar_from_json(e, prime));
  return PAdicPoint(std::move(cs));
}

// ---- radial tails -------------------------------------------------------

inline json radial_to_json(const RadialFunction& f) {
  json j;
  j["m_lo"] = f.m_lo();
  json table = json::array();
  for (int m = f.m_lo(); m <= f.m_hi(); ++m) table.push_back(jsondetail::complex_to_json(f.at_exp(m)));
  j["table"] = table;
  j["value_at_zero"] = jsondetail::complex_to_json(f.value_at_zero());
  switch (f.tail_lo().kind) {
    case TailLo::Kind::Zero: j["tail_lo"] = {{"kind", "zero"}}; break;
    case TailLo::Kind::Constant:
      j["tail_lo"] = {{"kind", "constant"}, {"value", jsondetail::complex_to_json(f.tail_lo().value)}};
      break;
    case TailLo::Kind::Evaluator:
      throw std::domain_error("radial_to_json: evaluator tails are not serializable");
  }
  switch (f.tail_hi().kind) {
    case TailHi::Kind::Zero: j["tail_hi"] = {{"kind", "zero"}}; break;
    case TailHi::Kind::PowerLaw:
      j["tail_hi"] = {{"kind", "power_law"},
                      {"coeff", jsondetail::complex_to_json(f.tail_hi().coeff)},
                      {"sigma", f.tail_hi().sigma}};
      break;
    case TailHi::Kind::Evaluator:
      throw std::domain_error("radial_to_json: evaluator tails are not serializable");
  }
  return j;
}

inline RadialFunction radial_from_json(const json& j, long long prime, int n) {
  int m_lo = j.at("m_lo").get<int>();
  std::vector<complex_t> table;
  for (const auto& e : j.at("table")) table.push_back(jsondetail::complex_from_json(e));
  complex_t v0 = jsondetail::complex_from_json(j.at("value_at_zero"));
  TailLo lo = TailLo::zero();
  if (j.contains("tail_lo")) {
    std::string kind = j["tail_lo"].at("kind").get<std::string>();
    if (kind == "constant")
      lo = TailLo::constant(jsondetail::complex_from_json(j["tail_lo"].at("value")));
    else if (kind != "zero")
      throw std::domain_error("radial_from_json: unknown tail_lo kind '" + kind + "'");
  }
  TailHi hi = TailHi::zero();
  if (j.contains("tail_hi")) {
    std::string kind = j["tail_hi"].at("kind").get<std::string>();
    if (kind == "power_law")
      hi = TailHi::power_law(jsondetail::complex_from_json(j["tail_hi"].at("coeff")),
                             j["tail_hi"].at("sigma").get<double>());
    else if (kind != "zero")
      throw std::domain_error("radial_from_json: unknown tail_hi kind '" + kind + "'");
  }
  return RadialFunction(prime, n, m_lo, std::move(table), v0, std::move(lo), std::move(hi));
}

// ---- locally constant functions ------------------------------------------

inline json lcf_to_json(const LocallyConstantFunction& f) {
  json j;
  json pieces = json::array();
  for (const auto& pc : f.pieces())
    pieces.push_back(json{{"center", point_to_json(pc.ball.center())},
                          {"radius_exp", pc.ball.radius_exp()},
                          {"value", jsondetail::complex_to_json(pc.value)}});
  j["pieces"] = pieces;
  j["tail"] = f.has_tail() ? radial_to_json(*f.tail()) : json(nullptr);
  j["loc_exp"] = f.loc_exp();
  j["growth_exp"] = f.growth_exp();
  j["growth_const"] = f.growth_const();
  return j;
}

inline LocallyConstantFunction lcf_from_json(const json& j, long long prime, int n) {
  std::vector<LocallyConstantFunction::Piece> pieces;
  for (const auto& e : j.at("pieces")) {
    PAdicPoint center = point_from_json(e.at("center"), prime);
    if (center.dim() != n) throw std::domain_error("lcf: piece center has wrong dimension");
    pieces.push_back({Ball(center, e.at("radius_exp").get<int>()),
                      jsondetail::complex_from_json(e.at("value"))});
  }
  std::optional<RadialFunction> tail;
  if (j.contains("tail") && !j["tail"].is_null()) tail = radial_from_json(j["tail"], prime, n);
  if (pieces.empty() && !tail) throw std::domain_error("lcf: neither pieces nor tail");
  return LocallyConstantFunction(std::move(pieces), std::move(tail), j.at("loc_exp").get<int>(),
                                 j.value("growth_exp", 0.0), j.value("growth_const", 1.0));
}

// ---- Cauchy problems ------------------------------------------------------

inline CauchyProblem problem_from_json(const json& j) {
  const json& pj = j.at("params");
  KernelParams kp{pj.at("p").get<long long>(), pj.at("n").get<int>(),
                  pj.at("alpha").get<double>(), pj.at("a").get<double>(), SeriesPolicy{}};
  kp.validate();
  double T = pj.at("T").get<double>();
  LocallyConstantFunction phi = lcf_from_json(j.at("phi"), kp.prime, kp.n);

  SourceTerm source = SourceTerm::zero();
  if (j.contains("source") && !j["source"].is_null()) {
    const json& sj = j["source"];
    std::string kind = sj.at("kind").get<std::string>();
    if (kind == "zero") {
      source = SourceTerm::zero();
    } else if (kind == "constant") {
      source = SourceTerm::constant(lcf_from_json(sj.at("spatial"), kp.prime, kp.n));
    } else if (kind == "separable") {
      TimeProfile profile = TimeProfile::one();
      if (sj.contains("time")) {
        const json& tj = sj["time"];
        std::string tkind = tj.at("kind").get<std::string>();
        if (tkind == "one")
          profile = TimeProfile::one();
        else if (tkind == "poly")
          profile = TimeProfile::poly(tj.at("coeffs").get<std::vector<double>>());
        else if (tkind == "exp")
          profile = TimeProfile::exponential(tj.at("scale").get<double>(),
                                             tj.at("rate").get<double>());
        else
          throw std::domain_error("problem: unknown time profile kind '" + tkind + "'");
      }
      source = SourceTerm::separable(lcf_from_json(sj.at("spatial"), kp.prime, kp.n), profile);
    } else {
      throw std::domain_error("problem: unknown source kind '" + kind + "'");
    }
  }
  CauchyProblem prob{kp, std::move(phi), std::move(source), T};
  prob.validate();
  return prob;
}

// ---- polynomials ----------------------------------------------------------

inline json poly_to_json(const HomogeneousPoly& f) {
  json j;
  j["p"] = f.prime();
  j["n"] = f.vars();
  j["d"] = f.degree();
  json ms = json::array();
  for (const auto& m : f.monomials()) ms.push_back(json{{"exps", m.exps}, {"coeff", m.coeff}});
  j["monomials"] = ms;
  return j;
}

inline HomogeneousPoly poly_from_json(const json& j) {
  std::vector<HomogeneousPoly::Monomial> ms;
  for (const auto& e : j.at("monomials"))
    ms.push_back({e.at("exps").get<std::vector<int>>(), e.at("coeff").get<long long>()});
  return HomogeneousPoly(j.at("p").get<long long>(), j.at("n").get<int>(), j.at("d").get<int>(),
                         std::move(ms));
}

}  // namespace padic
