#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "lpnr/errors.hpp"
#include "lpnr/operators.hpp"

namespace lpnr {

/// Malformed operator or suite input; the message names the source and location.
class ParseError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

namespace detail {

inline std::string at(const std::string& source, const std::string& pointer) {
  return source + (pointer.empty() ? std::string(": ") : " at " + pointer + ": ");
}

inline cplx parse_scalar(const nlohmann::json& v, const std::string& source, const std::string& ptr) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    return {v[0].get<double>(), v[1].get<double>()};
  }
  throw ParseError(at(source, ptr) + "expected a number or an [re, im] pair");
}

inline std::vector<cplx> parse_values(const nlohmann::json& v, const std::string& source, const std::string& ptr) {
  if (!v.is_array()) throw ParseError(at(source, ptr) + "expected an array");
  std::vector<cplx> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(parse_scalar(v[i], source, ptr + "/" + std::to_string(i)));
  return out;
}

inline const nlohmann::json& member(const nlohmann::json& obj, const char* key, const std::string& source,
                                    const std::string& ptr) {
  if (!obj.is_object()) throw ParseError(at(source, ptr) + "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(at(source, ptr) + "missing field '" + key + "'");
  return *it;
}

}  // namespace detail

/// Builds an operator from the JSON operator format. Matrix data is stored in
/// kernel form.
inline OperatorPtr operator_from_json(const nlohmann::json& j, const std::string& source = "<json>") {
  using detail::at;
  const auto& fj = detail::member(j, "field", source, "");
  if (!fj.is_string() || (fj != "real" && fj != "complex")) {
    throw ParseError(at(source, "/field") + "expected \"real\" or \"complex\"");
  }
  const Field field = fj == "real" ? Field::real : Field::complex;

  const auto& pj = detail::member(j, "p", source, "");
  if (!pj.is_number()) throw ParseError(at(source, "/p") + "expected a number");
  const double p = pj.get<double>();
  if (!(p > 1.0) || !std::isfinite(p)) throw ParseError(at(source, "/p") + "p must satisfy 1 < p < inf");
  const Exponent e(p);

  const auto& wj = detail::member(j, "weights", source, "");
  if (!wj.is_array() || wj.empty()) throw ParseError(at(source, "/weights") + "expected a non-empty array");
  std::vector<double> w;
  for (std::size_t i = 0; i < wj.size(); ++i) {
    if (!wj[i].is_number() || !(wj[i].get<double>() > 0.0)) {
      throw ParseError(at(source, "/weights/" + std::to_string(i)) + "weights must be positive numbers");
    }
    w.push_back(wj[i].get<double>());
  }
  const std::size_t n = w.size();
  SpacePtr space;
  try {
    space = make_space(w);
  } catch (const Error& ex) {
    throw ParseError(at(source, "/weights") + ex.what());
  }

  const auto& kj = detail::member(j, "kind", source, "");
  if (!kj.is_string()) throw ParseError(at(source, "/kind") + "expected a string");
  const std::string kind = kj.get<std::string>();
  const auto& data = detail::member(j, "data", source, "");

  auto check_real = [&](const std::vector<cplx>& v, const std::string& ptr) {
    if (field != Field::real) return;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i].imag() != 0.0) throw ParseError(at(source, ptr + "/" + std::to_string(i)) + "complex entry in a real operator");
    }
  };
  auto expect_len = [&](const std::vector<cplx>& v, std::size_t len, const std::string& ptr) {
    if (v.size() != len) {
      throw ParseError(at(source, ptr) + "expected " + std::to_string(len) + " entries, found " + std::to_string(v.size()));
    }
  };

  try {
    if (kind == "matrix" || kind == "kernel") {
      auto a = detail::parse_values(data, source, "/data");
      expect_len(a, n * n, "/data");
      check_real(a, "/data");
      if (kind == "matrix") a = matrix_to_kernel(a, space->weights());
      return make_kernel(space, e, field, std::move(a));
    }
    if (kind == "rank_one") {
      auto f = detail::parse_values(detail::member(data, "f", source, "/data"), source, "/data/f");
      auto y = detail::parse_values(detail::member(data, "y", source, "/data"), source, "/data/y");
      expect_len(f, n, "/data/f");
      expect_len(y, n, "/data/y");
      check_real(f, "/data/f");
      check_real(y, "/data/y");
      return make_operator(space, e, field, RankOneForm{std::move(f), std::move(y)});
    }
    if (kind == "diagonal") {
      auto d = detail::parse_values(detail::member(data, "d", source, "/data"), source, "/data/d");
      expect_len(d, n, "/data/d");
      check_real(d, "/data/d");
      return make_diagonal(space, e, field, std::move(d));
    }
  } catch (const ParseError&) {
    throw;
  } catch (const Error& ex) {
    throw ParseError(at(source, "/data") + ex.what());
  }
  throw ParseError(at(source, "/kind") + "unknown kind '" + kind + "'");
}

inline nlohmann::json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& ex) {
    throw ParseError(source + " at byte " + std::to_string(ex.byte) + ": malformed JSON");
  }
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_json_text(ss.str(), path);
}

inline OperatorPtr load_operator_file(const std::string& path) { return operator_from_json(read_json_file(path), path); }

namespace detail {

inline nlohmann::json values_json(std::span<const cplx> v, Field field) {
  auto out = nlohmann::json::array();
  for (const cplx& c : v) {
    if (field == Field::real) {
      out.push_back(c.real());
    } else {
      out.push_back({c.real(), c.imag()});
    }
  }
  return out;
}

}  // namespace detail

/// Serializes in the operator file format. Forms without a file representation are densified.
inline nlohmann::json operator_to_json(const LpOperator& t) {
  nlohmann::json j;
  j["field"] = std::string(to_string(t.field()));
  j["p"] = t.exponent().p();
  j["weights"] = std::vector<double>(t.space()->weights().begin(), t.space()->weights().end());
  if (const auto* ro = std::get_if<RankOneForm>(&t.form())) {
    j["kind"] = "rank_one";
    j["data"] = {{"f", detail::values_json(ro->f, t.field())}, {"y", detail::values_json(ro->y, t.field())}};
  } else if (const auto* d = std::get_if<DiagonalForm>(&t.form())) {
    j["kind"] = "diagonal";
    j["data"] = {{"d", detail::values_json(d->d, t.field())}};
  } else if (const auto* m = std::get_if<MatrixForm>(&t.form())) {
    j["kind"] = "matrix";
    j["data"] = detail::values_json(m->a, t.field());
  } else {
    j["kind"] = "kernel";
    j["data"] = detail::values_json(to_kernel(t), t.field());
  }
  return j;
}

inline nlohmann::json vector_json(const LpVector& x) { return detail::values_json(x.values(), x.field()); }

}  // namespace lpnr
