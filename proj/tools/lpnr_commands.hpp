#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "lpnr/lpnr.hpp"

namespace lpnr::cli {

enum ExitCode : int { kPass = 0, kViolation = 1, kInputError = 2, kBudgetFailure = 3 };

// ---------------------------------------------------------------------------
// Tabular output.

using Cell = std::variant<std::monostate, std::string, double, long long, bool>;

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row) {
    if (row.size() != columns.size()) throw std::logic_error("table " + name + ": row width mismatch");
    rows.push_back(std::move(row));
  }
};

/// One or more named tables. A single table prints bare; several print as
/// sections (CSV) or as an object keyed by table name (JSON).
struct Document {
  std::vector<Table> tables;
  Table& table(const std::string& name) {
    for (auto& t : tables) {
      if (t.name == name) return t;
    }
    throw std::logic_error("no table " + name);
  }
};

inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string csv_cell(const Cell& c) {
  struct Visitor {
    std::string operator()(std::monostate) const { return ""; }
    std::string operator()(const std::string& s) const {
      if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
      std::string out = "\"";
      for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
      }
      return out + "\"";
    }
    std::string operator()(double x) const { return format_number(x); }
    std::string operator()(long long x) const { return std::to_string(x); }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
  };
  return std::visit(Visitor{}, c);
}

inline std::string json_cell(const Cell& c) {
  struct Visitor {
    std::string operator()(std::monostate) const { return "null"; }
    std::string operator()(const std::string& s) const { return nlohmann::json(s).dump(); }
    std::string operator()(double x) const { return std::isfinite(x) ? format_number(x) : "null"; }
    std::string operator()(long long x) const { return std::to_string(x); }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
  };
  return std::visit(Visitor{}, c);
}

inline std::string to_csv(const Document& doc) {
  std::ostringstream out;
  const bool sections = doc.tables.size() > 1;
  for (std::size_t k = 0; k < doc.tables.size(); ++k) {
    const auto& t = doc.tables[k];
    if (sections) out << (k ? "\n" : "") << "# " << t.name << "\n";
    for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << csv_cell(t.columns[i]);
    out << "\n";
    for (const auto& row : t.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_cell(row[i]);
      out << "\n";
    }
  }
  return out.str();
}

inline std::string to_json(const Document& doc) {
  std::ostringstream out;
  auto table = [&](const Table& t, const std::string& indent) {
    out << "[";
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      out << (r ? "," : "") << "\n" << indent << "  {";
      for (std::size_t i = 0; i < t.columns.size(); ++i) {
        out << (i ? ", " : "") << nlohmann::json(t.columns[i]).dump() << ": " << json_cell(t.rows[r][i]);
      }
      out << "}";
    }
    out << (t.rows.empty() ? "" : "\n" + indent) << "]";
  };
  if (doc.tables.size() == 1) {
    table(doc.tables.front(), "");
  } else {
    out << "{";
    for (std::size_t k = 0; k < doc.tables.size(); ++k) {
      out << (k ? "," : "") << "\n  " << nlohmann::json(doc.tables[k].name).dump() << ": ";
      table(doc.tables[k], "  ");
    }
    out << "\n}";
  }
  out << "\n";
  return out.str();
}

inline std::string render(const Document& doc, const std::string& format) {
  return format == "json" ? to_json(doc) : to_csv(doc);
}

// ---------------------------------------------------------------------------
// Commands.

struct CommonOptions {
  std::uint64_t seed = 0;
  int restarts = 8;
  double tolerance = 1e-9;
  std::string format = "csv";
  std::string out;
};

struct Outcome {
  int exit_code = kPass;
  Document doc;
  std::vector<std::string> messages;
};

inline double parse_double(const std::string& token, const std::string& what) {
  const char* begin = token.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (token.empty() || end == begin || *end != '\0') throw InvalidArgument(what + ": cannot parse '" + token + "'");
  return v;
}

/// Comma-separated list of exponents. Values are not range-checked here so
/// that commands can report invalid entries row by row.
inline std::vector<double> parse_p_grid(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const auto a = tok.find_first_not_of(" \t");
    const auto b = tok.find_last_not_of(" \t");
    if (a == std::string::npos) throw InvalidArgument("p-grid: empty entry");
    out.push_back(parse_double(tok.substr(a, b - a + 1), "p-grid"));
  }
  if (out.empty()) throw InvalidArgument("p-grid: no values");
  return out;
}

inline Outcome cmd_constants(const std::vector<double>& grid) {
  Outcome o;
  Table t{"constants",
          {"p", "kappa", "kappa_sq", "m_p", "m_p_kappa_over_6", "narrow_bound_real", "tau_star", "lambda_star", "error"},
          {}};
  for (double p : grid) {
    try {
      const Exponent e(p);
      const double k = kappa(e);
      const double m = m_p(e);
      t.add({p, k, k * k, m, m * k / 6.0, narrow_bound_real(e), tau_star(e), 1.0 / e.q(), std::monostate{}});
    } catch (const InvalidArgument& ex) {
      std::vector<Cell> row(t.columns.size(), std::monostate{});
      row.front() = p;
      row.back() = std::string(ex.what());
      t.add(std::move(row));
      o.exit_code = kInputError;
      o.messages.emplace_back("p = " + format_number(p) + ": " + ex.what());
    }
  }
  o.doc.tables.push_back(std::move(t));
  return o;
}

/// T0, shift and rotation with their analytic values, each checked by the
/// multistart estimate and by the dim-2 grid oracle.
inline Outcome cmd_gallery(const std::vector<double>& grid, const CommonOptions& common, int resolution = 10000) {
  Outcome o;
  Table t{"gallery",
          {"p", "operator", "quantity", "estimate", "analytic", "grid", "estimate_error", "grid_error", "within_tolerance",
           "error"},
          {}};
  RadiusOptions ropt;
  ropt.seed = common.seed;
  ropt.restarts = common.restarts;
  NormOptions nopt;
  nopt.seed = common.seed;
  for (double p : grid) {
    std::optional<Exponent> maybe;
    try {
      maybe.emplace(p);
    } catch (const InvalidArgument& ex) {
      std::vector<Cell> row(t.columns.size(), std::monostate{});
      row.front() = p;
      row.back() = std::string(ex.what());
      t.add(std::move(row));
      o.exit_code = kInputError;
      o.messages.emplace_back("p = " + format_number(p) + ": " + ex.what());
      continue;
    }
    const Exponent e = *maybe;
    const double k = kappa(e);
    auto row = [&](const char* op, Quantity qty, double est, double analytic, std::optional<double> grid_val,
                   double tol) {
      const double err = std::abs(est - analytic);
      const double gerr = grid_val ? std::abs(*grid_val - analytic) : 0.0;
      t.add({p, std::string(op), std::string(to_string(qty)), est, analytic,
             grid_val ? Cell{*grid_val} : Cell{std::monostate{}}, err, grid_val ? Cell{gerr} : Cell{std::monostate{}},
             err <= tol && gerr <= 1e-6, std::monostate{}});
    };
    const auto t0 = make_t0(1.0, 1.0, e);
    row("t0", Quantity::abs_v, abs_numerical_radius_lower(*t0, ropt).value, k,
        grid_oracle(*t0, Quantity::abs_v, resolution).value, 1e-6);
    row("t0", Quantity::norm_quotient, op_norm_lower(*t0, nopt).estimate, 1.0, std::nullopt, 1e-9);
    const auto shift = make_shift(e);
    row("shift", Quantity::v, numerical_radius_lower(*shift, ropt).value, k,
        grid_oracle(*shift, Quantity::v, resolution).value, 1e-6);
    const auto rot = make_rotation(e);
    row("rotation", Quantity::v, numerical_radius_lower(*rot, ropt).value, m_p(e),
        grid_oracle(*rot, Quantity::v, resolution).value, 1e-6);
  }
  o.doc.tables.push_back(std::move(t));
  return o;
}

struct CertifyOptions {
  std::optional<int> narrow_n;
  double narrow_epsilon = 1e-6;
};

inline Document report_document(const std::vector<std::pair<std::string, RatioReport>>& reports) {
  Document doc;
  Table ops{"operators",
            {"source", "field", "p", "dim", "kind", "positive", "rank_one", "norm", "v", "abs_v", "v_ratio", "abs_ratio",
             "kappa", "kappa_sq", "m_p", "narrow_bound_real", "certified_violation", "budget_failure"},
            {}};
  Table checks{"checks", {"source", "check", "statement", "achieved", "bound", "passed"}, {}};
  Table notes{"notes", {"source", "note"}, {}};
  for (const auto& [src, r] : reports) {
    ops.add({src, std::string(to_string(r.field)), r.p, static_cast<long long>(r.dim), r.kind, r.positive, r.rank_one,
             r.norm, r.v, r.abs_v, r.v_ratio, r.abs_ratio, r.kappa, r.kappa_sq, r.m_p, r.narrow_bound,
             r.certified_violation, r.budget_failure});
    for (const auto& c : r.checks) checks.add({src, c.name, c.statement, c.achieved, c.bound, c.passed});
    for (const auto& n : r.notes) notes.add({src, n});
  }
  doc.tables.push_back(std::move(ops));
  doc.tables.push_back(std::move(checks));
  doc.tables.push_back(std::move(notes));
  return doc;
}

inline ReportOptions report_options(const CommonOptions& common, const CertifyOptions& copt) {
  ReportOptions ro;
  ro.seed = common.seed;
  ro.restarts = common.restarts;
  ro.tolerance = common.tolerance;
  ro.narrow_n = copt.narrow_n;
  ro.narrow_epsilon = copt.narrow_epsilon;
  return ro;
}

inline Outcome certify_outcome(std::vector<std::pair<std::string, RatioReport>> reports) {
  Outcome o;
  bool violation = false;
  bool budget = false;
  for (const auto& [src, r] : reports) {
    violation = violation || r.certified_violation;
    budget = budget || r.budget_failure;
    if (r.certified_violation) o.messages.emplace_back(src + ": certified violation");
    if (r.budget_failure) o.messages.emplace_back(src + ": oracle or sampling budget exhausted");
  }
  o.exit_code = violation ? kViolation : budget ? kBudgetFailure : kPass;
  o.doc = report_document(reports);
  return o;
}

inline Outcome cmd_certify_file(const std::string& path, const CommonOptions& common, const CertifyOptions& copt = {}) {
  auto t = load_operator_file(path);
  return certify_outcome({{path, ratio_report(t, report_options(common, copt))}});
}

/// One entry of a random-suite config.
struct SuiteSpec {
  std::string name;
  int count = 0;
  std::string kind;
  Field field = Field::real;
  std::vector<double> p;
  int dim_min = 2;
  int dim_max = 6;
  bool random_weights = true;
  int level = 4;
  std::optional<int> narrow_n;
};

inline const char* const kSuiteKinds[] = {"matrix", "nonnegative", "rank_one", "diagonal", "dyadic_kernel"};

inline std::vector<SuiteSpec> parse_suite(const nlohmann::json& j, const std::string& source) {
  using nlohmann::json;
  auto fail = [&](const std::string& ptr, const std::string& msg) { return ParseError(source + " at " + ptr + ": " + msg); };
  if (!j.is_object() || !j.contains("suites") || !j["suites"].is_array()) {
    throw ParseError(source + ": expected an object with a 'suites' array");
  }
  std::vector<SuiteSpec> out;
  for (std::size_t i = 0; i < j["suites"].size(); ++i) {
    const json& s = j["suites"][i];
    const std::string ptr = "/suites/" + std::to_string(i);
    if (!s.is_object()) throw fail(ptr, "expected an object");
    SuiteSpec spec;
    spec.name = s.value("name", "suite" + std::to_string(i));
    if (!s.contains("count") || !s["count"].is_number_integer() || s["count"].get<long long>() < 1 ||
        s["count"].get<long long>() > 100000) {
      throw fail(ptr + "/count", "expected an integer in [1, 100000]");
    }
    spec.count = s["count"].get<int>();
    if (!s.contains("kind") || !s["kind"].is_string()) throw fail(ptr + "/kind", "expected a string");
    spec.kind = s["kind"].get<std::string>();
    if (std::find(std::begin(kSuiteKinds), std::end(kSuiteKinds), spec.kind) == std::end(kSuiteKinds)) {
      throw fail(ptr + "/kind", "unknown kind '" + spec.kind + "'");
    }
    const std::string field = s.value("field", "real");
    if (field != "real" && field != "complex") throw fail(ptr + "/field", "expected 'real' or 'complex'");
    spec.field = field == "real" ? Field::real : Field::complex;
    if (!s.contains("p") || !s["p"].is_array() || s["p"].empty()) throw fail(ptr + "/p", "expected a non-empty array");
    for (std::size_t k = 0; k < s["p"].size(); ++k) {
      const auto& v = s["p"][k];
      if (!v.is_number() || !(v.get<double>() > 1.0) || !std::isfinite(v.get<double>())) {
        throw fail(ptr + "/p/" + std::to_string(k), "expected a number in (1, inf)");
      }
      spec.p.push_back(v.get<double>());
    }
    if (s.contains("dim")) {
      const auto& d = s["dim"];
      if (!d.is_array() || d.size() != 2 || !d[0].is_number_integer() || !d[1].is_number_integer() ||
          d[0].get<int>() < 1 || d[1].get<int>() < d[0].get<int>() || d[1].get<int>() > 4096) {
        throw fail(ptr + "/dim", "expected [min, max] with 1 <= min <= max <= 4096");
      }
      spec.dim_min = d[0].get<int>();
      spec.dim_max = d[1].get<int>();
    }
    const std::string weights = s.value("weights", "random");
    if (weights != "random" && weights != "counting") throw fail(ptr + "/weights", "expected 'random' or 'counting'");
    spec.random_weights = weights == "random";
    if (s.contains("level")) {
      if (!s["level"].is_number_integer() || s["level"].get<int>() < 0 || s["level"].get<int>() > 10) {
        throw fail(ptr + "/level", "expected an integer in [0, 10]");
      }
      spec.level = s["level"].get<int>();
    }
    if (s.contains("narrow_n") && !s["narrow_n"].is_null()) {
      if (!s["narrow_n"].is_number_integer() || s["narrow_n"].get<int>() < 1 || s["narrow_n"].get<int>() > 16) {
        throw fail(ptr + "/narrow_n", "expected an integer in [1, 16]");
      }
      spec.narrow_n = s["narrow_n"].get<int>();
    }
    out.push_back(std::move(spec));
  }
  return out;
}

/// Draws the i-th operator of a suite; every operator has its own RNG stream.
inline OperatorPtr suite_operator(const SuiteSpec& spec, std::size_t i, std::uint64_t seed) {
  Rng rng(seed);
  const Exponent e(spec.p[i % spec.p.size()]);
  if (spec.kind == "dyadic_kernel") {
    auto space = dyadic_space(spec.level);
    return make_kernel(space, e, spec.field, random_values(space->size() * space->size(), rng, spec.field));
  }
  std::uniform_int_distribution<int> dim(spec.dim_min, spec.dim_max);
  const auto n = static_cast<std::size_t>(dim(rng));
  auto space = spec.random_weights ? random_space(n, rng) : counting_space(n);
  if (spec.kind == "matrix") return make_matrix(space, e, spec.field, random_values(n * n, rng, spec.field));
  if (spec.kind == "nonnegative") {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<cplx> a(n * n);
    for (auto& v : a) v = u(rng);
    return make_matrix(space, e, spec.field, std::move(a));
  }
  if (spec.kind == "diagonal") return make_diagonal(space, e, spec.field, random_values(n, rng, spec.field));
  LpVector f(space, e.dual(), spec.field, random_values(n, rng, spec.field));
  LpVector y(space, e, spec.field, random_values(n, rng, spec.field));
  return make_rank_one(f, y);
}

inline Outcome cmd_certify_suite(const std::string& path, const CommonOptions& common, const CertifyOptions& copt = {}) {
  const auto specs = parse_suite(read_json_file(path), path);
  std::vector<std::pair<std::string, RatioReport>> reports;
  for (std::size_t s = 0; s < specs.size(); ++s) {
    const auto& spec = specs[s];
    const std::uint64_t suite_seed = derive_seed(common.seed, s);
    CertifyOptions local = copt;
    if (spec.narrow_n) local.narrow_n = spec.narrow_n;
    for (int i = 0; i < spec.count; ++i) {
      const std::uint64_t op_seed = derive_seed(suite_seed, static_cast<std::uint64_t>(i));
      auto t = suite_operator(spec, static_cast<std::size_t>(i), op_seed);
      CommonOptions c = common;
      c.seed = op_seed;
      reports.emplace_back(spec.name + "#" + std::to_string(i), ratio_report(t, report_options(c, local)));
    }
  }
  return certify_outcome(std::move(reports));
}

struct WitnessArgs {
  std::string kind;
  std::optional<double> tau;
  std::optional<double> lambda;
  std::optional<double> epsilon;
  int narrow_n = 10;
};

inline const char* const kWitnessKinds[] = {"positive", "abs", "rank_one", "hilbert", "narrow"};

inline bool is_real_l2(const LpOperator& t) {
  return t.field() == Field::real && std::abs(t.exponent().p() - 2.0) < 1e-15;
}

inline WitnessCertificate build_witness(const OperatorPtr& tp, const WitnessArgs& args, std::uint64_t seed) {
  const LpOperator& t = *tp;
  const auto& k = args.kind;
  if (k == "positive") {
    if (t.field() != Field::real || !is_positive(t)) {
      throw UnsupportedOperation("witness kind 'positive' needs a real operator with nonnegative entries");
    }
    return positive_witness(t, std::nullopt, args.tau, seed);
  }
  if (k == "abs") return abs_radius_witness(t, args.tau, args.epsilon.value_or(0.0), std::nullopt, seed);
  if (k == "rank_one") {
    if (!t.is_rank_one()) throw UnsupportedOperation("witness kind 'rank_one' needs a rank_one operator");
    auto cert = rank_one_witness(t, args.lambda, args.tau);
    if (is_real_l2(t)) {
      auto hilbert = hilbert_witness(t);
      if (hilbert.achieved > cert.achieved) {
        hilbert.notes.emplace_back("orthogonal-sum construction beats the partition construction on real l_2");
        return hilbert;
      }
    }
    return cert;
  }
  if (k == "hilbert") {
    if (!t.is_rank_one() || !is_real_l2(t)) {
      throw UnsupportedOperation("witness kind 'hilbert' needs a real rank_one operator with p = 2");
    }
    return hilbert_witness(t);
  }
  if (k == "narrow") {
    if (!is_dyadic_unit_space(*t.space())) {
      throw UnsupportedOperation("witness kind 'narrow' needs weights 2^-L on 2^L atoms");
    }
    if (args.narrow_n < 1 || args.narrow_n > 16) throw InvalidArgument("narrow-n must lie in [1, 16]");
    const Exponent e = t.exponent();
    const double lambda = args.lambda.value_or(1.0 / e.q());
    if (!(lambda > 0.0 && lambda < 1.0)) throw InvalidArgument("lambda must lie in (0, 1)");
    const long long j = nearest_dyadic(lambda, args.narrow_n);
    double tau = t.field() == Field::complex ? tau_star(e) : narrow_bound_real_search(e).argmax;
    if (!(tau > 0.0)) tau = tau_star(e);
    NarrowWitnessOptions wopt;
    wopt.epsilon = args.epsilon.value_or(1e-6);
    wopt.norm.seed = seed;
    RademacherOracle oracle;
    return narrow_radius_witness(tp, j, args.narrow_n, args.tau.value_or(tau), oracle, wopt);
  }
  throw InvalidArgument("unknown witness kind '" + k + "'");
}

inline Document witness_document(const std::string& kind, const WitnessCertificate& cert, double tol) {
  Document doc;
  const auto opt_cell = [](const std::optional<double>& v) { return v ? Cell{*v} : Cell{std::monostate{}}; };
  Table summary{"summary",
                {"kind", "quantity", "achieved", "bound", "norm_scale", "tau", "lambda", "epsilon", "exhaustive",
                 "identities_hold", "valid"},
                {}};
  summary.add({kind, std::string(to_string(cert.quantity)), cert.achieved, cert.bound, cert.norm_scale,
               opt_cell(cert.params.tau), opt_cell(cert.params.lambda), opt_cell(cert.params.epsilon), cert.exhaustive,
               cert.identities_hold(), cert.valid(tol)});
  Table vectors{"vectors", {"vector", "index", "weight", "re", "im"}, {}};
  for (std::size_t v = 0; v < cert.vectors.size(); ++v) {
    const auto& x = cert.vectors[v];
    const auto w = x.space()->weights();
    for (std::size_t i = 0; i < x.size(); ++i) {
      vectors.add({static_cast<long long>(v), static_cast<long long>(i), w[i], x[i].real(), x[i].imag()});
    }
  }
  Table ids{"identities", {"description", "kind", "lhs", "rhs", "tolerance", "holds"}, {}};
  for (const auto& c : cert.identities) {
    const char* rel = c.kind == CertifiedIdentity::Kind::equality ? "equality"
                      : c.kind == CertifiedIdentity::Kind::at_most ? "at_most"
                                                                   : "at_least";
    ids.add({c.description, std::string(rel), c.lhs, c.rhs, c.tolerance, c.holds()});
  }
  Table notes{"notes", {"note"}, {}};
  for (const auto& n : cert.notes) notes.add({n});
  doc.tables.push_back(std::move(summary));
  doc.tables.push_back(std::move(vectors));
  doc.tables.push_back(std::move(ids));
  doc.tables.push_back(std::move(notes));
  return doc;
}

inline Outcome cmd_witness(const std::string& path, const WitnessArgs& args, const CommonOptions& common) {
  auto t = load_operator_file(path);
  const auto cert = build_witness(t, args, common.seed);
  Outcome o;
  o.doc = witness_document(args.kind, cert, common.tolerance);
  if (!cert.valid(common.tolerance)) {
    o.exit_code = kViolation;
    o.messages.emplace_back("witness falls short of its certified bound");
  }
  return o;
}

// ---------------------------------------------------------------------------
// Argument parsing and dispatch.

inline int exit_code_for(const std::exception& ex) {
  if (dynamic_cast<const ResourceError*>(&ex) || dynamic_cast<const OracleFailure*>(&ex)) return kBudgetFailure;
  return kInputError;
}

/// Runs the command line; output goes to `out` (or --out), diagnostics to `err`.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerical radius estimates and witness certificates on weighted l_p spaces", "lpnr"};
  app.require_subcommand(1);
  CommonOptions common;
  app.add_option("--seed", common.seed, "Master seed (default 0)");
  app.add_option("--restarts", common.restarts, "Restarts for radius ascent")->check(CLI::Range(1, 100000));
  app.add_option("--format", common.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--out", common.out, "Write output to this path instead of stdout");
  app.add_option("--tolerance", common.tolerance, "Slack allowed below certified bounds")
      ->check(CLI::NonNegativeNumber);

  std::string grid_text;
  auto* constants = app.add_subcommand("constants", "Table of reference constants over a p grid");
  constants->add_option("--p-grid", grid_text, "Comma-separated exponents")->required();
  constants->fallthrough();

  int resolution = 10000;
  auto* gallery = app.add_subcommand("gallery", "Extremal operators against their analytic values");
  gallery->add_option("--p-grid", grid_text, "Comma-separated exponents")->required();
  gallery->add_option("--grid-resolution", resolution, "Grid oracle resolution")->check(CLI::Range(10, 1000000));
  gallery->fallthrough();

  std::string file;
  std::string suite;
  CertifyOptions copt;
  auto* certify = app.add_subcommand("certify", "Estimates and witness-certified bounds for operators");
  auto* file_opt = certify->add_option("--file", file, "Operator JSON file");
  auto* suite_opt = certify->add_option("--suite", suite, "Random-suite JSON config");
  file_opt->excludes(suite_opt);
  certify->add_option("--narrow-n", copt.narrow_n, "Also run the narrow construction at lambda = j/2^n")
      ->check(CLI::Range(1, 16));
  certify->add_option("--epsilon", copt.narrow_epsilon, "Narrow oracle tolerance")->check(CLI::PositiveNumber);
  certify->fallthrough();

  WitnessArgs wargs;
  auto* witness = app.add_subcommand("witness", "Build one witness certificate");
  witness->add_option("--file", file, "Operator JSON file")->required();
  witness->add_option("--kind", wargs.kind, "Witness construction")
      ->required()
      ->check(CLI::IsMember(std::vector<std::string>(std::begin(kWitnessKinds), std::end(kWitnessKinds))));
  witness->add_option("--tau", wargs.tau, "Mixing weight")->check(CLI::PositiveNumber);
  witness->add_option("--lambda", wargs.lambda, "Partition share in (0, 1)");
  witness->add_option("--epsilon", wargs.epsilon, "Selection or oracle tolerance")->check(CLI::NonNegativeNumber);
  witness->add_option("--narrow-n", wargs.narrow_n, "Dyadic resolution of lambda for the narrow kind");
  witness->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kPass : kInputError;
  }

  Outcome o;
  try {
    if (constants->parsed()) {
      o = cmd_constants(parse_p_grid(grid_text));
    } else if (gallery->parsed()) {
      o = cmd_gallery(parse_p_grid(grid_text), common, resolution);
    } else if (certify->parsed()) {
      if (file.empty() == suite.empty()) throw InvalidArgument("certify: give exactly one of --file or --suite");
      o = file.empty() ? cmd_certify_suite(suite, common, copt) : cmd_certify_file(file, common, copt);
    } else {
      o = cmd_witness(file, wargs, common);
    }
  } catch (const Error& ex) {
    err << "error: " << ex.what() << "\n";
    return exit_code_for(ex);
  }

  const std::string text = render(o.doc, common.format);
  if (common.out.empty()) {
    out << text;
  } else {
    std::ofstream f(common.out, std::ios::binary);
    if (!f || !(f << text)) {
      err << "error: cannot write " << common.out << "\n";
      return kInputError;
    }
  }
  for (const auto& m : o.messages) err << m << "\n";
  return o.exit_code;
}

}  // namespace lpnr::cli
