#include "sublap/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>
#include <unistd.h>

#include "sublap/error.hpp"
#include "sublap/rng.hpp"

namespace sublap {

namespace fs = std::filesystem;

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

void write_atomic(const fs::path& path, std::string_view contents) {
  const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  fs::create_directories(dir);
  const fs::path tmp = dir / ("." + path.filename().string() + ".tmp." + std::to_string(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw Error("failed writing " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json read_json_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return Json::parse(ss.str());
  } catch (const Json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

ObjectReader::ObjectReader(const Json& object, std::string context) : object_(object), context_(std::move(context)) {
  if (!object_.is_object()) throw ValidationError(context_ + ": expected a JSON object");
}

bool ObjectReader::has(const std::string& key) const { return object_.contains(key); }

const Json& ObjectReader::required(const std::string& key) {
  if (!object_.contains(key)) throw ValidationError(context_ + ": missing key '" + key + "'");
  seen_.insert(key);
  return object_.at(key);
}

const Json* ObjectReader::optional(const std::string& key) {
  if (!object_.contains(key)) return nullptr;
  seen_.insert(key);
  return &object_.at(key);
}

double ObjectReader::number(const std::string& key, std::optional<double> fallback) {
  const Json* v = fallback ? optional(key) : &required(key);
  if (!v) return *fallback;
  if (!v->is_number()) throw ValidationError(context_ + "." + key + ": expected a number");
  const double d = v->get<double>();
  if (!std::isfinite(d)) throw ValidationError(context_ + "." + key + ": must be finite");
  return d;
}

long long ObjectReader::integer(const std::string& key, std::optional<long long> fallback) {
  const Json* v = fallback ? optional(key) : &required(key);
  if (!v) return *fallback;
  if (!v->is_number_integer()) throw ValidationError(context_ + "." + key + ": expected an integer");
  return v->get<long long>();
}

std::uint64_t ObjectReader::unsigned_integer(const std::string& key, std::optional<std::uint64_t> fallback) {
  const Json* v = fallback ? optional(key) : &required(key);
  if (!v) return *fallback;
  if (!v->is_number_unsigned()) throw ValidationError(context_ + "." + key + ": expected a non-negative integer");
  return v->get<std::uint64_t>();
}

bool ObjectReader::boolean(const std::string& key, std::optional<bool> fallback) {
  const Json* v = fallback ? optional(key) : &required(key);
  if (!v) return *fallback;
  if (!v->is_boolean()) throw ValidationError(context_ + "." + key + ": expected a boolean");
  return v->get<bool>();
}

std::string ObjectReader::string(const std::string& key, std::optional<std::string> fallback) {
  const Json* v = fallback ? optional(key) : &required(key);
  if (!v) return *fallback;
  if (!v->is_string()) throw ValidationError(context_ + "." + key + ": expected a string");
  return v->get<std::string>();
}

void ObjectReader::finish() const {
  for (const auto& [key, value] : object_.items()) {
    (void)value;
    if (!seen_.count(key)) throw ValidationError(context_ + ": unknown key '" + key + "'");
  }
}

void check_schema_version(ObjectReader& reader) {
  const long long v = reader.integer("schema_version");
  if (v != kSchemaVersion)
    throw ValidationError(reader.context() + ": unsupported schema_version " + std::to_string(v) + " (expected " +
                          std::to_string(kSchemaVersion) + ")");
}

Json to_json(const CMatrix& m) {
  Json rows = Json::array();
  for (int r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(Json::array({m(r, c).real(), m(r, c).imag()}));
    rows.push_back(std::move(row));
  }
  return rows;
}

CMatrix matrix_from_json(const Json& j, int n, const std::string& context) {
  if (j.is_string() && j.get<std::string>() == "identity") return CMatrix::Identity(n, n);
  if (!j.is_array() || static_cast<int>(j.size()) != n)
    throw ValidationError(context + ": expected " + std::to_string(n) + " rows or \"identity\"");
  CMatrix m(n, n);
  for (int r = 0; r < n; ++r) {
    const Json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<int>(row.size()) != n)
      throw ValidationError(context + ": row " + std::to_string(r) + " must have " + std::to_string(n) + " entries");
    for (int c = 0; c < n; ++c) {
      const Json& e = row[static_cast<std::size_t>(c)];
      if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
        throw ValidationError(context + ": entries must be [re, im] pairs");
      m(r, c) = Complex(e[0].get<double>(), e[1].get<double>());
    }
  }
  return m;
}

GroupElement group_from_json(const Json& j, int n, const std::string& context) {
  const CMatrix m = matrix_from_json(j, n, context);
  if (!is_group_element(m, 1e-8)) throw ValidationError(context + ": not an element of SU(" + std::to_string(n) + ")");
  return project_to_group(m);
}

Json to_json(const PolyField& u) {
  Json terms = Json::array();
  for (const auto& [mono, c] : u.terms()) terms.push_back({{"exponents", mono.exponents}, {"coefficient", c}});
  return {{"n", u.n()}, {"degree_cap", u.degree_cap()}, {"terms", std::move(terms)}};
}

PolyField polyfield_from_json(const Json& j, const std::string& context) {
  ObjectReader r(j, context);
  const long long n = r.integer("n");
  const long long cap = r.integer("degree_cap");
  if (n < 2 || n > 8) throw ValidationError(context + ".n must lie in 2..8");
  if (cap < 0 || cap > 6) throw ValidationError(context + ".degree_cap must lie in 0..6");
  const Json& terms = r.required("terms");
  r.finish();
  if (!terms.is_array()) throw ValidationError(context + ".terms must be an array");
  std::vector<std::pair<Monomial, double>> parsed;
  const auto vars = static_cast<std::size_t>(2 * n * n);
  for (std::size_t t = 0; t < terms.size(); ++t) {
    const std::string tc = context + ".terms[" + std::to_string(t) + "]";
    ObjectReader tr(terms[t], tc);
    const Json& e = tr.required("exponents");
    const double c = tr.number("coefficient");
    tr.finish();
    if (!e.is_array() || e.size() != vars)
      throw ValidationError(tc + ".exponents must have " + std::to_string(vars) + " entries");
    Monomial m;
    for (const auto& x : e) {
      if (!x.is_number_integer() || x.get<int>() < 0) throw ValidationError(tc + ".exponents must be non-negative integers");
      m.exponents.push_back(x.get<int>());
    }
    parsed.emplace_back(std::move(m), c);
  }
  try {
    return PolyField::from_terms(static_cast<int>(n), static_cast<int>(cap), parsed);
  } catch (const InputError& e) {
    throw ValidationError(context + ": " + e.what());
  } catch (const DegreeCapError& e) {
    throw ValidationError(context + ": " + e.what());
  }
}

namespace {

Json constants_to_json(const StructureConstants& c) {
  Json out = Json::array();
  for (const auto& e : c.nonzero(1e-12)) out.push_back(Json::array({e.i, e.j, e.k, e.value}));
  return out;
}

Json elements_to_json(const std::vector<AlgebraElement>& xs) {
  Json out = Json::array();
  for (const auto& x : xs) out.push_back(to_json(x.matrix()));
  return out;
}

}  // namespace

Json algebra_to_json(const LieAlgebra& algebra, const Frame& frame) {
  const StructureConstants basis_c = structure_constants(algebra);
  std::vector<AlgebraElement> fields = frame.horizontal();
  fields.insert(fields.end(), frame.roots().begin(), frame.roots().end());
  const StructureConstants frame_c = structure_constants(fields, algebra.metric_scale());
  Json labels = Json::array();
  for (int i = 0; i < frame.horizontal_count(); ++i) labels.push_back("X" + std::to_string(i + 1));
  for (int j = 0; j < frame.vertical_count(); ++j) labels.push_back("R" + std::to_string(j + 1));
  Json gram = Json::array();
  for (int a = 0; a < algebra.dimension(); ++a) {
    Json row = Json::array();
    for (int b = 0; b < algebra.dimension(); ++b) row.push_back(algebra.inner(algebra[a], algebra[b]));
    gram.push_back(std::move(row));
  }
  return {{"schema_version", kSchemaVersion},
          {"n", algebra.n()},
          {"dimension", algebra.dimension()},
          {"metric_scale", algebra.metric_scale()},
          {"labels", algebra.labels()},
          {"basis", elements_to_json(algebra.basis())},
          {"gram", std::move(gram)},
          {"structure_constants", constants_to_json(basis_c)},
          {"structure_residual", basis_c.max_residual()},
          {"frame_labels", std::move(labels)},
          {"frame", elements_to_json(fields)},
          {"frame_structure_constants", constants_to_json(frame_c)},
          {"frame_structure_residual", frame_c.max_residual()}};
}

Json roots_to_json(const RootDatum& datum, const Frame& frame) {
  Json roots = Json::array();
  for (const auto& r : datum.positive_roots())
    roots.push_back({{"coordinates", std::vector<double>(r.coordinates.data(), r.coordinates.data() + r.coordinates.size())},
                     {"vector", to_json(r.vector.matrix())},
                     {"norm_squared", trace_inner(r.vector, r.vector, frame.metric_scale())}});
  Json pairs = Json::array();
  for (const auto& p : datum.pairs())
    pairs.push_back({{"odd", to_json(p.odd.matrix())}, {"even", to_json(p.even.matrix())}, {"root", p.root_index}});
  Json cartan = Json::array();
  for (const auto& c : datum.cartan_basis()) cartan.push_back(to_json(c.matrix()));
  const RootProperties props = datum.properties();
  return {{"schema_version", kSchemaVersion},
          {"n", frame.n()},
          {"rank", datum.rank()},
          {"cartan_basis", std::move(cartan)},
          {"positive_roots", std::move(roots)},
          {"pairs", std::move(pairs)},
          {"root_basis_indices", datum.root_basis_indices()},
          {"properties",
           {{"orthonormality", props.orthonormality},
            {"pair_brackets", props.pair_brackets},
            {"horizontal_brackets", props.horizontal_brackets},
            {"cartan_action", props.cartan_action}}},
          {"horizontal_count", frame.horizontal_count()},
          {"vertical_count", frame.vertical_count()},
          {"homogeneous_dimension", frame.homogeneous_dimension()},
          {"hormander_rank", hormander_rank(frame)}};
}

Json to_json(const FluxSpec& flux) { return {{"p", flux.p}, {"delta", flux.delta}, {"l", flux.lower()}}; }

Json to_json(const SolveConfig& cfg) {
  return {{"schema_version", kSchemaVersion},
          {"p", cfg.flux.p},
          {"delta", cfg.flux.delta},
          {"epsilon", cfg.epsilon},
          {"group_n", cfg.group_n},
          {"degree_cap", cfg.degree_cap},
          {"quadrature", {{"points", cfg.quadrature_points}, {"seed", cfg.quadrature_seed}}},
          {"source", to_json(cfg.source)},
          {"pin", cfg.pin},
          {"tol_grad", cfg.gradient_tolerance()},
          {"max_iter", cfg.max_iter}};
}

SolveConfig solve_config_from_json(const Json& j, std::uint64_t root_seed, const std::string& context) {
  ObjectReader r(j, context);
  if (r.has("schema_version")) check_schema_version(r);
  SolveConfig cfg;
  cfg.flux.p = r.number("p", 2.0);
  cfg.flux.delta = r.number("delta", 1.0);
  cfg.epsilon = r.number("epsilon", 1.0);
  cfg.group_n = static_cast<int>(r.integer("group_n", 3));
  cfg.degree_cap = static_cast<int>(r.integer("degree_cap", 2));
  cfg.quadrature_seed = derive_seed(root_seed, "quadrature", 0);
  if (const Json* q = r.optional("quadrature")) {
    ObjectReader qr(*q, context + ".quadrature");
    const long long pts = qr.integer("points", 20000);
    if (pts <= 0) throw ValidationError(context + ".quadrature.points must be positive");
    cfg.quadrature_points = static_cast<std::size_t>(pts);
    cfg.quadrature_seed = qr.unsigned_integer("seed", cfg.quadrature_seed);
    qr.finish();
  }
  if (const Json* s = r.optional("source")) {
    cfg.source = polyfield_from_json(*s, context + ".source");
  } else {
    cfg.source = PolyField(cfg.group_n, cfg.degree_cap);
  }
  cfg.pin = r.boolean("pin", true);
  cfg.tol_grad = r.number("tol_grad", 0.0);
  const long long max_iter = r.integer("max_iter", 5000);
  if (max_iter < 0 || max_iter > 1000000) throw ValidationError(context + ".max_iter out of range");
  cfg.max_iter = static_cast<int>(max_iter);
  r.finish();
  try {
    cfg.validate();
  } catch (const NumericalError& e) {
    throw ValidationError(context + ": " + e.what());
  }
  return cfg;
}

Json to_json(const SolutionReport& report) {
  return {{"schema_version", kSchemaVersion},
          {"status", to_string(report.status)},
          {"iterations", report.iterations},
          {"epsilon", report.epsilon},
          {"final_energy", report.energy_trace.empty() ? 0.0 : report.energy_trace.back()},
          {"final_gradient_norm", report.final_gradient_norm},
          {"weak_residual", report.weak_residual},
          {"omega_stats", {{"min", report.omega_stats.min}, {"max", report.omega_stats.max}, {"mean", report.omega_stats.mean}}},
          {"coefficients", to_json(report.coefficients)}};
}

std::string energy_trace_csv(const SolutionReport& report) {
  std::string out = "iter,energy,grad_norm\n";
  for (std::size_t i = 0; i < report.energy_trace.size(); ++i) {
    out += std::to_string(i) + "," + format_double(report.energy_trace[i]) + "," +
           format_double(i < report.gradient_trace.size() ? report.gradient_trace[i] : 0.0) + "\n";
  }
  return out;
}

Json to_json(const DistanceBudget& b) {
  return {{"steps", b.steps}, {"restarts", b.restarts}, {"max_iterations", b.max_iterations}, {"tol_end", b.tol_end}};
}

DistanceBudget budget_from_json(const Json& j, const std::string& context) {
  ObjectReader r(j, context);
  DistanceBudget b;
  b.steps = static_cast<int>(r.integer("steps", b.steps));
  b.restarts = static_cast<int>(r.integer("restarts", b.restarts));
  b.max_iterations = static_cast<int>(r.integer("max_iterations", b.max_iterations));
  b.tol_end = r.number("tol_end", b.tol_end);
  r.finish();
  if (b.steps > 4096 || b.restarts > 64) throw ValidationError(context + ": budget too large");
  b.validate();
  return b;
}

Json to_json(const DistanceResult& result) {
  return {{"T", result.T},
          {"K", result.path.steps()},
          {"endpoint_error", result.endpoint_error},
          {"feasible", result.feasible},
          {"iterations", result.iterations}};
}

Json to_json(const RatioReport& report) {
  auto num = [](double v) -> Json { return std::isfinite(v) ? Json(v) : Json(format_double(v)); };
  Json rhs = Json::array();
  for (double t : report.rhs_terms) rhs.push_back(num(t));
  Json trace = Json::array();
  for (double t : report.refinement_trace) trace.push_back(num(t));
  return {{"lhs", num(report.lhs)},
          {"rhs_terms", std::move(rhs)},
          {"rhs_sum", num(report.rhs_sum())},
          {"ratio", num(report.ratio)},
          {"refinement_trace", std::move(trace)},
          {"samples", report.samples}};
}

}  // namespace sublap
