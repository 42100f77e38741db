#pragma once

#include <filesystem>
#include <cstdint>
#include <optional>
#include <nlohmann/json.hpp>
#include <set>
#include <string>
#include <string_view>

#include "sublap/cc_distance.hpp"
#include "sublap/lie_algebra.hpp"
#include "sublap/polynomial.hpp"
#include "sublap/regularity.hpp"
#include "sublap/roots.hpp"
#include "sublap/solver.hpp"

namespace sublap {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// Shortest round-trip decimal form.
std::string format_double(double value);

/// Writes to a sibling temporary file and renames it over the target.
void write_atomic(const std::filesystem::path& path, std::string_view contents);
/// Pretty-printed JSON with a trailing newline.
std::string dump(const Json& j);
Json read_json_file(const std::filesystem::path& path);

/// Strict reader for a JSON object: every key must be consumed before finish().
class ObjectReader {
 public:
  ObjectReader(const Json& object, std::string context);

  bool has(const std::string& key) const;
  const Json& required(const std::string& key);
  const Json* optional(const std::string& key);
  double number(const std::string& key, std::optional<double> fallback = std::nullopt);
  long long integer(const std::string& key, std::optional<long long> fallback = std::nullopt);
  std::uint64_t unsigned_integer(const std::string& key, std::optional<std::uint64_t> fallback = std::nullopt);
  bool boolean(const std::string& key, std::optional<bool> fallback = std::nullopt);
  std::string string(const std::string& key, std::optional<std::string> fallback = std::nullopt);
  /// Throws ValidationError naming any key that was never read.
  void finish() const;
  const std::string& context() const { return context_; }

 private:
  const Json& object_;
  std::string context_;
  std::set<std::string> seen_;
};

/// Requires schema_version == kSchemaVersion.
void check_schema_version(ObjectReader& reader);

Json to_json(const CMatrix& m);
CMatrix matrix_from_json(const Json& j, int n, const std::string& context = "matrix");
GroupElement group_from_json(const Json& j, int n, const std::string& context = "group element");

/// {"n", "degree_cap", "terms": [{"exponents", "coefficient"}]}.
Json to_json(const PolyField& u);
PolyField polyfield_from_json(const Json& j, const std::string& context = "field");

Json algebra_to_json(const LieAlgebra& algebra, const Frame& frame);
Json roots_to_json(const RootDatum& datum, const Frame& frame);

Json to_json(const FluxSpec& flux);
Json to_json(const SolveConfig& cfg);
/// Strict parse; seeds default to values derived from root_seed.
SolveConfig solve_config_from_json(const Json& j, std::uint64_t root_seed, const std::string& context = "solve");
Json to_json(const SolutionReport& report);
/// Columns iter, energy, grad_norm.
std::string energy_trace_csv(const SolutionReport& report);

Json to_json(const DistanceBudget& budget);
DistanceBudget budget_from_json(const Json& j, const std::string& context = "budget");
Json to_json(const DistanceResult& result);

Json to_json(const RatioReport& report);

}  // namespace sublap
