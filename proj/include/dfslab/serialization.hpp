#ifndef DFSLAB_SERIALIZATION_HPP
#define DFSLAB_SERIALIZATION_HPP

#include <optional>
#include <string>

#include <json.hpp>

#include "dfslab/dfs.hpp"
#include "dfslab/fidelity.hpp"
#include "dfslab/fixed_basis_osr.hpp"
#include "dfslab/lindblad.hpp"
#include "dfslab/system_bath.hpp"
#include "dfslab/table1.hpp"

namespace dfslab {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// Matrices are arrays of rows, entries [re, im].
Json to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j);
Json to_json(cplx z);

Json to_json(const SystemBathModel& m);
Json to_json(const LindbladModel& m);

SystemBathModel system_bath_model_from_json(const Json& j);
LindbladModel lindblad_model_from_json(const Json& j);

/// Any model document: "system_bath", "lindblad" or a named builtin.
struct LoadedModel {
  std::string name;
  std::optional<SystemBathModel> system_bath;
  std::optional<LindbladModel> lindblad;
  std::optional<JointPropagator> propagator;
};

/// Throws kConfig for unknown kinds, unknown builtins and malformed input.
LoadedModel load_model(const Json& j);
LoadedModel load_model_file(const std::string& path);

Json to_json(const KrausSet& k);
Json to_json(const ChiProcess& c);
Json to_json(const DfSubspace& s);
Json to_json(const DfsSearchResult& r);
Json to_json(const DfCertificate& c);
Json to_json(const RateReport& r);
Json to_json(const ScalingFit& f);
Json to_json(const Table1Report& r);

/// Columns: axis value, fidelity, deficit.
std::string to_csv(const ScalingFit& f);
std::string to_csv(const Table1Report& r);

/// Adds `schema_version` and `kind` at the top level.
Json envelope(const std::string& kind, Json body);

}  // namespace dfslab

#endif  // DFSLAB_SERIALIZATION_HPP
