#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "schemagate/dataframe.hpp"
#include "schemagate/definitions.hpp"
#include "schemagate/document.hpp"
#include "schemagate/semver.hpp"

namespace schemagate {

class DatasetStore;

using FramePtr = std::shared_ptr<const DataFrame>;
/// Runtime value flowing between steps: a JSON literal or a table.
using Value = std::variant<Json, FramePtr>;
using ValueMap = std::map<std::string, Value>;

/// Columns of a frame as a dataframe type; the literal types otherwise are
/// checked with value_conforms.
bool value_matches(const Value& value, const SemanticType& type);

/// Linear surrogate y = [1 x] * coef, fitted by least squares.
struct SurrogateModel {
  std::string model_id;
  std::vector<std::string> features;
  std::vector<std::string> targets;
  Eigen::MatrixXd coefficients;  // (features + 1) x targets
  Eigen::VectorXd target_mean;
  Eigen::VectorXd target_sd;
  Eigen::VectorXd feature_min;
  Eigen::VectorXd feature_max;

  Eigen::MatrixXd predict(const Eigen::MatrixXd& x) const;
};

/// Models trained earlier in the same run, by model_id.
class ModelCache {
 public:
  void put(std::shared_ptr<const SurrogateModel> model);
  std::shared_ptr<const SurrogateModel> get(const std::string& model_id) const;

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<const SurrogateModel>> models_;
};

struct AdapterContext {
  const DatasetStore* datasets = nullptr;
  ModelCache* models = nullptr;
  std::uint64_t seed = 0;
  std::string step_id;
};

struct AdapterResult {
  ValueMap outputs;
  /// Numeric metrics surfaced on the step result (e.g. r2_score, rmse).
  Json metrics = Json::object();
};

/// Implementation of one tool. Throwing fails the step with the message.
class ToolAdapter {
 public:
  virtual ~ToolAdapter() = default;
  virtual std::string tool_id() const = 0;
  virtual SemVer version() const = 0;
  virtual AdapterResult run(const ValueMap& inputs, const Json& parameters, AdapterContext& context) = 0;
};

class AdapterRegistry {
 public:
  void add(std::shared_ptr<ToolAdapter> adapter);
  std::shared_ptr<ToolAdapter> find(const std::string& tool_id) const;
  std::vector<std::string> tool_ids() const;

 private:
  std::map<std::string, std::shared_ptr<ToolAdapter>> adapters_;
};

/// data_loader, data_cleaner, data_analyzer, materials_property_predictor,
/// alloy_inverse_designer.
AdapterRegistry builtin_adapters();

/// Exposed for tests.
struct CleanResult {
  DataFrame frame;
  std::int64_t rows_removed = 0;
};
CleanResult clean_frame(const DataFrame& input, const std::vector<std::string>& operations,
                        const std::string& missing_strategy);
Json profile_frame(const DataFrame& frame);

}  // namespace schemagate
