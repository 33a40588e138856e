#include "schemagate/adapters.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

#include "schemagate/digest.hpp"
#include "schemagate/registry.hpp"
#include "schemagate/values.hpp"

namespace schemagate {

bool value_matches(const Value& value, const SemanticType& type) {
  if (const auto* json = std::get_if<Json>(&value)) return value_conforms(*json, type);
  const auto& frame = std::get<FramePtr>(value);
  if (type.kind() != TypeKind::kDataFrame || !frame) return false;
  if (type.dynamic_columns()) return true;
  for (const auto& c : type.columns()) {
    if (!frame->column(c)) return false;
  }
  return true;
}

Eigen::MatrixXd SurrogateModel::predict(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd design(x.rows(), x.cols() + 1);
  design.col(0).setOnes();
  design.rightCols(x.cols()) = x;
  return design * coefficients;
}

void ModelCache::put(std::shared_ptr<const SurrogateModel> model) {
  std::lock_guard lock(mu_);
  models_[model->model_id] = std::move(model);
}

std::shared_ptr<const SurrogateModel> ModelCache::get(const std::string& model_id) const {
  std::lock_guard lock(mu_);
  auto it = models_.find(model_id);
  return it == models_.end() ? nullptr : it->second;
}

void AdapterRegistry::add(std::shared_ptr<ToolAdapter> adapter) {
  auto id = adapter->tool_id();
  adapters_[id] = std::move(adapter);
}

std::shared_ptr<ToolAdapter> AdapterRegistry::find(const std::string& tool_id) const {
  auto it = adapters_.find(tool_id);
  return it == adapters_.end() ? nullptr : it->second;
}

std::vector<std::string> AdapterRegistry::tool_ids() const {
  std::vector<std::string> out;
  for (const auto& [id, _] : adapters_) out.push_back(id);
  return out;
}

// ---------------------------------------------------------------- helpers

namespace {

const DataFrame& frame_input(const ValueMap& inputs, const std::string& name) {
  auto it = inputs.find(name);
  if (it == inputs.end()) throw std::runtime_error("input '" + name + "' was not provided");
  const auto* frame = std::get_if<FramePtr>(&it->second);
  if (!frame || !*frame) throw std::runtime_error("input '" + name + "' is not a dataframe");
  return **frame;
}

const Json* json_input(const ValueMap& inputs, const std::string& name) {
  auto it = inputs.find(name);
  if (it == inputs.end()) return nullptr;
  return std::get_if<Json>(&it->second);
}

std::string param_string(const Json& params, const std::string& name, const std::string& fallback = {}) {
  if (!params.contains(name) || params[name].is_null()) return fallback;
  return params[name].get<std::string>();
}

std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const auto n = values.size();
  return n % 2 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

std::vector<std::string> string_list(const Json& value, const std::string& what) {
  if (!value.is_array()) throw std::runtime_error(what + " must be a list of strings");
  std::vector<std::string> out;
  for (const auto& v : value) {
    if (!v.is_string()) throw std::runtime_error(what + " must be a list of strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------- cleaning and profiling

CleanResult clean_frame(const DataFrame& input, const std::vector<std::string>& operations,
                        const std::string& missing_strategy) {
  DataFrame frame = input;
  for (const auto& op : operations) {
    if (op == "remove_duplicates") {
      std::vector<std::size_t> keep;
      for (std::size_t r = 0; r < frame.rows(); ++r) {
        bool seen = false;
        for (auto k : keep) {
          if (frame.rows_equal(k, r)) {
            seen = true;
            break;
          }
        }
        if (!seen) keep.push_back(r);
      }
      frame = frame.select_rows(keep);
    } else if (op == "handle_missing") {
      if (missing_strategy == "remove") {
        std::vector<std::size_t> keep;
        for (std::size_t r = 0; r < frame.rows(); ++r) {
          if (!frame.row_has_missing(r)) keep.push_back(r);
        }
        frame = frame.select_rows(keep);
      } else if (missing_strategy == "fill_mean" || missing_strategy == "fill_median") {
        for (auto& col : frame.columns()) {
          std::vector<double> present;
          bool missing = false;
          for (const auto& cell : col.cells) {
            if (is_missing(cell)) {
              missing = true;
            } else if (const auto* d = std::get_if<double>(&cell)) {
              present.push_back(*d);
            }
          }
          if (!missing) continue;
          if (col.kind != ColumnKind::kNumber) {
            throw std::runtime_error("column '" + col.name + "' has missing values but is not numeric; " +
                                     missing_strategy + " applies to numeric columns only");
          }
          if (present.empty()) throw std::runtime_error("column '" + col.name + "' has no values to fill from");
          const double fill = missing_strategy == "fill_mean"
                                  ? std::accumulate(present.begin(), present.end(), 0.0) /
                                        static_cast<double>(present.size())
                                  : median(present);
          for (auto& cell : col.cells) {
            if (is_missing(cell)) cell = fill;
          }
        }
      } else {
        throw std::runtime_error("unknown missing_strategy '" + missing_strategy + "'");
      }
    } else {
      throw std::runtime_error("unknown cleaning operation '" + op + "'");
    }
  }
  CleanResult out;
  out.rows_removed = static_cast<std::int64_t>(input.rows()) - static_cast<std::int64_t>(frame.rows());
  out.frame = std::move(frame);
  return out;
}

Json profile_frame(const DataFrame& frame) {
  Json columns = Json::object();
  for (const auto& col : frame.columns()) {
    Json entry = Json::object();
    entry["kind"] = column_kind_name(col.kind);
    if (col.kind == ColumnKind::kNumber) {
      std::vector<double> v;
      for (const auto& cell : col.cells) {
        if (const auto* d = std::get_if<double>(&cell)) v.push_back(*d);
      }
      entry["count"] = v.size();
      if (v.empty()) {
        entry["mean"] = nullptr;
        entry["min"] = nullptr;
        entry["max"] = nullptr;
      } else {
        entry["mean"] = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
        entry["min"] = *std::min_element(v.begin(), v.end());
        entry["max"] = *std::max_element(v.begin(), v.end());
      }
    } else {
      std::set<std::string> distinct;
      std::size_t count = 0;
      for (std::size_t r = 0; r < col.cells.size(); ++r) {
        if (is_missing(col.cells[r])) continue;
        ++count;
        const auto& cell = col.cells[r];
        distinct.insert(std::holds_alternative<bool>(cell) ? (std::get<bool>(cell) ? "true" : "false")
                                                           : std::get<std::string>(cell));
      }
      entry["count"] = count;
      entry["unique"] = distinct.size();
    }
    columns[col.name] = std::move(entry);
  }
  Json profile = Json::object();
  profile["rows"] = frame.rows();
  profile["columns"] = std::move(columns);
  return profile;
}

namespace {

std::string profile_summary(const Json& profile) {
  std::string out = std::to_string(profile["rows"].get<std::size_t>()) + " rows, " +
                    std::to_string(profile["columns"].size()) + " columns.";
  for (const auto& [name, col] : profile["columns"].items()) {
    out += " " + name + ": ";
    if (col["kind"] == "number" && !col["mean"].is_null()) {
      out += "mean " + short_number(col["mean"].get<double>()) + " (min " + short_number(col["min"].get<double>()) +
             ", max " + short_number(col["max"].get<double>()) + ");";
    } else {
      out += std::to_string(col["count"].get<std::size_t>()) + " values, " +
             std::to_string(col.value("unique", 0)) + " distinct;";
    }
  }
  return out;
}

// ---------------------------------------------------------------- built-in adapters

class DataLoader final : public ToolAdapter {
 public:
  std::string tool_id() const override { return "data_loader"; }
  SemVer version() const override { return {1, 0, 0}; }

  AdapterResult run(const ValueMap&, const Json& params, AdapterContext& ctx) override {
    const auto type = param_string(params, "file_type", "csv");
    if (type != "csv") throw std::runtime_error("unsupported file_type '" + type + "'");
    const auto id = param_string(params, "dataset_id");
    const auto file = param_string(params, "dataset_file");
    DataFrame frame;
    if (!id.empty()) {
      if (!ctx.datasets) throw std::runtime_error("no dataset store configured");
      frame = ctx.datasets->load(id);
    } else if (!file.empty()) {
      if (ctx.datasets && ctx.datasets->find(file)) {
        frame = ctx.datasets->load(file);
      } else {
        frame = DataFrame::read_csv(file);
      }
    } else {
      throw std::runtime_error("either dataset_id or dataset_file is required");
    }
    AdapterResult out;
    out.outputs["data"] = std::make_shared<const DataFrame>(std::move(frame));
    return out;
  }
};

class DataCleaner final : public ToolAdapter {
 public:
  std::string tool_id() const override { return "data_cleaner"; }
  SemVer version() const override { return {1, 0, 0}; }

  AdapterResult run(const ValueMap& inputs, const Json& params, AdapterContext&) override {
    const auto& frame = frame_input(inputs, "data");
    std::vector<std::string> ops{"remove_duplicates", "handle_missing"};
    if (params.contains("operations")) ops = string_list(params["operations"], "operations");
    auto cleaned = clean_frame(frame, ops, param_string(params, "missing_strategy", "remove"));
    AdapterResult out;
    out.outputs["cleaned_data"] = std::make_shared<const DataFrame>(std::move(cleaned.frame));
    out.outputs["rows_removed"] = Json(cleaned.rows_removed);
    return out;
  }
};

class DataAnalyzer final : public ToolAdapter {
 public:
  std::string tool_id() const override { return "data_analyzer"; }
  SemVer version() const override { return {1, 0, 0}; }

  AdapterResult run(const ValueMap& inputs, const Json& params, AdapterContext&) override {
    const auto& frame = frame_input(inputs, "data");
    const auto kind = param_string(params, "analysis_type", "dataset_profile");
    if (kind != "dataset_profile") throw std::runtime_error("unsupported analysis_type '" + kind + "'");
    AdapterResult out;
    auto profile = profile_frame(frame);
    if (params.value("generate_summary", true)) out.outputs["summary"] = Json(profile_summary(profile));
    out.outputs["profile"] = std::move(profile);
    return out;
  }
};

struct Matrices {
  Eigen::MatrixXd x;
  Eigen::MatrixXd y;
};

Matrices numeric_rows(const DataFrame& frame, const std::vector<std::string>& features,
                      const std::vector<std::string>& targets) {
  std::vector<const Column*> fx, ty;
  for (const auto& f : features) fx.push_back(frame.column(f));
  for (const auto& t : targets) ty.push_back(frame.column(t));
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < frame.rows(); ++r) {
    bool complete = true;
    for (const auto* c : fx) complete = complete && !is_missing(c->cells[r]);
    for (const auto* c : ty) complete = complete && !is_missing(c->cells[r]);
    if (complete) rows.push_back(r);
  }
  Matrices m{Eigen::MatrixXd(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(fx.size())),
             Eigen::MatrixXd(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(ty.size()))};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < fx.size(); ++j) {
      m.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = std::get<double>(fx[j]->cells[rows[i]]);
    }
    for (std::size_t j = 0; j < ty.size(); ++j) {
      m.y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = std::get<double>(ty[j]->cells[rows[i]]);
    }
  }
  return m;
}

Eigen::MatrixXd fit_least_squares(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  Eigen::MatrixXd design(x.rows(), x.cols() + 1);
  design.col(0).setOnes();
  design.rightCols(x.cols()) = x;
  return design.completeOrthogonalDecomposition().solve(y);
}

std::size_t fold_count(const std::string& strategy, std::size_t rows) {
  if (strategy == "5-fold") return std::min<std::size_t>(5, rows);
  if (strategy == "10-fold") return std::min<std::size_t>(10, rows);
  if (strategy == "leave-one-out") return rows;
  throw std::runtime_error("unknown validation_strategy '" + strategy + "'");
}

class PropertyPredictor final : public ToolAdapter {
 public:
  std::string tool_id() const override { return "materials_property_predictor"; }
  SemVer version() const override { return {2, 1, 0}; }

  AdapterResult run(const ValueMap& inputs, const Json& params, AdapterContext& ctx) override {
    const auto& frame = frame_input(inputs, "dataset");
    std::vector<std::string> targets;
    if (const auto* cols = json_input(inputs, "target_columns")) {
      targets = string_list(*cols, "target_columns");
    } else if (params.contains("target_properties")) {
      targets = string_list(params["target_properties"], "target_properties");
    }
    if (targets.empty()) throw std::runtime_error("no target columns given");
    for (const auto& t : targets) {
      const auto* col = frame.column(t);
      if (!col) throw std::runtime_error("target column '" + t + "' is not in the dataset");
      if (col->kind != ColumnKind::kNumber) throw std::runtime_error("target column '" + t + "' is not numeric");
    }
    std::vector<std::string> features;
    for (const auto& col : frame.columns()) {
      if (col.kind == ColumnKind::kNumber && std::find(targets.begin(), targets.end(), col.name) == targets.end()) {
        features.push_back(col.name);
      }
    }
    if (features.empty()) throw std::runtime_error("dataset has no numeric feature columns");
    const auto data = numeric_rows(frame, features, targets);
    const auto n = static_cast<std::size_t>(data.x.rows());
    if (n < 3) throw std::runtime_error("at least 3 complete rows are needed, got " + std::to_string(n));

    const auto strategy = param_string(params, "validation_strategy", "5-fold");
    const auto k = fold_count(strategy, n);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(ctx.seed);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::size_t> fold(n);
    for (std::size_t i = 0; i < n; ++i) fold[order[i]] = i % k;

    Eigen::MatrixXd cv(data.y.rows(), data.y.cols());
    for (std::size_t f = 0; f < k; ++f) {
      std::vector<Eigen::Index> train, test;
      for (std::size_t r = 0; r < n; ++r) (fold[r] == f ? test : train).push_back(static_cast<Eigen::Index>(r));
      const Eigen::MatrixXd coef = fit_least_squares(data.x(train, Eigen::all), data.y(train, Eigen::all));
      Eigen::MatrixXd design(static_cast<Eigen::Index>(test.size()), data.x.cols() + 1);
      design.col(0).setOnes();
      design.rightCols(data.x.cols()) = data.x(test, Eigen::all);
      cv(test, Eigen::all) = design * coef;
    }

    double r2_sum = 0.0, rmse_sum = 0.0;
    for (Eigen::Index t = 0; t < data.y.cols(); ++t) {
      const auto y = data.y.col(t);
      const double ss_res = (y - cv.col(t)).squaredNorm();
      const double ss_tot = (y.array() - y.mean()).matrix().squaredNorm();
      r2_sum += ss_tot > 0 ? 1.0 - ss_res / ss_tot : 0.0;
      rmse_sum += std::sqrt(ss_res / static_cast<double>(n));
    }
    const double tcount = static_cast<double>(targets.size());

    auto model = std::make_shared<SurrogateModel>();
    model->features = features;
    model->targets = targets;
    model->coefficients = fit_least_squares(data.x, data.y);
    model->target_mean = data.y.colwise().mean();
    model->target_sd = ((data.y.rowwise() - data.y.colwise().mean()).array().square().colwise().sum() /
                        static_cast<double>(n))
                           .sqrt();
    model->feature_min = data.x.colwise().minCoeff();
    model->feature_max = data.x.colwise().maxCoeff();
    std::string fingerprint;
    for (const auto& f : features) fingerprint += f + ",";
    for (const auto& t : targets) fingerprint += t + ",";
    for (Eigen::Index i = 0; i < model->coefficients.size(); ++i) {
      fingerprint += format_number(model->coefficients.data()[i]) + ",";
    }
    model->model_id = "surrogate-" + sha256_hex(fingerprint).substr(0, 12);
    ctx.models->put(model);

    std::vector<Column> cols;
    for (std::size_t t = 0; t < targets.size(); ++t) {
      Column actual{targets[t], ColumnKind::kNumber, {}};
      Column predicted{targets[t] + "_predicted", ColumnKind::kNumber, {}};
      for (std::size_t r = 0; r < n; ++r) {
        actual.cells.emplace_back(data.y(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(t)));
        predicted.cells.emplace_back(cv(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(t)));
      }
      cols.push_back(std::move(actual));
      cols.push_back(std::move(predicted));
    }

    AdapterResult out;
    out.metrics["r2_score"] = r2_sum / tcount;
    out.metrics["rmse"] = rmse_sum / tcount;
    out.outputs["model_id"] = Json(model->model_id);
    out.outputs["metrics"] = out.metrics;
    out.outputs["predictions"] = std::make_shared<const DataFrame>(std::move(cols));
    return out;
  }
};

class InverseDesigner final : public ToolAdapter {
 public:
  std::string tool_id() const override { return "alloy_inverse_designer"; }
  SemVer version() const override { return {1, 0, 0}; }

  AdapterResult run(const ValueMap& inputs, const Json& params, AdapterContext& ctx) override {
    const auto* model_ref = json_input(inputs, "model");
    if (!model_ref || !model_ref->is_string()) throw std::runtime_error("input 'model' was not provided");
    auto model = ctx.models->get(model_ref->get<std::string>());
    if (!model) throw std::runtime_error("unknown model '" + model_ref->get<std::string>() + "'");
    frame_input(inputs, "dataset");

    const auto p = static_cast<Eigen::Index>(model->features.size());
    Eigen::VectorXd lo = model->feature_min, hi = model->feature_max;
    const Json constraints = params.value("constraints", Json::object());
    for (const auto& [element, bound] : constraints.items()) {
      auto it = std::find(model->features.begin(), model->features.end(), element);
      if (it == model->features.end()) throw std::runtime_error("constraint on unknown element '" + element + "'");
      const auto j = static_cast<Eigen::Index>(it - model->features.begin());
      if (bound.contains("min")) lo(j) = std::max(lo(j), bound["min"].get<double>());
      if (bound.contains("max")) hi(j) = std::min(hi(j), bound["max"].get<double>());
      if (lo(j) > hi(j)) throw std::runtime_error("constraints leave no feasible range for '" + element + "'");
    }

    const auto wanted = static_cast<std::size_t>(params.value("n_candidates", 50));
    const auto pool = std::max<std::size_t>(1000, wanted * 20);
    std::mt19937_64 rng(ctx.seed);
    Eigen::MatrixXd samples(static_cast<Eigen::Index>(pool), p);
    for (Eigen::Index r = 0; r < samples.rows(); ++r) {
      for (Eigen::Index j = 0; j < p; ++j) {
        samples(r, j) = std::uniform_real_distribution<double>(lo(j), hi(j))(rng);
      }
    }
    const Eigen::MatrixXd predicted = model->predict(samples);
    Eigen::VectorXd score = Eigen::VectorXd::Zero(samples.rows());
    for (Eigen::Index t = 0; t < predicted.cols(); ++t) {
      const double sd = model->target_sd(t) > 0 ? model->target_sd(t) : 1.0;
      score += ((predicted.col(t).array() - model->target_mean(t)) / sd).matrix();
    }
    std::vector<Eigen::Index> rank(static_cast<std::size_t>(samples.rows()));
    std::iota(rank.begin(), rank.end(), 0);
    std::stable_sort(rank.begin(), rank.end(), [&](auto a, auto b) { return score(a) > score(b); });
    rank.resize(std::min(wanted, rank.size()));

    std::vector<Column> cols;
    for (Eigen::Index j = 0; j < p; ++j) {
      Column c{model->features[static_cast<std::size_t>(j)], ColumnKind::kNumber, {}};
      for (auto r : rank) c.cells.emplace_back(samples(r, j));
      cols.push_back(std::move(c));
    }
    for (Eigen::Index t = 0; t < predicted.cols(); ++t) {
      Column c{model->targets[static_cast<std::size_t>(t)], ColumnKind::kNumber, {}};
      for (auto r : rank) c.cells.emplace_back(predicted(r, t));
      cols.push_back(std::move(c));
    }
    Column s{"score", ColumnKind::kNumber, {}};
    for (auto r : rank) s.cells.emplace_back(score(r));
    cols.push_back(std::move(s));

    std::string summary = std::to_string(rank.size()) + " candidates from model " +
                          param_string(params, "model_id", model->model_id) + ".";
    if (!rank.empty()) {
      summary += " Top:";
      for (Eigen::Index j = 0; j < p; ++j) {
        summary += " " + model->features[static_cast<std::size_t>(j)] + "=" + short_number(samples(rank[0], j));
      }
      summary += ";";
      for (Eigen::Index t = 0; t < predicted.cols(); ++t) {
        summary += " " + model->targets[static_cast<std::size_t>(t)] + "=" + short_number(predicted(rank[0], t));
      }
    }
    AdapterResult out;
    out.outputs["candidates"] = std::make_shared<const DataFrame>(std::move(cols));
    out.outputs["summary"] = Json(summary);
    return out;
  }
};

}  // namespace

AdapterRegistry builtin_adapters() {
  AdapterRegistry reg;
  reg.add(std::make_shared<DataLoader>());
  reg.add(std::make_shared<DataCleaner>());
  reg.add(std::make_shared<DataAnalyzer>());
  reg.add(std::make_shared<PropertyPredictor>());
  reg.add(std::make_shared<InverseDesigner>());
  return reg;
}

}  // namespace schemagate
