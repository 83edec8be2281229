#include "dpcm/model_io/portable.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "dpcm/data/csv.hpp"
#include "dpcm/errors.hpp"
#include "dpcm/io_util.hpp"

namespace dpcm {

namespace {

const std::string kKindNames[] = {"linear", "logistic", "forest", "gbt",
                                  "credit_risk_bundle"};

nlohmann::json trees_to_json(const std::vector<Tree>& trees) {
  nlohmann::json arr = nlohmann::json::array();
  for (const Tree& t : trees) {
    nlohmann::json feature = nlohmann::json::array();
    nlohmann::json threshold = nlohmann::json::array();
    nlohmann::json left = nlohmann::json::array();
    nlohmann::json right = nlohmann::json::array();
    nlohmann::json value = nlohmann::json::array();
    for (const TreeNode& n : t.nodes) {
      feature.push_back(n.feature);
      threshold.push_back(n.threshold);
      left.push_back(n.left);
      right.push_back(n.right);
      value.push_back(n.value);
    }
    arr.push_back({{"feature", std::move(feature)},
                   {"threshold", std::move(threshold)},
                   {"left", std::move(left)},
                   {"right", std::move(right)},
                   {"value", std::move(value)}});
  }
  return arr;
}

nlohmann::json forest_params(const ForestModel& m) {
  return {{"num_features", m.num_features}, {"trees", trees_to_json(m.trees)}};
}

nlohmann::json gbt_params(const GbtModel& m) {
  return {{"base_score", m.base_score},
          {"learning_rate", m.learning_rate},
          {"num_features", m.num_features},
          {"trees", trees_to_json(m.trees)}};
}

nlohmann::json metadata_to_json(const DocumentMetadata& meta) {
  return {{"trained_mode", meta.trained_mode},
          {"seed", meta.seed},
          {"privacy",
           {{"epsilon_spent", meta.epsilon_spent},
            {"delta_spent", meta.delta_spent},
            {"ledger_entries", meta.ledger_entries}}}};
}

nlohmann::json document_shell(ModelKind kind,
                              const std::vector<std::string>& column_names,
                              const DocumentMetadata& meta,
                              const Pipeline* pipeline) {
  nlohmann::json doc;
  doc["format_version"] = kPortableFormatVersion;
  doc["model_kind"] = to_string(kind);
  doc["column_names"] = column_names;
  doc["metadata"] = metadata_to_json(meta);
  doc["pipeline"] = pipeline ? pipeline->to_json() : nlohmann::json(nullptr);
  return doc;
}

// --- import-side validation helpers ----------------------------------------

[[noreturn]] void malformed(const std::string& path, const std::string& what) {
  throw MalformedDocument("at " + path + ": " + what);
}

const nlohmann::json& require_key(const nlohmann::json& j, const char* key,
                                  const std::string& path) {
  if (!j.is_object()) malformed(path, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) malformed(path + "." + key, "missing");
  return *it;
}

double require_finite(const nlohmann::json& j, const std::string& path) {
  if (!j.is_number()) malformed(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) malformed(path, "must be finite");
  return v;
}

std::vector<Tree> trees_from_json(const nlohmann::json& arr, int num_features,
                                  const std::string& path) {
  if (!arr.is_array()) malformed(path, "expected an array of trees");
  std::vector<Tree> trees;
  trees.reserve(arr.size());
  for (std::size_t t = 0; t < arr.size(); ++t) {
    const std::string tpath = path + "[" + std::to_string(t) + "]";
    const nlohmann::json& jt = arr[t];
    const nlohmann::json& feature = require_key(jt, "feature", tpath);
    const nlohmann::json& threshold = require_key(jt, "threshold", tpath);
    const nlohmann::json& left = require_key(jt, "left", tpath);
    const nlohmann::json& right = require_key(jt, "right", tpath);
    const nlohmann::json& value = require_key(jt, "value", tpath);
    if (!feature.is_array() || !threshold.is_array() || !left.is_array() ||
        !right.is_array() || !value.is_array())
      malformed(tpath, "node fields must be arrays");
    const std::size_t n = feature.size();
    if (threshold.size() != n || left.size() != n || right.size() != n ||
        value.size() != n)
      malformed(tpath, "node arrays must have equal length");
    if (n == 0) malformed(tpath, "tree has no nodes");
    Tree tree;
    tree.nodes.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::string npath = tpath + ".feature[" + std::to_string(i) + "]";
      TreeNode& node = tree.nodes[i];
      if (!feature[i].is_number_integer()) malformed(npath, "expected an integer");
      node.feature = feature[i].get<int>();
      node.threshold = require_finite(threshold[i], tpath + ".threshold[" +
                                                        std::to_string(i) + "]");
      node.left = left[i].get<int>();
      node.right = right[i].get<int>();
      node.value = require_finite(value[i], tpath + ".value[" +
                                                std::to_string(i) + "]");
      if (node.feature >= num_features)
        malformed(npath, "feature index out of range");
      if (node.feature >= 0) {
        const int size = static_cast<int>(n);
        if (node.left < 0 || node.left >= size || node.right < 0 ||
            node.right >= size ||
            node.left == static_cast<int>(i) || node.right == static_cast<int>(i))
          malformed(tpath, "child index out of range at node " +
                               std::to_string(i));
      }
    }
    trees.push_back(std::move(tree));
  }
  return trees;
}

ForestModel forest_from_json(const nlohmann::json& params,
                             const std::string& path) {
  ForestModel m;
  const nlohmann::json& nf = require_key(params, "num_features", path);
  if (!nf.is_number_integer()) malformed(path + ".num_features", "expected an integer");
  m.num_features = nf.get<int>();
  m.trees = trees_from_json(require_key(params, "trees", path), m.num_features,
                            path + ".trees");
  if (m.trees.empty()) malformed(path + ".trees", "forest needs at least one tree");
  return m;
}

GbtModel gbt_from_json(const nlohmann::json& params, const std::string& path) {
  GbtModel m;
  m.base_score = require_finite(require_key(params, "base_score", path),
                                path + ".base_score");
  m.learning_rate = require_finite(require_key(params, "learning_rate", path),
                                   path + ".learning_rate");
  const nlohmann::json& nf = require_key(params, "num_features", path);
  if (!nf.is_number_integer()) malformed(path + ".num_features", "expected an integer");
  m.num_features = nf.get<int>();
  m.trees = trees_from_json(require_key(params, "trees", path), m.num_features,
                            path + ".trees");
  return m;
}

LinearModel linear_from_json(const nlohmann::json& params, LinkFunction link,
                             const std::string& path) {
  LinearModel m;
  m.link = link;
  const nlohmann::json& w = require_key(params, "weights", path);
  if (!w.is_array()) malformed(path + ".weights", "expected an array");
  m.weights.resize(static_cast<Eigen::Index>(w.size()));
  for (std::size_t i = 0; i < w.size(); ++i)
    m.weights(static_cast<Eigen::Index>(i)) =
        require_finite(w[i], path + ".weights[" + std::to_string(i) + "]");
  m.intercept = require_finite(require_key(params, "intercept", path),
                               path + ".intercept");
  return m;
}

}  // namespace

const std::string& to_string(ModelKind kind) {
  return kKindNames[static_cast<int>(kind)];
}

nlohmann::json document_from_linear(const LinearModel& model,
                                    const std::vector<std::string>& column_names,
                                    const DocumentMetadata& meta,
                                    const Pipeline* pipeline) {
  const ModelKind kind = model.link == LinkFunction::Logit ? ModelKind::Logistic
                                                           : ModelKind::Linear;
  nlohmann::json doc = document_shell(kind, column_names, meta, pipeline);
  nlohmann::json weights = nlohmann::json::array();
  for (Eigen::Index i = 0; i < model.weights.size(); ++i)
    weights.push_back(model.weights(i));
  doc["parameters"] = {{"weights", std::move(weights)},
                       {"intercept", model.intercept}};
  return doc;
}

nlohmann::json document_from_forest(const ForestModel& model,
                                    const std::vector<std::string>& column_names,
                                    const DocumentMetadata& meta,
                                    const Pipeline* pipeline) {
  nlohmann::json doc =
      document_shell(ModelKind::Forest, column_names, meta, pipeline);
  doc["parameters"] = forest_params(model);
  return doc;
}

nlohmann::json document_from_gbt(const GbtModel& model,
                                 const std::vector<std::string>& column_names,
                                 const DocumentMetadata& meta,
                                 const Pipeline* pipeline) {
  nlohmann::json doc =
      document_shell(ModelKind::Gbt, column_names, meta, pipeline);
  doc["parameters"] = gbt_params(model);
  return doc;
}

nlohmann::json document_from_bundle(const CreditRiskModel& model,
                                    const std::vector<std::string>& column_names,
                                    const DocumentMetadata& meta) {
  nlohmann::json doc = document_shell(ModelKind::CreditRiskBundle, column_names,
                                      meta, &model.pipeline);
  doc["parameters"] = {
      {"pd", gbt_params(model.pd_model)},
      {"ccf", forest_params(model.ccf_model)},
      {"lgd_nonzero", gbt_params(model.lgd_nonzero_model)},
      {"lgd_rate", forest_params(model.lgd_rate_model)}};
  return doc;
}

void export_model(const nlohmann::json& document,
                  const std::filesystem::path& path) {
  write_file_atomic(path, document.dump(2) + "\n");
}

Eigen::VectorXd ImportedModel::predict(const Eigen::MatrixXd& X) const {
  switch (kind) {
    case ModelKind::Linear:
    case ModelKind::Logistic:
      return linear.predict(X);
    case ModelKind::Forest:
      return forest.predict(X);
    case ModelKind::Gbt:
      return gbt.predict(X);
    case ModelKind::CreditRiskBundle:
      break;
  }
  throw InvalidConfig("bundle documents predict through standalone_predict");
}

CreditRiskModel ImportedModel::to_credit_risk_model() const {
  if (kind != ModelKind::CreditRiskBundle)
    throw InvalidConfig("document does not hold a credit risk bundle");
  CreditRiskModel m;
  m.pipeline = *pipeline;
  m.pd_model = pd;
  m.ccf_model = ccf;
  m.lgd_nonzero_model = lgd_nonzero;
  m.lgd_rate_model = lgd_rate;
  m.mode = metadata.trained_mode == "private" ? TrainMode::Private
                                              : TrainMode::Exact;
  return m;
}

namespace {

ImportedModel import_model_json_impl(const nlohmann::json& doc) {
  const nlohmann::json& version = require_key(doc, "format_version", "$");
  if (!version.is_string())
    malformed("$.format_version", "expected a string");
  if (version.get<std::string>() != kPortableFormatVersion)
    throw VersionMismatch("unsupported format_version '" +
                          version.get<std::string>() + "' (expected '" +
                          kPortableFormatVersion + "')");

  ImportedModel out;
  const nlohmann::json& kind = require_key(doc, "model_kind", "$");
  if (!kind.is_string()) malformed("$.model_kind", "expected a string");
  const std::string kind_name = kind.get<std::string>();
  bool known = false;
  for (int k = 0; k < 5; ++k) {
    if (kKindNames[k] == kind_name) {
      out.kind = static_cast<ModelKind>(k);
      known = true;
      break;
    }
  }
  if (!known) malformed("$.model_kind", "unknown kind '" + kind_name + "'");

  const nlohmann::json& cols = require_key(doc, "column_names", "$");
  if (!cols.is_array()) malformed("$.column_names", "expected an array");
  for (const auto& c : cols) {
    if (!c.is_string()) malformed("$.column_names", "entries must be strings");
    out.column_names.push_back(c.get<std::string>());
  }

  const nlohmann::json& meta = require_key(doc, "metadata", "$");
  out.metadata.trained_mode =
      require_key(meta, "trained_mode", "$.metadata").get<std::string>();
  out.metadata.seed = require_key(meta, "seed", "$.metadata").get<std::uint64_t>();
  const nlohmann::json& privacy = require_key(meta, "privacy", "$.metadata");
  out.metadata.epsilon_spent = require_finite(
      require_key(privacy, "epsilon_spent", "$.metadata.privacy"),
      "$.metadata.privacy.epsilon_spent");
  out.metadata.delta_spent = require_finite(
      require_key(privacy, "delta_spent", "$.metadata.privacy"),
      "$.metadata.privacy.delta_spent");
  out.metadata.ledger_entries =
      require_key(privacy, "ledger_entries", "$.metadata.privacy")
          .get<std::size_t>();

  const nlohmann::json& pipeline = require_key(doc, "pipeline", "$");
  if (!pipeline.is_null()) {
    try {
      out.pipeline = Pipeline::from_json(pipeline);
    } catch (const MalformedDocument&) {
      throw;
    } catch (const std::exception& e) {
      malformed("$.pipeline", e.what());
    }
  }

  const nlohmann::json& params = require_key(doc, "parameters", "$");
  const std::string ppath = "$.parameters";
  switch (out.kind) {
    case ModelKind::Linear:
      out.linear = linear_from_json(params, LinkFunction::Identity, ppath);
      break;
    case ModelKind::Logistic:
      out.linear = linear_from_json(params, LinkFunction::Logit, ppath);
      break;
    case ModelKind::Forest:
      out.forest = forest_from_json(params, ppath);
      break;
    case ModelKind::Gbt:
      out.gbt = gbt_from_json(params, ppath);
      break;
    case ModelKind::CreditRiskBundle:
      if (!out.pipeline)
        malformed("$.pipeline", "bundle documents require a pipeline");
      out.pd = gbt_from_json(require_key(params, "pd", ppath), ppath + ".pd");
      out.ccf = forest_from_json(require_key(params, "ccf", ppath),
                                 ppath + ".ccf");
      out.lgd_nonzero = gbt_from_json(
          require_key(params, "lgd_nonzero", ppath), ppath + ".lgd_nonzero");
      out.lgd_rate = forest_from_json(require_key(params, "lgd_rate", ppath),
                                      ppath + ".lgd_rate");
      break;
  }
  return out;
}

}  // namespace

ImportedModel import_model_json(const nlohmann::json& doc) {
  try {
    return import_model_json_impl(doc);
  } catch (const nlohmann::json::exception& e) {
    throw MalformedDocument(std::string("document type error: ") + e.what());
  }
}

ImportedModel import_model(const std::filesystem::path& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw MalformedDocument(std::string("invalid JSON: ") + e.what());
  }
  return import_model_json(doc);
}

void standalone_predict(const std::filesystem::path& model_path,
                        const std::filesystem::path& input_csv,
                        const std::filesystem::path& output_csv) {
  const ImportedModel model = import_model(model_path);
  std::ostringstream out;

  if (model.pipeline) {
    const LoadResult loaded = load_csv(input_csv, /*strict=*/true);
    const FeatureMatrix matrix = model.pipeline->apply(loaded.dataset);
    if (model.kind == ModelKind::CreditRiskBundle) {
      const CreditRiskModel bundle = model.to_credit_risk_model();
      const auto losses = predict_losses(bundle, loaded.dataset);
      out << "member_id,pd,ead,lgd,expected_loss\n";
      for (const auto& b : losses)
        out << b.member_id << ',' << format_double_shortest(b.pd) << ','
            << format_currency(b.ead) << ',' << format_double_shortest(b.lgd)
            << ',' << format_currency(b.expected_loss) << '\n';
    } else {
      const Eigen::VectorXd pred = model.predict(matrix.values);
      out << "member_id,prediction\n";
      for (Eigen::Index i = 0; i < pred.size(); ++i)
        out << matrix.member_ids[static_cast<std::size_t>(i)] << ','
            << format_double_shortest(pred(i)) << '\n';
    }
    write_file_atomic(output_csv, out.str());
    return;
  }

  // Bare model: numeric CSV whose columns cover column_names.
  std::ifstream in(input_csv);
  if (!in) throw IoError("cannot open '" + input_csv.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw SchemaMismatch("input CSV is empty");
  const std::vector<std::string> header = split_csv_line(line);
  std::vector<std::size_t> take;
  for (const auto& name : model.column_names) {
    bool found = false;
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) {
        take.push_back(i);
        found = true;
        break;
      }
    }
    if (!found) throw SchemaMismatch("input CSV missing column '" + name + "'");
  }

  std::vector<std::vector<double>> rows;
  std::size_t row_number = 1;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() < header.size())
      throw ParseError("row " + std::to_string(row_number) + ": too few fields");
    std::vector<double> row;
    row.reserve(take.size());
    for (std::size_t k : take) {
      try {
        row.push_back(std::stod(fields[k]));
      } catch (const std::exception&) {
        throw ParseError("row " + std::to_string(row_number) +
                         ": bad numeric value '" + fields[k] + "'");
      }
    }
    rows.push_back(std::move(row));
    ++row_number;
  }

  Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(model.column_names.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];

  const Eigen::VectorXd pred = model.predict(X);
  out << "prediction\n";
  for (Eigen::Index i = 0; i < pred.size(); ++i)
    out << format_double_shortest(pred(i)) << '\n';
  write_file_atomic(output_csv, out.str());
}

}  // namespace dpcm
