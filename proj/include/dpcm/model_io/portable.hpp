#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "dpcm/credit/model.hpp"
#include "dpcm/learn/linear.hpp"
#include "json.hpp"

namespace dpcm {

inline constexpr const char* kPortableFormatVersion = "1";

enum class ModelKind { Linear, Logistic, Forest, Gbt, CreditRiskBundle };

const std::string& to_string(ModelKind kind);

/// Provenance carried inside a portable document. Holds only aggregate
/// privacy facts (spend totals), never data.
struct DocumentMetadata {
  std::string trained_mode = "exact";
  std::uint64_t seed = 0;
  double epsilon_spent = 0.0;
  double delta_spent = 0.0;
  std::size_t ledger_entries = 0;
};

// Builders produce the canonical JSON document (sorted keys; floats encoded
// as the shortest round-tripping decimal). Exporting the same model twice is
// byte-identical.
nlohmann::json document_from_linear(const LinearModel& model,
                                    const std::vector<std::string>& column_names,
                                    const DocumentMetadata& meta,
                                    const Pipeline* pipeline = nullptr);
nlohmann::json document_from_forest(const ForestModel& model,
                                    const std::vector<std::string>& column_names,
                                    const DocumentMetadata& meta,
                                    const Pipeline* pipeline = nullptr);
nlohmann::json document_from_gbt(const GbtModel& model,
                                 const std::vector<std::string>& column_names,
                                 const DocumentMetadata& meta,
                                 const Pipeline* pipeline = nullptr);
nlohmann::json document_from_bundle(const CreditRiskModel& model,
                                    const std::vector<std::string>& column_names,
                                    const DocumentMetadata& meta);

/// Canonical serialization + atomic write. Conventional extension:
/// .dpcm.json.
void export_model(const nlohmann::json& document,
                  const std::filesystem::path& path);

/// A model reconstructed from a document; self-contained for prediction.
struct ImportedModel {
  ModelKind kind = ModelKind::Linear;
  std::vector<std::string> column_names;
  DocumentMetadata metadata;
  std::optional<Pipeline> pipeline;

  LinearModel linear;  // Linear / Logistic
  ForestModel forest;  // Forest
  GbtModel gbt;        // Gbt

  // CreditRiskBundle components.
  GbtModel pd;
  ForestModel ccf;
  GbtModel lgd_nonzero;
  ForestModel lgd_rate;

  /// Single-model prediction on a prepared matrix (not for bundles).
  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;

  CreditRiskModel to_credit_risk_model() const;
};

ImportedModel import_model_json(const nlohmann::json& document);
ImportedModel import_model(const std::filesystem::path& path);

/// Applies the embedded pipeline (when present) and the model to a feature
/// CSV, writing one prediction row per input row. Documents with a pipeline
/// take a loan-schema CSV; documents without take a numeric CSV whose
/// columns cover column_names. No privacy accounting anywhere on this path.
void standalone_predict(const std::filesystem::path& model_path,
                        const std::filesystem::path& input_csv,
                        const std::filesystem::path& output_csv);

}  // namespace dpcm
