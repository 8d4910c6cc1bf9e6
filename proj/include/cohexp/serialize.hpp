#pragma once

// Structured text format: every document is JSON. The expression schema is
// described in docs/format.md.

#include <filesystem>
#include <string>

#include "json.hpp"

#include "cohexp/coherence.hpp"
#include "cohexp/dnf.hpp"
#include "cohexp/expr.hpp"
#include "cohexp/gamma.hpp"
#include "cohexp/nn.hpp"
#include "cohexp/truth_table.hpp"

namespace cohexp {

using Json = nlohmann::ordered_json;

Json projection_to_json(const Projection& p);
Projection projection_from_json(const Json& j);

Json sampling_to_json(const SamplingSpec& s);
SamplingSpec sampling_from_json(const Json& j);

/// Mlp nodes serialize their weights inline unless they carry a
/// weights_ref, in which case only the reference is written.
Json expr_to_json(const Expr& e);
/// Relative weights_ref paths resolve against `base_dir`.
Expr expr_from_json(const Json& j, const std::filesystem::path& base_dir = {});

Json model_to_json(const MlpModel& m);
MlpModel model_from_json(const Json& j);

Json gamma_to_json(const GammaSpec& g);
GammaSpec gamma_from_json(const Json& j, const std::filesystem::path& base_dir = {});

Json table_to_json(const TruthTable& t);
TruthTable table_from_json(const Json& j);

Json dnf_to_json(const DnfFormula& f);
Json report_to_json(const CoherenceReport& r);

Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

Expr load_expr(const std::filesystem::path& path);
MlpModel load_model(const std::filesystem::path& path);

}  // namespace cohexp
