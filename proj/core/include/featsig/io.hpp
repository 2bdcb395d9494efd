#ifndef FEATSIG_IO_HPP
#define FEATSIG_IO_HPP

#include <memory>
#include <span>
#include <string>

#include "featsig/cluster.hpp"
#include "featsig/data.hpp"
#include "featsig/hierarchy.hpp"
#include "featsig/importance.hpp"
#include "featsig/interactions.hpp"
#include "featsig/model.hpp"
#include "featsig/synth.hpp"

namespace featsig {

// Whole-file helpers.  Open failures are configuration errors (the path
// came from the command line); malformed content is a data error.
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

// Dataset CSV: header row of column names, numeric cells, targets either
// in a "__target__" column or in a separate file with one value per line.
Dataset parse_dataset_csv(const std::string& content);
std::vector<double> parse_targets(const std::string& content);
Dataset load_dataset_file(const std::string& path, const std::string& targets_path = "");
std::string dataset_to_csv(const Dataset& data);

// Importance report document (stable key order, diffable).
std::string report_to_json(const ImportanceReport& report, const FeatureHierarchy& hierarchy);
ImportanceReport report_from_json(const std::string& content,
                                  const FeatureHierarchy& hierarchy);

// The per-run counts table printed after an analysis.
std::string summary_table_text(const ImportanceReport& report,
                               const FeatureHierarchy& hierarchy);

std::string interactions_to_json(const InteractionAnalysis& analysis,
                                 const FeatureHierarchy& hierarchy);

// Experiment tables: JSON with config echo plus an aligned text rendering.
std::string experiment_to_json(const ExperimentConfig& config,
                               std::span<const ExperimentCell> cells);
std::string experiment_to_text(const ExperimentConfig& config,
                               std::span<const ExperimentCell> cells);

// Graphviz rendering of an analyzed hierarchy: every tested node is drawn
// (rejected nodes filled with intensity proportional to -log10 p, kept
// white otherwise), and the untested children of tested nodes appear as
// gray triangles marking where the descent stopped.  Leaves are boxes,
// groups ellipses.
std::string export_dot(const FeatureHierarchy& hierarchy, const ImportanceReport& report);

// Synthetic model document: ground-truth terms plus noise scale and seed.
std::string synthetic_model_to_json(const SyntheticModel& model);
std::shared_ptr<SyntheticModel> synthetic_model_from_json(const std::string& content);
std::shared_ptr<SyntheticModel> load_synthetic_model_file(const std::string& path);

// Linkage annotations for a clustering run, one step per line.
std::string linkage_to_csv(const ClusterResult& result);

}  // namespace featsig

#endif  // FEATSIG_IO_HPP
