#include "featsig/io.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

#include "featsig/errors.hpp"

namespace featsig {

using json = nlohmann::ordered_json;

namespace {

std::string fmt_double(double v) {
    char buf[64];
    const auto result = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, result.ptr);
}

std::vector<std::string> split_lines(const std::string& content) {
    std::vector<std::string> lines;
    std::string current;
    for (char c : content) {
        if (c == '\n') {
            if (!current.empty() && current.back() == '\r') current.pop_back();
            lines.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    if (!current.empty() && current.back() == '\r') current.pop_back();
    if (!current.empty()) lines.push_back(std::move(current));
    return lines;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string current;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    fields.push_back(std::move(current));
    return fields;
}

double parse_cell(const std::string& token, std::size_t line_number) {
    if (token.empty()) {
        throw data_error("empty numeric cell on line " + std::to_string(line_number));
    }
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end != token.c_str() + token.size() || errno == ERANGE || !std::isfinite(v)) {
        throw data_error("cannot parse '" + token + "' as a finite number on line " +
                         std::to_string(line_number));
    }
    return v;
}

json spec_to_json(const PerturbationSpec& spec) {
    json out;
    out["kind"] = perturbation_kind_name(spec.kind);
    out["replicates"] = spec.replicates();
    if (spec.kind == PerturbationSpec::Kind::erasure) {
        out["erasure_value"] = spec.erasure_value;
    }
    return out;
}

PerturbationSpec spec_from_json(const json& doc, std::uint64_t seed) {
    if (!doc.is_object() || !doc.contains("kind") || !doc["kind"].is_string()) {
        throw data_error("perturbation config must carry a \"kind\" string");
    }
    PerturbationSpec spec;
    spec.kind = perturbation_kind_from_name(doc["kind"].get<std::string>());
    if (spec.kind == PerturbationSpec::Kind::permutation) {
        if (!doc.contains("replicates") || !doc["replicates"].is_number_unsigned()) {
            throw data_error("permutation config must carry an unsigned \"replicates\"");
        }
        spec.num_permutations = doc["replicates"].get<std::size_t>();
    }
    if (doc.contains("erasure_value")) {
        spec.erasure_value = doc["erasure_value"].get<double>();
    }
    spec.seed = seed;
    return spec;
}

json parse_json_document(const std::string& content, const char* what) {
    json doc = json::parse(content, nullptr, false);
    if (doc.is_discarded()) {
        throw data_error(std::string("malformed JSON in ") + what);
    }
    return doc;
}

std::string dot_escape(const std::string& name) {
    std::string out;
    for (char c : name) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

}  // namespace

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw invalid_argument_error("cannot open file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw invalid_argument_error("cannot open '" + path + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw invalid_argument_error("failed writing '" + path + "'");
}

Dataset parse_dataset_csv(const std::string& content) {
    const std::vector<std::string> lines = split_lines(content);
    if (lines.empty()) throw data_error("dataset CSV is empty");

    const std::vector<std::string> header = split_fields(lines[0]);
    long target_column = -1;
    std::vector<std::string> names;
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (header[j] == "__target__") {
            if (target_column >= 0) throw data_error("multiple __target__ columns");
            target_column = static_cast<long>(j);
        } else {
            if (header[j].empty()) {
                throw data_error("empty column name in CSV header at position " +
                                 std::to_string(j));
            }
            names.push_back(header[j]);
        }
    }
    for (std::size_t a = 0; a < names.size(); ++a) {
        for (std::size_t b = a + 1; b < names.size(); ++b) {
            if (names[a] == names[b]) {
                throw data_error("duplicate column name '" + names[a] + "' in CSV header");
            }
        }
    }
    const std::size_t n = names.size();
    if (n == 0) throw data_error("dataset CSV has no feature columns");
    const std::size_t m = lines.size() - 1;
    if (m == 0) throw data_error("dataset CSV has a header but no rows");

    Dataset data;
    data.X = Matrix(m, n);
    data.column_names = names;
    if (target_column >= 0) data.y.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        const std::vector<std::string> fields = split_fields(lines[i + 1]);
        if (fields.size() != header.size()) {
            throw data_error("row on line " + std::to_string(i + 2) + " has " +
                             std::to_string(fields.size()) + " cells, expected " +
                             std::to_string(header.size()));
        }
        std::size_t jj = 0;
        for (std::size_t j = 0; j < fields.size(); ++j) {
            const double v = parse_cell(fields[j], i + 2);
            if (static_cast<long>(j) == target_column) {
                data.y[i] = v;
            } else {
                data.X.at(i, jj++) = v;
            }
        }
    }
    return data;
}

std::vector<double> parse_targets(const std::string& content) {
    std::vector<double> out;
    const std::vector<std::string> lines = split_lines(content);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        out.push_back(parse_cell(lines[i], i + 1));
    }
    if (out.empty()) throw data_error("targets file contains no values");
    return out;
}

Dataset load_dataset_file(const std::string& path, const std::string& targets_path) {
    Dataset data = parse_dataset_csv(read_file(path));
    if (!targets_path.empty()) {
        if (!data.y.empty()) {
            throw invalid_argument_error(
                "targets supplied twice: '" + path + "' has a __target__ column and --targets '" +
                targets_path + "' was given");
        }
        data.y = parse_targets(read_file(targets_path));
        if (data.y.size() != data.size()) {
            throw data_error("targets file '" + targets_path + "' has " +
                             std::to_string(data.y.size()) + " values for " +
                             std::to_string(data.size()) + " rows");
        }
    }
    return data;
}

std::string dataset_to_csv(const Dataset& data) {
    std::ostringstream out;
    for (std::size_t j = 0; j < data.arity(); ++j) {
        if (j) out << ',';
        out << (data.column_names.empty() ? "f" + std::to_string(j) : data.column_names[j]);
    }
    const bool with_targets = !data.y.empty();
    if (with_targets) out << ",__target__";
    out << '\n';
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (std::size_t j = 0; j < data.arity(); ++j) {
            if (j) out << ',';
            out << fmt_double(data.X.at(i, j));
        }
        if (with_targets) out << ',' << fmt_double(data.y[i]);
        out << '\n';
    }
    return out.str();
}

namespace {

json config_to_json(const AnalysisConfig& config) {
    json out;
    out["q"] = config.q;
    out["perturbation"] = spec_to_json(config.perturbation);
    out["seed"] = config.perturbation.seed;
    out["loss"] = loss_name(config.loss);
    out["tail"] = config.tail == Tail::greater ? "greater" : "two_sided";
    out["lazy"] = config.lazy;
    return out;
}

AnalysisConfig config_from_json(const json& doc) {
    if (!doc.is_object() || !doc.contains("q") || !doc.contains("perturbation") ||
        !doc.contains("seed") || !doc.contains("loss")) {
        throw data_error("report config must carry q, perturbation, seed, and loss");
    }
    AnalysisConfig config;
    config.q = doc["q"].get<double>();
    config.perturbation = spec_from_json(doc["perturbation"], doc["seed"].get<std::uint64_t>());
    config.loss = loss_from_name(doc["loss"].get<std::string>());
    if (doc.contains("tail")) {
        const std::string tail = doc["tail"].get<std::string>();
        if (tail == "greater") {
            config.tail = Tail::greater;
        } else if (tail == "two_sided") {
            config.tail = Tail::two_sided;
        } else {
            throw data_error("unknown tail '" + tail + "' in report config");
        }
    }
    if (doc.contains("lazy")) config.lazy = doc["lazy"].get<bool>();
    return config;
}

}  // namespace

std::string report_to_json(const ImportanceReport& report, const FeatureHierarchy& hierarchy) {
    if (report.nodes.size() != hierarchy.size()) {
        throw invalid_argument_error("report and hierarchy node counts differ");
    }
    json doc;
    doc["config"] = config_to_json(report.config);

    std::vector<bool> outer_flag(hierarchy.size(), false);
    for (std::size_t id : report.outer) outer_flag[id] = true;

    json nodes = json::array();
    for (std::size_t id = 0; id < hierarchy.size(); ++id) {
        const HierarchyNode& node = hierarchy.node(id);
        const NodeTestRecord& record = report.nodes[id];
        json jn;
        jn["id"] = id;
        jn["name"] = node.name;
        jn["parent"] = node.parent ? json(hierarchy.node(*node.parent).name) : json(nullptr);
        jn["leaf"] = node.is_leaf();
        jn["tested"] = record.tested;
        if (record.tested) {
            jn["p_value"] = record.test.p_value;
            jn["statistic"] = record.test.statistic;
            jn["n_effective"] = record.test.n_effective;
            jn["effect_size"] = record.test.effect_size;
            jn["mean_baseline_loss"] = record.mean_baseline_loss;
            jn["mean_perturbed_loss"] = record.mean_perturbed_loss;
            jn["auroc_perturbed"] =
                record.auroc_perturbed ? json(*record.auroc_perturbed) : json(nullptr);
        }
        jn["rejected"] = report.rejected.contains(id);
        jn["outer"] = static_cast<bool>(outer_flag[id]);
        nodes.push_back(std::move(jn));
    }
    doc["nodes"] = std::move(nodes);

    json outer = json::array();
    for (std::size_t id : report.outer) outer.push_back(hierarchy.node(id).name);
    doc["outer_nodes"] = std::move(outer);

    json summary;
    summary["total_nodes"] = report.summary.total_nodes;
    summary["tested_nodes"] = report.summary.tested_nodes;
    summary["unadjusted_significant_nodes"] = report.summary.unadjusted_significant;
    summary["rejected_nodes"] = report.summary.rejected_nodes;
    summary["outer_nodes"] = report.summary.outer_nodes;
    summary["outer_feature_groups"] = report.summary.outer_groups;
    doc["summary"] = std::move(summary);

    return doc.dump(2) + "\n";
}

ImportanceReport report_from_json(const std::string& content,
                                  const FeatureHierarchy& hierarchy) {
    const json doc = parse_json_document(content, "importance report");
    if (!doc.is_object() || !doc.contains("config") || !doc.contains("nodes") ||
        !doc["nodes"].is_array()) {
        throw data_error("importance report must carry config and a nodes array");
    }
    if (doc["nodes"].size() != hierarchy.size()) {
        throw data_error("report lists " + std::to_string(doc["nodes"].size()) +
                         " nodes but the hierarchy has " + std::to_string(hierarchy.size()));
    }

    ImportanceReport report;
    report.config = config_from_json(doc["config"]);
    report.nodes.resize(hierarchy.size());

    for (const json& jn : doc["nodes"]) {
        if (!jn.is_object() || !jn.contains("name") || !jn["name"].is_string()) {
            throw data_error("report node entry lacks a name");
        }
        const std::string name = jn["name"].get<std::string>();
        const auto id = hierarchy.find(name);
        if (!id) {
            throw data_error("report node '" + name + "' does not exist in the hierarchy");
        }
        NodeTestRecord& record = report.nodes[*id];
        record.node_id = *id;
        record.tested = jn.value("tested", false);
        if (record.tested) {
            record.test.p_value = jn.at("p_value").get<double>();
            record.test.statistic = jn.at("statistic").get<double>();
            record.test.n_effective = jn.at("n_effective").get<std::size_t>();
            record.test.effect_size = jn.at("effect_size").get<double>();
            record.mean_baseline_loss = jn.value("mean_baseline_loss", 0.0);
            record.mean_perturbed_loss = jn.value("mean_perturbed_loss", 0.0);
            if (jn.contains("auroc_perturbed") && jn["auroc_perturbed"].is_number()) {
                record.auroc_perturbed = jn["auroc_perturbed"].get<double>();
            }
        }
        if (jn.value("rejected", false)) {
            report.rejected.nodes.push_back(*id);
            report.rejected.results.emplace(*id, record.test);
        }
    }
    std::sort(report.rejected.nodes.begin(), report.rejected.nodes.end());
    report.outer = outer_nodes(hierarchy, report.rejected);

    report.summary.total_nodes = hierarchy.size();
    for (const NodeTestRecord& record : report.nodes) {
        if (!record.tested) continue;
        ++report.summary.tested_nodes;
        if (record.test.p_value < 0.05) ++report.summary.unadjusted_significant;
    }
    report.summary.rejected_nodes = report.rejected.nodes.size();
    report.summary.outer_nodes = report.outer.size();
    for (std::size_t id : report.outer) {
        if (!hierarchy.node(id).is_leaf()) ++report.summary.outer_groups;
    }
    return report;
}

std::string summary_table_text(const ImportanceReport& report,
                               const FeatureHierarchy& hierarchy) {
    (void)hierarchy;
    std::ostringstream out;
    const auto row = [&](const char* label, std::size_t value) {
        out << std::left << std::setw(38) << label << std::right << std::setw(8) << value
            << '\n';
    };
    row("total nodes", report.summary.total_nodes);
    row("tested nodes", report.summary.tested_nodes);
    row("nodes with unadjusted p < 0.05", report.summary.unadjusted_significant);
    row("nodes identified as important", report.summary.rejected_nodes);
    row("outer nodes", report.summary.outer_nodes);
    row("outer nodes that are feature groups", report.summary.outer_groups);
    return out.str();
}

std::string interactions_to_json(const InteractionAnalysis& analysis,
                                 const FeatureHierarchy& hierarchy) {
    json doc;
    json config;
    config["q"] = analysis.q;
    config["perturbation"] = spec_to_json(analysis.spec);
    config["seed"] = analysis.spec.seed;
    config["loss_based"] = analysis.loss_based;
    if (analysis.loss_based) config["loss"] = loss_name(analysis.loss);
    doc["config"] = std::move(config);
    doc["candidates_tested"] = analysis.results.size();
    doc["rejected"] = analysis.rejected_count;

    json rows = json::array();
    for (const InteractionResult& result : analysis.results) {
        json jr;
        jr["node_a"] = hierarchy.node(result.candidate.node_a).name;
        jr["node_b"] = hierarchy.node(result.candidate.node_b).name;
        jr["p_value"] = result.test.p_value;
        jr["statistic"] = result.test.statistic;
        jr["n_effective"] = result.test.n_effective;
        jr["effect_size"] = result.test.effect_size;
        jr["rejected"] = result.rejected;
        rows.push_back(std::move(jr));
    }
    doc["interactions"] = std::move(rows);
    return doc.dump(2) + "\n";
}

namespace {

json experiment_config_to_json(const ExperimentConfig& config) {
    json out;
    out["vary"] = vary_name(config.vary);
    out["grid"] = config.grid;
    out["replicates"] = config.replicates;
    out["n_features"] = config.n_features;
    out["n_linear"] = config.n_linear;
    out["n_interactions"] = config.n_interactions;
    out["m"] = config.m;
    out["sigma"] = config.sigma;
    out["bernoulli_p"] = config.bernoulli_p;
    out["q"] = config.q;
    out["seed"] = config.seed;
    return out;
}

}  // namespace

std::string experiment_to_json(const ExperimentConfig& config,
                               std::span<const ExperimentCell> cells) {
    json doc;
    doc["config"] = experiment_config_to_json(config);
    json rows = json::array();
    for (const ExperimentCell& cell : cells) {
        json jc;
        jc["grid_value"] = cell.grid_value;
        const auto metric = [](double mean, double se) {
            json m;
            m["mean"] = mean;
            m["se"] = se;
            return m;
        };
        jc["feature_fdr"] = metric(cell.mean.feature_fdr, cell.se.feature_fdr);
        jc["feature_power"] = metric(cell.mean.feature_power, cell.se.feature_power);
        jc["interaction_fdr"] = metric(cell.mean.interaction_fdr, cell.se.interaction_fdr);
        jc["interaction_power"] =
            metric(cell.mean.interaction_power, cell.se.interaction_power);
        rows.push_back(std::move(jc));
    }
    doc["cells"] = std::move(rows);
    return doc.dump(2) + "\n";
}

std::string experiment_to_text(const ExperimentConfig& config,
                               std::span<const ExperimentCell> cells) {
    std::ostringstream out;
    out << "# sweep over " << vary_name(config.vary) << ", " << config.replicates
        << " replicates per point\n";
    out << "# fixed:";
    if (config.vary == ExperimentConfig::Vary::sigma) {
        out << " m = " << config.m << ",";
    } else {
        out << " sigma = " << fmt_double(config.sigma) << ",";
    }
    out << " n_features = " << config.n_features << ", n_linear = " << config.n_linear
        << ", n_interactions = " << config.n_interactions
        << ", bernoulli_p = " << fmt_double(config.bernoulli_p)
        << ", q = " << fmt_double(config.q) << ", seed = " << config.seed << "\n";

    const int wide = 18;
    out << std::left << std::setw(10) << vary_name(config.vary) << std::setw(wide)
        << "feature_fdr" << std::setw(wide) << "feature_power" << std::setw(wide)
        << "interaction_fdr" << std::setw(wide) << "interaction_power" << '\n';
    for (const ExperimentCell& cell : cells) {
        const auto metric = [](double mean, double se) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.3f +/- %.3f", mean, se);
            return std::string(buf);
        };
        out << std::left << std::setw(10) << fmt_double(cell.grid_value) << std::setw(wide)
            << metric(cell.mean.feature_fdr, cell.se.feature_fdr) << std::setw(wide)
            << metric(cell.mean.feature_power, cell.se.feature_power) << std::setw(wide)
            << metric(cell.mean.interaction_fdr, cell.se.interaction_fdr) << std::setw(wide)
            << metric(cell.mean.interaction_power, cell.se.interaction_power) << '\n';
    }
    return out.str();
}

std::string export_dot(const FeatureHierarchy& hierarchy, const ImportanceReport& report) {
    if (report.nodes.size() != hierarchy.size()) {
        throw invalid_argument_error("report and hierarchy node counts differ");
    }
    std::vector<bool> drawn(hierarchy.size(), false);
    for (std::size_t id = 0; id < hierarchy.size(); ++id) {
        if (report.nodes[id].tested) {
            drawn[id] = true;
        } else if (const auto parent = hierarchy.node(id).parent;
                   parent && report.nodes[*parent].tested) {
            drawn[id] = true;  // frontier marker where the descent stopped
        }
    }

    std::ostringstream out;
    out << "digraph importance {\n";
    out << "  rankdir=TB;\n";
    out << "  node [fontname=\"Helvetica\", style=filled, fillcolor=white];\n";
    for (std::size_t id = 0; id < hierarchy.size(); ++id) {
        if (!drawn[id]) continue;
        const HierarchyNode& node = hierarchy.node(id);
        const NodeTestRecord& record = report.nodes[id];
        out << "  n" << id << " [";
        if (!record.tested) {
            out << "shape=triangle, fillcolor=lightgray, label=\"" << dot_escape(node.name)
                << "\"";
        } else {
            out << "shape=" << (node.is_leaf() ? "box" : "ellipse");
            if (report.rejected.contains(id)) {
                const double p = std::max(record.test.p_value, 1e-300);
                const double t = std::min(1.0, -std::log10(p) / 10.0);
                // White fades toward firebrick as the evidence strengthens.
                const int r = static_cast<int>(std::lround(255.0 + (178.0 - 255.0) * t));
                const int g = static_cast<int>(std::lround(255.0 + (34.0 - 255.0) * t));
                const int b = static_cast<int>(std::lround(255.0 + (34.0 - 255.0) * t));
                char color[16];
                std::snprintf(color, sizeof(color), "#%02x%02x%02x", r, g, b);
                out << ", fillcolor=\"" << color << "\"";
                if (t > 0.55) out << ", fontcolor=white";
            }
            char pbuf[32];
            std::snprintf(pbuf, sizeof(pbuf), "%.3g", record.test.p_value);
            out << ", label=\"" << dot_escape(node.name) << "\\np=" << pbuf << "\"";
        }
        out << "];\n";
    }
    for (std::size_t id = 0; id < hierarchy.size(); ++id) {
        if (!drawn[id]) continue;
        for (std::size_t child : hierarchy.node(id).children) {
            if (drawn[child]) {
                out << "  n" << id << " -> n" << child << ";\n";
            }
        }
    }
    out << "}\n";
    return out.str();
}

std::string synthetic_model_to_json(const SyntheticModel& model) {
    json doc;
    doc["n_features"] = model.truth().n_features;
    doc["sigma"] = model.sigma();
    doc["noise_seed"] = model.noise_seed();
    json linear = json::array();
    for (const LinearTerm& term : model.truth().linear) {
        json jt;
        jt["feature"] = term.feature;
        jt["coefficient"] = term.coefficient;
        linear.push_back(std::move(jt));
    }
    doc["linear"] = std::move(linear);
    json interactions = json::array();
    for (const InteractionTerm& term : model.truth().interactions) {
        json jt;
        jt["a"] = term.a;
        jt["b"] = term.b;
        jt["coefficient"] = term.coefficient;
        interactions.push_back(std::move(jt));
    }
    doc["interactions"] = std::move(interactions);
    return doc.dump(2) + "\n";
}

std::shared_ptr<SyntheticModel> synthetic_model_from_json(const std::string& content) {
    const json doc = parse_json_document(content, "synthetic model");
    if (!doc.is_object() || !doc.contains("n_features") ||
        !doc["n_features"].is_number_unsigned()) {
        throw data_error("synthetic model must carry an unsigned \"n_features\"");
    }
    GroundTruth truth;
    truth.n_features = doc["n_features"].get<std::size_t>();
    double sigma = 0.0;
    std::uint64_t noise_seed = 0;
    if (doc.contains("sigma")) {
        if (!doc["sigma"].is_number()) throw data_error("\"sigma\" must be a number");
        sigma = doc["sigma"].get<double>();
    }
    if (doc.contains("noise_seed")) {
        if (!doc["noise_seed"].is_number_unsigned()) {
            throw data_error("\"noise_seed\" must be unsigned");
        }
        noise_seed = doc["noise_seed"].get<std::uint64_t>();
    }
    try {
        if (doc.contains("linear")) {
            for (const json& jt : doc.at("linear")) {
                truth.linear.push_back(
                    {jt.at("feature").get<std::size_t>(), jt.at("coefficient").get<double>()});
            }
        }
        if (doc.contains("interactions")) {
            for (const json& jt : doc.at("interactions")) {
                truth.interactions.push_back({jt.at("a").get<std::size_t>(),
                                              jt.at("b").get<std::size_t>(),
                                              jt.at("coefficient").get<double>()});
            }
        }
    } catch (const json::exception& e) {
        throw data_error(std::string("malformed synthetic model terms: ") + e.what());
    }
    try {
        return std::make_shared<SyntheticModel>(std::move(truth), sigma, noise_seed);
    } catch (const Error& e) {
        throw data_error(std::string("invalid synthetic model: ") + e.what());
    }
}

std::shared_ptr<SyntheticModel> load_synthetic_model_file(const std::string& path) {
    return synthetic_model_from_json(read_file(path));
}

std::string linkage_to_csv(const ClusterResult& result) {
    std::ostringstream out;
    out << "left,right,merged,distance_bits\n";
    for (const LinkageStep& step : result.steps) {
        out << result.hierarchy.node(step.left_cluster).name << ','
            << result.hierarchy.node(step.right_cluster).name << ','
            << result.hierarchy.node(step.merged).name << ',' << step.distance << '\n';
    }
    return out.str();
}

}  // namespace featsig
