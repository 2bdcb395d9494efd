#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "featsig/adapter.hpp"
#include "featsig/cluster.hpp"
#include "featsig/errors.hpp"
#include "featsig/hierarchy.hpp"
#include "featsig/importance.hpp"
#include "featsig/interactions.hpp"
#include "featsig/io.hpp"
#include "featsig/model.hpp"
#include "featsig/rng.hpp"
#include "featsig/synth.hpp"

namespace {

using namespace featsig;

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::invalid_argument: return 2;
        case ErrorKind::data: return 3;
        case ErrorKind::protocol: return 4;
        case ErrorKind::internal: return 5;
    }
    return 5;
}

Tail tail_from_name(const std::string& name) {
    if (name == "greater") return Tail::greater;
    if (name == "two_sided") return Tail::two_sided;
    throw invalid_argument_error("unknown tail '" + name + "' (use greater or two_sided)");
}

struct ModelOptions {
    std::string synthetic_path;
    std::string adapter_command;
};

void add_model_options(CLI::App& cmd, ModelOptions& opts) {
    cmd.add_option("--synthetic-model", opts.synthetic_path,
                   "Synthetic model document (JSON)");
    cmd.add_option("--adapter", opts.adapter_command,
                   "Shell command speaking the line-based adapter protocol");
}

std::shared_ptr<ModelHandle> open_model(const ModelOptions& opts) {
    const bool have_synth = !opts.synthetic_path.empty();
    const bool have_adapter = !opts.adapter_command.empty();
    if (have_synth == have_adapter) {
        throw invalid_argument_error(
            "exactly one of --synthetic-model and --adapter is required");
    }
    if (have_synth) return load_synthetic_model_file(opts.synthetic_path);
    return std::make_shared<ExternalAdapterModel>(opts.adapter_command);
}

struct PerturbOptions {
    std::string kind = "permutation";
    std::size_t num_permutations = 500;
    double erasure_value = 0.0;
};

void add_perturb_options(CLI::App& cmd, PerturbOptions& opts) {
    cmd.add_option("--perturbation", opts.kind, "permutation, erasure, or flip")
        ->capture_default_str();
    cmd.add_option("--num-permutations", opts.num_permutations,
                   "Replicates for the permutation perturbation")
        ->capture_default_str();
    cmd.add_option("--erasure-value", opts.erasure_value,
                   "Substituted value for the erasure perturbation")
        ->capture_default_str();
}

PerturbationSpec make_spec(const PerturbOptions& opts, std::uint64_t seed) {
    PerturbationSpec spec;
    spec.kind = perturbation_kind_from_name(opts.kind);
    spec.num_permutations = opts.num_permutations;
    spec.erasure_value = opts.erasure_value;
    spec.seed = seed;
    return spec;
}

struct AnalyzeOptions {
    std::string data_path;
    std::string targets_path;
    std::string hierarchy_path;
    ModelOptions model;
    PerturbOptions perturb;
    double q = 0.05;
    std::uint64_t seed = 0;
    std::string loss = "squared_error";
    std::string tail = "greater";
    bool lazy = false;
    std::size_t workers = 1;
    std::string out_path;
    std::string dot_path;
};

int run_analyze(const AnalyzeOptions& opts) {
    const Dataset data = load_dataset_file(opts.data_path, opts.targets_path);
    if (data.y.empty()) {
        throw data_error("dataset '" + opts.data_path +
                         "' has no targets: add a __target__ column or pass --targets");
    }
    const FeatureHierarchy hierarchy = load_hierarchy_file(opts.hierarchy_path);
    const std::shared_ptr<ModelHandle> model = open_model(opts.model);

    AnalysisConfig config;
    config.q = opts.q;
    config.perturbation = make_spec(opts.perturb, opts.seed);
    config.loss = loss_from_name(opts.loss);
    config.tail = tail_from_name(opts.tail);
    config.lazy = opts.lazy;
    config.workers = opts.workers;

    const ImportanceReport report = analyze(*model, data, hierarchy, config);
    write_file(opts.out_path, report_to_json(report, hierarchy));
    if (!opts.dot_path.empty()) {
        write_file(opts.dot_path, export_dot(hierarchy, report));
    }
    std::cout << summary_table_text(report, hierarchy);
    return 0;
}

struct InteractOptions {
    std::string data_path;
    std::string targets_path;
    std::string hierarchy_path;
    ModelOptions model;
    PerturbOptions perturb;
    double q = 0.05;
    std::uint64_t seed = 0;
    std::string loss = "squared_error";
    bool loss_based = false;
    std::size_t workers = 1;
    std::string report_path;
    std::vector<std::string> node_names;
    std::string out_path;
};

int run_interact(const InteractOptions& opts) {
    const Dataset data = load_dataset_file(opts.data_path, opts.targets_path);
    const FeatureHierarchy hierarchy = load_hierarchy_file(opts.hierarchy_path);
    const std::shared_ptr<ModelHandle> model = open_model(opts.model);

    std::vector<std::size_t> node_ids;
    if (!opts.node_names.empty()) {
        for (const std::string& name : opts.node_names) {
            const auto id = hierarchy.find(name);
            if (!id) {
                throw invalid_argument_error("--nodes names unknown node '" + name + "'");
            }
            node_ids.push_back(*id);
        }
    } else if (!opts.report_path.empty()) {
        const ImportanceReport prior =
            report_from_json(read_file(opts.report_path), hierarchy);
        node_ids = prior.outer;
    } else {
        throw invalid_argument_error("interact needs --report or --nodes to pick candidates");
    }

    const std::vector<InteractionCandidate> candidates = candidate_pairs(hierarchy, node_ids);
    const InteractionAnalysis analysis = analyze_interactions(
        *model, data, hierarchy, candidates, opts.q, make_spec(opts.perturb, opts.seed),
        opts.workers, opts.loss_based, loss_from_name(opts.loss));
    write_file(opts.out_path, interactions_to_json(analysis, hierarchy));
    std::cout << "candidates tested: " << analysis.results.size()
              << "\ninteractions found: " << analysis.rejected_count << "\n";
    return 0;
}

struct SynthOptions {
    std::string vary = "sigma";
    std::vector<double> grid;
    std::size_t replicates = 25;
    std::size_t n_features = 500;
    std::size_t n_linear = 50;
    std::size_t n_interactions = 50;
    std::size_t m = 10000;
    double sigma = 0.05;
    double bernoulli_p = 0.5;
    double q = 0.05;
    std::uint64_t seed = 0;
    std::size_t workers = 1;
    std::string out_path;
    std::string text_path;
    std::string emit_dir;
    bool quiet = false;
};

int run_synth(const SynthOptions& opts) {
    if (!opts.emit_dir.empty()) {
        // One concrete case on disk, seeded like replicate 0 of grid point 0.
        const std::uint64_t seed_r = mix_seed(opts.seed, 0, 0);
        GroundTruth truth = generate_ground_truth(opts.n_features, opts.n_linear,
                                                  opts.n_interactions, mix_seed(seed_r, 1));
        const Dataset data =
            generate_instances(truth, opts.m, opts.bernoulli_p, mix_seed(seed_r, 2));
        const FeatureHierarchy hierarchy =
            build_random_hierarchy(opts.n_features, mix_seed(seed_r, 3));
        const SyntheticModel model(std::move(truth), opts.sigma, mix_seed(seed_r, 4));

        namespace fs = std::filesystem;
        std::error_code ec;
        fs::create_directories(opts.emit_dir, ec);
        if (ec) {
            throw invalid_argument_error("cannot create directory '" + opts.emit_dir +
                                         "': " + ec.message());
        }
        const fs::path dir(opts.emit_dir);
        write_file((dir / "model.json").string(), synthetic_model_to_json(model));
        write_file((dir / "data.csv").string(), dataset_to_csv(data));
        write_file((dir / "hierarchy.json").string(), hierarchy_to_json(hierarchy));
        std::cout << "wrote " << (dir / "model.json").string() << ", "
                  << (dir / "data.csv").string() << ", "
                  << (dir / "hierarchy.json").string() << "\n";
        return 0;
    }

    if (opts.grid.empty()) {
        throw invalid_argument_error("synth needs --grid (or --emit-case to write one case)");
    }
    if (opts.out_path.empty()) {
        throw invalid_argument_error("synth needs --out for the table document");
    }

    ExperimentConfig config;
    config.vary = vary_from_name(opts.vary);
    config.grid = opts.grid;
    config.replicates = opts.replicates;
    config.n_features = opts.n_features;
    config.n_linear = opts.n_linear;
    config.n_interactions = opts.n_interactions;
    config.m = opts.m;
    config.sigma = opts.sigma;
    config.bernoulli_p = opts.bernoulli_p;
    config.q = opts.q;
    config.seed = opts.seed;
    config.workers = opts.workers;

    std::mutex progress_mutex;
    std::size_t finished = 0;
    const std::size_t total = config.grid.size() * config.replicates;
    if (!opts.quiet) {
        config.on_replicate = [&](std::size_t, std::size_t) {
            const std::lock_guard<std::mutex> lock(progress_mutex);
            ++finished;
            std::fprintf(stderr, "replicates finished: %zu/%zu\n", finished, total);
        };
    }

    const std::vector<ExperimentCell> cells = run_experiment(config);
    write_file(opts.out_path, experiment_to_json(config, cells));
    const std::string text = experiment_to_text(config, cells);
    if (!opts.text_path.empty()) write_file(opts.text_path, text);
    std::cout << text;
    return 0;
}

struct ClusterOptions {
    std::string data_path;
    std::string order_path;
    std::string out_path;
    std::string linkage_path;
    std::size_t cut = 0;
    bool cut_given = false;
};

int run_cluster(const ClusterOptions& opts) {
    const Dataset data = load_dataset_file(opts.data_path, "");

    std::vector<std::size_t> order;
    if (!opts.order_path.empty()) {
        const std::string content = read_file(opts.order_path);
        std::istringstream in(content);
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            std::size_t col = data.arity();
            for (std::size_t j = 0; j < data.column_names.size(); ++j) {
                if (data.column_names[j] == line) {
                    col = j;
                    break;
                }
            }
            if (col == data.arity()) {
                try {
                    col = static_cast<std::size_t>(std::stoul(line));
                } catch (const std::exception&) {
                    throw data_error("order file names unknown column '" + line + "'");
                }
            }
            order.push_back(col);
        }
    }

    const ClusterResult result = constrained_cluster(data.X, order, data.column_names);

    nlohmann::ordered_json doc;
    nlohmann::ordered_json config;
    config["input"] = opts.data_path;
    config["order"] =
        opts.order_path.empty() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(opts.order_path);
    config["cut"] = opts.cut_given ? nlohmann::ordered_json(opts.cut)
                                   : nlohmann::ordered_json(nullptr);
    doc["config"] = std::move(config);
    doc["nodes"] = nlohmann::ordered_json::parse(hierarchy_to_json(result.hierarchy));
    write_file(opts.out_path, doc.dump(2) + "\n");

    if (!opts.linkage_path.empty()) {
        write_file(opts.linkage_path, linkage_to_csv(result));
    }
    if (opts.cut_given) {
        const std::vector<std::vector<std::size_t>> clusters = cut_clusters(result, opts.cut);
        for (std::size_t k = 0; k < clusters.size(); ++k) {
            std::cout << "cluster " << k << ":";
            for (const std::size_t col : clusters[k]) {
                std::cout << ' '
                          << (data.column_names.empty() ? "f" + std::to_string(col)
                                                        : data.column_names[col]);
            }
            std::cout << '\n';
        }
    }
    return 0;
}

struct ExportDotOptions {
    std::string hierarchy_path;
    std::string report_path;
    std::string out_path;
};

int run_export_dot(const ExportDotOptions& opts) {
    const FeatureHierarchy hierarchy = load_hierarchy_file(opts.hierarchy_path);
    const ImportanceReport report = report_from_json(read_file(opts.report_path), hierarchy);
    write_file(opts.out_path, export_dot(hierarchy, report));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Feature and interaction significance analysis for learned models"};
    app.require_subcommand(1);

    AnalyzeOptions analyze_opts;
    CLI::App* analyze_cmd = app.add_subcommand(
        "analyze", "Identify important features and feature groups in a model");
    analyze_cmd->add_option("--data", analyze_opts.data_path, "Dataset CSV")->required();
    analyze_cmd->add_option("--targets", analyze_opts.targets_path,
                            "Targets file, one value per line");
    analyze_cmd->add_option("--hierarchy", analyze_opts.hierarchy_path,
                            "Feature hierarchy document")
        ->required();
    add_model_options(*analyze_cmd, analyze_opts.model);
    add_perturb_options(*analyze_cmd, analyze_opts.perturb);
    analyze_cmd->add_option("--q", analyze_opts.q, "FDR level")->capture_default_str();
    analyze_cmd->add_option("--seed", analyze_opts.seed, "Perturbation seed")
        ->capture_default_str();
    analyze_cmd->add_option("--loss", analyze_opts.loss,
                            "squared_error or binary_cross_entropy")
        ->capture_default_str();
    analyze_cmd->add_option("--tail", analyze_opts.tail, "greater or two_sided")
        ->capture_default_str();
    analyze_cmd->add_flag("--lazy", analyze_opts.lazy,
                          "Test nodes only as the selection descends to them");
    analyze_cmd->add_option("--workers", analyze_opts.workers, "Worker threads")
        ->capture_default_str();
    analyze_cmd->add_option("--out", analyze_opts.out_path, "Report output path")->required();
    analyze_cmd->add_option("--dot", analyze_opts.dot_path, "Graphviz output path");

    InteractOptions interact_opts;
    CLI::App* interact_cmd = app.add_subcommand(
        "interact", "Test pairwise interactions between feature groups");
    interact_cmd->add_option("--data", interact_opts.data_path, "Dataset CSV")->required();
    interact_cmd->add_option("--targets", interact_opts.targets_path,
                             "Targets file, one value per line");
    interact_cmd->add_option("--hierarchy", interact_opts.hierarchy_path,
                             "Feature hierarchy document")
        ->required();
    add_model_options(*interact_cmd, interact_opts.model);
    add_perturb_options(*interact_cmd, interact_opts.perturb);
    interact_cmd->add_option("--q", interact_opts.q, "FDR level")->capture_default_str();
    interact_cmd->add_option("--seed", interact_opts.seed, "Perturbation seed")
        ->capture_default_str();
    interact_cmd
        ->add_option("--loss", interact_opts.loss, "Loss for --loss-based contrasts")
        ->capture_default_str();
    interact_cmd->add_flag("--loss-based", interact_opts.loss_based,
                           "Compare losses instead of pre-transfer outputs");
    interact_cmd->add_option("--workers", interact_opts.workers, "Worker threads")
        ->capture_default_str();
    interact_cmd->add_option("--report", interact_opts.report_path,
                             "Importance report whose outer nodes become candidates");
    interact_cmd
        ->add_option("--nodes", interact_opts.node_names,
                     "Explicit comma-separated node names to pair up")
        ->delimiter(',');
    interact_cmd->add_option("--out", interact_opts.out_path, "Interaction report path")
        ->required();

    SynthOptions synth_opts;
    CLI::App* synth_cmd = app.add_subcommand(
        "synth", "Synthetic ground-truth experiments: FDR and power tables");
    synth_cmd->add_option("--vary", synth_opts.vary, "Swept parameter: m or sigma")
        ->capture_default_str();
    synth_cmd->add_option("--grid", synth_opts.grid, "Comma-separated grid values")
        ->delimiter(',');
    synth_cmd->add_option("--replicates", synth_opts.replicates, "Replicates per grid point")
        ->capture_default_str();
    synth_cmd->add_option("--n-features", synth_opts.n_features, "Total features")
        ->capture_default_str();
    synth_cmd->add_option("--n-linear", synth_opts.n_linear, "Features with linear terms")
        ->capture_default_str();
    synth_cmd
        ->add_option("--n-interactions", synth_opts.n_interactions, "Interacting pairs")
        ->capture_default_str();
    synth_cmd->add_option("--m", synth_opts.m, "Instances per dataset (sigma sweeps)")
        ->capture_default_str();
    synth_cmd->add_option("--sigma", synth_opts.sigma, "Model noise scale (m sweeps)")
        ->capture_default_str();
    synth_cmd->add_option("--bernoulli-p", synth_opts.bernoulli_p, "P(feature = 1)")
        ->capture_default_str();
    synth_cmd->add_option("--q", synth_opts.q, "FDR level")->capture_default_str();
    synth_cmd->add_option("--seed", synth_opts.seed, "Experiment seed")
        ->capture_default_str();
    synth_cmd->add_option("--workers", synth_opts.workers, "Worker threads")
        ->capture_default_str();
    synth_cmd->add_option("--out", synth_opts.out_path, "Table document path (JSON)");
    synth_cmd->add_option("--text", synth_opts.text_path, "Aligned text table path");
    synth_cmd->add_option("--emit-case", synth_opts.emit_dir,
                          "Write one model/data/hierarchy case into a directory instead");
    synth_cmd->add_flag("--quiet", synth_opts.quiet, "Suppress per-replicate progress");

    ClusterOptions cluster_opts;
    CLI::App* cluster_cmd = app.add_subcommand(
        "cluster", "Build a feature hierarchy from a binary matrix");
    cluster_cmd->add_option("--data", cluster_opts.data_path, "Dataset CSV")->required();
    cluster_cmd->add_option("--order", cluster_opts.order_path,
                            "Column order file, one column per line");
    cluster_cmd->add_option("--out", cluster_opts.out_path, "Hierarchy output path")
        ->required();
    cluster_cmd->add_option("--linkage", cluster_opts.linkage_path,
                            "Merge-step CSV output path");
    CLI::Option* cut_option = cluster_cmd->add_option(
        "--cut", cluster_opts.cut, "Print flat clusters within this bit difference");

    ExportDotOptions dot_opts;
    CLI::App* dot_cmd = app.add_subcommand(
        "export-dot", "Render an analyzed hierarchy as a Graphviz document");
    dot_cmd->add_option("--hierarchy", dot_opts.hierarchy_path, "Feature hierarchy document")
        ->required();
    dot_cmd->add_option("--report", dot_opts.report_path, "Importance report JSON")
        ->required();
    dot_cmd->add_option("--out", dot_opts.out_path, "DOT output path")->required();

    try {
        app.parse(argc, argv);
        cluster_opts.cut_given = cut_option->count() > 0;
        if (analyze_cmd->parsed()) return run_analyze(analyze_opts);
        if (interact_cmd->parsed()) return run_interact(interact_opts);
        if (synth_cmd->parsed()) return run_synth(synth_opts);
        if (cluster_cmd->parsed()) return run_cluster(cluster_opts);
        if (dot_cmd->parsed()) return run_export_dot(dot_opts);
        std::cerr << "no subcommand selected\n";
        return 2;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const featsig::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 5;
    }
}
