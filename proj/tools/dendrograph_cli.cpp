// Command-line front end: cluster / score / cut / reconstruct / oracle.
// Structured results go to stdout as JSON (12 significant digits),
// human-readable diagnostics to stderr. Exit codes: 0 success, 2
// usage/validation error, 3 disconnected graph.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "dendrograph/clustering.hpp"
#include "dendrograph/dendrogram.hpp"
#include "dendrograph/graph.hpp"
#include "dendrograph/metrics.hpp"
#include "dendrograph/numformat.hpp"
#include "dendrograph/oracle.hpp"
#include "dendrograph/reconstruction.hpp"

namespace {

using namespace dendrograph;

struct RunConfig {
  std::string input;       // edge list; "-" = stdin
  std::string dendrogram;  // dendrogram JSON; "-" = stdin
  std::string output;      // "" or "-" = stdout
  std::string prior = "degree";
  std::string prior_file;
  bool quiet = false;
  bool drop_self_loops = false;

  std::string algorithm = "nn-chain";
  bool reoptimize = false;
  std::optional<int> cut_k_value;
  std::optional<double> cut_height_value;
  std::optional<double> gamma;
  double threshold = 0.0;
  std::string objective = "kl";
};

std::string read_stream_or_file(const std::string& path, const char* what) {
  if (path == "-") {
    std::ostringstream buffer;
    buffer << std::cin.rdbuf();
    return buffer.str();
  }
  std::ifstream in(path);
  if (!in) throw ValidationError(std::string("cannot open ") + what + " file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_output(const RunConfig& config, const std::string& text) {
  if (config.output.empty() || config.output == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(config.output);
  if (!out) throw ValidationError("cannot open output file '" + config.output + "'");
  out << text;
}

WeightedGraph load_graph(const RunConfig& config) {
  if (config.input.empty()) throw ValidationError("this command needs --input");
  const std::string text = read_stream_or_file(config.input, "input");
  return WeightedGraph::parse_edge_list(text, ParseOptions{config.drop_self_loops});
}

Dendrogram load_dendrogram(const RunConfig& config) {
  if (config.dendrogram.empty()) throw ValidationError("this command needs --dendrogram");
  return dendrogram_from_json(read_stream_or_file(config.dendrogram, "dendrogram"));
}

std::vector<double> read_prior_file(const std::string& path,
                                    const std::vector<std::string>& labels) {
  const std::string text = read_stream_or_file(path, "prior");
  std::istringstream in(text);
  std::vector<double> values(labels.size(), 0.0);
  std::vector<char> seen(labels.size(), 0);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string label;
    double value;
    if (!(fields >> label)) continue;
    if (!(fields >> value)) {
      throw ParseError("prior line " + std::to_string(line_no) + ": expected 'label value'");
    }
    auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end()) {
      throw ValidationError("prior line " + std::to_string(line_no) + ": unknown label '" +
                            label + "'");
    }
    const std::size_t id = static_cast<std::size_t>(it - labels.begin());
    if (seen[id]) {
      throw ValidationError("prior line " + std::to_string(line_no) + ": duplicate label '" +
                            label + "'");
    }
    seen[id] = 1;
    values[id] = value;
  }
  for (std::size_t u = 0; u < labels.size(); ++u) {
    if (!seen[u]) throw ValidationError("prior file has no value for label '" + labels[u] + "'");
  }
  return values;
}

// kind + optional file, after expanding the "custom=FILE" shorthand
std::pair<PriorKind, std::string> prior_spec(const RunConfig& config) {
  std::string kind = config.prior;
  std::string file = config.prior_file;
  if (kind.rfind("custom=", 0) == 0) {
    file = kind.substr(7);
    kind = "custom";
  }
  if (kind == "uniform") return {PriorKind::uniform, ""};
  if (kind == "degree") return {PriorKind::degree, ""};
  if (kind == "custom") {
    if (file.empty()) throw ValidationError("--prior custom needs --prior-file (or custom=FILE)");
    return {PriorKind::custom, file};
  }
  throw ValidationError("unknown prior '" + kind + "' (use uniform, degree or custom)");
}

NodePrior make_prior(const RunConfig& config, const WeightedGraph& g) {
  auto [kind, file] = prior_spec(config);
  if (kind == PriorKind::custom) {
    const std::vector<double> values = read_prior_file(file, g.labels());
    return build_prior(g, kind, &values);
  }
  return build_prior(g, kind);
}

// prior over dendrogram leaves when no graph is involved (uniform/custom only)
NodePrior make_prior(const RunConfig& config, const std::vector<std::string>& labels) {
  auto [kind, file] = prior_spec(config);
  switch (kind) {
    case PriorKind::uniform:
      return NodePrior::uniform(static_cast<int>(labels.size()));
    case PriorKind::custom:
      return NodePrior::custom(read_prior_file(file, labels));
    case PriorKind::degree:
      throw ValidationError("--prior degree needs --input");
  }
  throw ValidationError("unknown prior kind");
}

std::ostream& diag(const RunConfig& config) {
  static std::ofstream null_sink;
  if (config.quiet) {
    null_sink.setstate(std::ios::badbit);
    return null_sink;
  }
  return std::cerr;
}

nlohmann::json dendrogram_json(const Dendrogram& d) {
  nlohmann::json j;
  j["n_leaves"] = d.leaf_count();
  j["labels"] = d.labels();
  nlohmann::json merges = nlohmann::json::array();
  for (const Merge& m : d.merges()) {
    merges.push_back(nlohmann::json::array({m.left, m.right, round_to_significant(m.height)}));
  }
  j["merges"] = std::move(merges);
  return j;
}

// Remaps the dendrogram leaves onto the graph's label order; the label sets
// must coincide.
Dendrogram align_to_graph(const Dendrogram& d, const WeightedGraph& g) {
  if (d.leaf_count() != g.node_count()) {
    throw ValidationError("dendrogram has " + std::to_string(d.leaf_count()) +
                          " leaves but the graph has " + std::to_string(g.node_count()) +
                          " nodes");
  }
  for (const std::string& label : d.labels()) {
    if (g.find_label(label) < 0) {
      throw ValidationError("dendrogram leaf '" + label + "' is not a graph node");
    }
  }
  return d.relabeled(g.labels());
}

int cmd_cluster(const RunConfig& config) {
  const WeightedGraph g = load_graph(config);
  const NodePrior prior = make_prior(config, g);
  Dendrogram d = config.algorithm == "naive" ? agglomerate_naive(g, prior)
                                             : agglomerate_nn_chain(g, prior);
  write_output(config, dendrogram_json(d).dump() + "\n");
  diag(config) << "cluster: n=" << g.node_count() << " total_weight="
               << format_significant(g.total_weight())
               << " cost_J=" << format_significant(cost_j(g, prior, d))
               << " tree_objective=" << format_significant(tree_objective(g, prior, d)) << "\n";
  return 0;
}

int cmd_score(const RunConfig& config) {
  const WeightedGraph g = load_graph(config);
  const NodePrior prior = make_prior(config, g);
  Dendrogram d = align_to_graph(load_dendrogram(config), g);
  if (config.reoptimize) {
    d = optimal_heights(g, prior, d);
    if (!d.regular()) {
      diag(config) << "score: warning: re-optimized heights are not regular for this shape\n";
    }
  }
  const ScoreReport report = score_report(g, prior, d);
  if (config.reoptimize) {
    const double gap = report.cost_j + report.tree_objective;
    if (std::abs(gap) > 1e-9) {
      throw std::logic_error("optimal-height identity violated: cost_J + tree_objective = " +
                             format_significant(gap));
    }
  }
  write_output(config, to_json(report) + "\n");
  diag(config) << "score: cost_J=" << format_significant(report.cost_j)
               << " tree_objective=" << format_significant(report.tree_objective)
               << " kl_reconstruction=" << format_significant(report.kl_reconstruction)
               << " dasgupta=" << format_significant(report.dasgupta)
               << " log_cost=" << format_significant(report.log_cost) << "\n";
  return 0;
}

int cmd_cut(const RunConfig& config) {
  const Dendrogram d = load_dendrogram(config);
  if (config.cut_k_value.has_value() == config.cut_height_value.has_value()) {
    throw ValidationError("cut needs exactly one of --k or --height");
  }
  const Partition partition = config.cut_k_value.has_value()
                                  ? cut_k(d, *config.cut_k_value)
                                  : cut_height(d, *config.cut_height_value);

  std::vector<std::vector<std::string>> blocks;
  blocks.reserve(partition.blocks.size());
  for (const auto& block : partition.blocks) {
    std::vector<std::string> labels;
    labels.reserve(block.size());
    for (int u : block) labels.push_back(d.labels()[static_cast<std::size_t>(u)]);
    std::sort(labels.begin(), labels.end());
    blocks.push_back(std::move(labels));
  }
  std::sort(blocks.begin(), blocks.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  write_output(config, nlohmann::json(blocks).dump() + "\n");

  diag(config) << "cut: " << partition.blocks.size() << " clusters\n";
  if (config.gamma.has_value()) {
    const WeightedGraph g = load_graph(config);
    const NodePrior prior = make_prior(config, g);
    const Dendrogram aligned = align_to_graph(d, g);
    const Partition on_graph = config.cut_k_value.has_value()
                                   ? cut_k(aligned, *config.cut_k_value)
                                   : cut_height(aligned, *config.cut_height_value);
    diag(config) << "cut: modularity at gamma=" << format_significant(*config.gamma) << ": "
                 << format_significant(modularity(g, prior, on_graph, *config.gamma)) << "\n";
  }
  return 0;
}

int cmd_reconstruct(const RunConfig& config) {
  Dendrogram d = load_dendrogram(config);
  NodePrior prior = [&] {
    auto [kind, file] = prior_spec(config);
    (void)file;
    if (kind == PriorKind::degree || !config.input.empty()) {
      const WeightedGraph g = load_graph(config);
      d = align_to_graph(d, g);
      return make_prior(config, g);
    }
    return make_prior(config, d.labels());
  }();
  const ReconstructedGraph r = reconstruct(d, prior);
  write_output(config, export_reconstruction(r, config.threshold));
  diag(config) << "reconstruct: n=" << r.node_count()
               << " total_weight=" << format_significant(r.total_weight()) << "\n";
  return 0;
}

int cmd_oracle(const RunConfig& config) {
  const WeightedGraph g = load_graph(config);
  const NodePrior prior = make_prior(config, g);
  const OracleObjective objective =
      config.objective == "dasgupta" ? OracleObjective::dasgupta : OracleObjective::tree_objective;
  const OracleResult result = exhaustive_optimum(g, prior, objective);
  const Dendrogram greedy = agglomerate_nn_chain(g, prior);
  const double greedy_score = objective == OracleObjective::tree_objective
                                  ? tree_objective(g, prior, greedy)
                                  : dasgupta_cost(g, greedy);
  // how far the greedy tree falls short of the optimum, >= 0 either way
  const double gap = objective == OracleObjective::tree_objective ? result.score - greedy_score
                                                                  : greedy_score - result.score;

  nlohmann::json j;
  j["shape"] = nlohmann::json::parse(shape_to_nested_json(result.shape));
  j["score"] = round_to_significant(result.score);
  j["n_shapes_searched"] = result.n_shapes_searched;
  j["greedy_score"] = round_to_significant(greedy_score);
  j["gap"] = round_to_significant(gap);
  write_output(config, j.dump() + "\n");
  diag(config) << "oracle: searched " << result.n_shapes_searched << " shapes; optimum "
               << format_significant(result.score) << ", greedy "
               << format_significant(greedy_score) << ", gap " << format_significant(gap) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig config;
  CLI::App app{"Hierarchical graph clustering by reconstruction-optimal linkage"};
  app.require_subcommand(1);

  auto add_shared = [&](CLI::App* cmd, bool with_prior = true) {
    cmd->add_option("--input", config.input, "edge-list file ('-' for stdin)");
    cmd->add_option("--output", config.output, "output file (default stdout)");
    if (with_prior) {
      cmd->add_option("--prior", config.prior,
                      "node prior: uniform, degree or custom[=FILE] (default degree)");
      cmd->add_option("--prior-file", config.prior_file, "custom prior file ('label value' lines)");
    }
    cmd->add_flag("--quiet", config.quiet, "suppress diagnostics");
    cmd->add_flag("--drop-self-loops", config.drop_self_loops,
                  "skip self-loop input lines instead of failing");
  };

  CLI::App* cluster = app.add_subcommand("cluster", "build a dendrogram from a graph");
  add_shared(cluster);
  cluster->add_option("--algorithm", config.algorithm, "naive or nn-chain (default)")
      ->check(CLI::IsMember({"naive", "nn-chain"}));

  CLI::App* score = app.add_subcommand("score", "score a dendrogram against a graph");
  add_shared(score);
  score->add_option("--dendrogram", config.dendrogram, "dendrogram JSON file ('-' for stdin)");
  score->add_flag("--reoptimize-heights", config.reoptimize,
                  "replace heights by the closed-form optimum before scoring");

  CLI::App* cut = app.add_subcommand("cut", "cut a dendrogram into a flat partition");
  add_shared(cut);
  cut->add_option("--dendrogram", config.dendrogram, "dendrogram JSON file ('-' for stdin)");
  int k_value = 0;
  CLI::Option* opt_k = cut->add_option("--k", k_value, "number of clusters");
  double h_value = 0;
  CLI::Option* opt_h = cut->add_option("--height", h_value, "height threshold");
  opt_k->excludes(opt_h);
  double gamma_value = 0;
  CLI::Option* opt_gamma =
      cut->add_option("--gamma", gamma_value, "also report modularity at this resolution (needs --input)");

  CLI::App* rec = app.add_subcommand("reconstruct", "decode a graph from a dendrogram and prior");
  add_shared(rec);
  rec->add_option("--dendrogram", config.dendrogram, "dendrogram JSON file ('-' for stdin)");
  rec->add_option("--threshold", config.threshold, "keep pairs with weight >= threshold (default 0)");

  CLI::App* oracle = app.add_subcommand("oracle", "exhaustive optimum over tree shapes (n <= 9)");
  add_shared(oracle);
  oracle->add_option("--objective", config.objective, "kl (tree objective, default) or dasgupta")
      ->check(CLI::IsMember({"kl", "dasgupta"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (opt_k->count() > 0) config.cut_k_value = k_value;
  if (opt_h->count() > 0) config.cut_height_value = h_value;
  if (opt_gamma->count() > 0) config.gamma = gamma_value;

  try {
    if (cluster->parsed()) return cmd_cluster(config);
    if (score->parsed()) return cmd_score(config);
    if (cut->parsed()) return cmd_cut(config);
    if (rec->parsed()) return cmd_reconstruct(config);
    if (oracle->parsed()) return cmd_oracle(config);
    return 2;
  } catch (const DisconnectedGraphError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}
