// Command-line front end: fit a Bradley-Terry regression trunk on a rankings
// CSV, run the pruning-parameter simulation study, predict preferences for
// new judges, report exact consensus rankings, and generate the bundled
// synthetic survey fixture.

#include <CLI11.hpp>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "btrt/errors.hpp"
#include "btrt/io.hpp"
#include "btrt/parallel.hpp"

namespace {

using namespace btrt;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open input file '" + path + "'");
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw validation_error("cannot open output file '" + path + "'");
  return out;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

std::string ranking_text(const Ranking& r, const std::vector<std::string>& names) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < r.ranks.size(); ++i) {
    if (i) os << " ";
    os << r.ranks[i];
  }
  os << ")  [";
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) os << ", ";
    os << names[i] << "=" << r.ranks[i];
  }
  os << "]";
  return os.str();
}

struct FitArgs {
  std::string input;
  std::string objects;
  std::string approach = "ms";
  Index max_terminal = 5;
  double c = 0.5;
  int folds = 10;
  std::uint64_t seed = 1;
  std::string out;
  std::string dot;
  std::string pruning_csv;
  std::string dump_design;
  int threads = default_thread_count();
};

void print_split_log(const TrunkSequence& sequence, const RankingDataset& data) {
  std::cout << "split log\n";
  std::cout << std::left << std::setw(12) << "" << std::setw(6) << "node" << std::setw(24)
            << "covariate" << std::setw(14) << "split point" << "deviance\n";
  for (Index s = 0; s < sequence.size(); ++s) {
    const TrunkEntry& entry = sequence.entries[static_cast<std::size_t>(s)];
    std::ostringstream label;
    if (s > 0) label << "bestsplit" << s;
    std::cout << std::left << std::setw(12) << label.str();
    if (entry.split) {
      std::cout << std::setw(6) << entry.split->node_id << std::setw(24)
                << data.covariate_names[static_cast<std::size_t>(entry.split->covariate)]
                << std::setw(14) << entry.split->threshold;
    } else {
      std::cout << std::setw(6) << 1 << std::setw(24) << "main effects (no splits)"
                << std::setw(14) << "";
    }
    std::cout << std::fixed << std::setprecision(2) << entry.deviance << "\n";
    std::cout.unsetf(std::ios_base::floatfield);
    std::cout << std::setprecision(6);
  }
}

void print_coefficient_table(const std::vector<WaldRow>& rows) {
  std::cout << "\ncoefficients (reference object fixed at 0)\n";
  std::cout << std::left << std::setw(34) << "term" << std::right << std::setw(12) << "estimate"
            << std::setw(12) << "std.err" << std::setw(12) << "p-value"
            << "  signif\n";
  for (const WaldRow& row : rows) {
    std::cout << std::left << std::setw(34) << row.name << std::right << std::fixed
              << std::setprecision(4) << std::setw(12) << row.estimate << std::setw(12)
              << row.std_error << std::setw(12) << row.p_value << "  " << row.stars << "\n";
  }
  std::cout.unsetf(std::ios_base::floatfield);
  std::cout << std::setprecision(6);
  std::cout << "signif: '***' p<0.001, '**' p<0.01, '*' p<0.05\n";
}

int run_fit(const FitArgs& args) {
  auto in = open_input(args.input);
  const RankingDataset data =
      read_rankings_csv(in, args.objects.empty() ? std::vector<std::string>{}
                                                 : split_list(args.objects));

  GrowConfig config;
  config.approach =
      args.approach == "oso" ? SplitApproach::one_split_only : SplitApproach::multiple_splitting;
  config.max_terminal = args.max_terminal;
  config.threads = args.threads;

  TrunkSequence sequence = grow(data, config);
  Rng rng = make_engine(args.seed);
  PruningTable table;
  Index selected = 0;
  if (sequence.size() > 1) {
    table = cv_table(data, sequence, args.folds, rng, args.threads);
    selected = select_size(table, args.c);
  } else {
    PruningRow row;
    row.model_index = 0;
    row.deviance = sequence.entries.front().deviance;
    table.rows.push_back(row);
  }

  TrunkEntry& entry = sequence.entries[static_cast<std::size_t>(selected)];
  label_node_consensus(entry.model, data);

  print_split_log(sequence, data);
  std::cout << "\nselected model: mod" << selected << " (c = " << args.c << ", " << args.folds
            << "-fold CV, approach = " << args.approach << ")\n";
  std::cout << "terminal regions: " << entry.regions.size() << ", deviance "
            << std::fixed << std::setprecision(2) << entry.deviance << "\n";
  std::cout.unsetf(std::ios_base::floatfield);
  std::cout << std::setprecision(6);

  const DesignMatrix design = build_design(data, entry.regions);
  FitOptions tolerant;
  tolerant.strict = false;
  const GlmFit refit = fit(design, tolerant);
  if (refit.converged) {
    print_coefficient_table(wald_table(refit, design));
  } else {
    std::cout << "coefficient table unavailable: selected model did not converge\n";
  }

  ModelArtifact artifact;
  artifact.model = entry.model;
  artifact.approach = args.approach;
  artifact.c = args.c;
  artifact.folds = args.folds;
  artifact.seed = args.seed;
  artifact.max_terminal = args.max_terminal;
  artifact.selected_index = selected;
  artifact.pruning = table;
  for (const TrunkEntry& e : sequence.entries) {
    if (e.split) artifact.splits.push_back(*e.split);
    artifact.split_deviances.push_back(e.deviance);
  }
  const std::vector<Index> region_of = assign_regions(data, entry.regions);
  artifact.region_judge_counts.assign(static_cast<std::size_t>(entry.regions.size()), 0);
  for (Index t : region_of) ++artifact.region_judge_counts[static_cast<std::size_t>(t)];

  if (!args.out.empty()) {
    auto out = open_output(args.out);
    write_model_json(out, artifact);
  }
  if (!args.dot.empty()) {
    auto out = open_output(args.dot);
    write_dot(out, sequence, selected, data);
  }
  if (!args.pruning_csv.empty()) {
    auto out = open_output(args.pruning_csv);
    write_pruning_csv(out, table);
  }
  if (!args.dump_design.empty()) {
    auto out = open_output(args.dump_design);
    write_design_csv(out, design);
  }
  return kExitOk;
}

struct SimulateArgs {
  int scenario = 1;
  int objects = 4;
  Index judges = 100;
  std::string effect = "low";
  Index reps = 50;
  std::string c_grid = "0.0,0.1,0.3,0.5,0.7,0.9,1.0";
  std::uint64_t seed = 1;
  std::string out;
  Index max_terminal = 5;
  int folds = 10;
  int threads = default_thread_count();
};

int run_simulate(const SimulateArgs& args) {
  const ScenarioSpec spec = make_scenario_spec(
      args.scenario, args.objects, args.judges,
      args.effect == "high" ? EffectSize::high : EffectSize::low);
  StudyConfig config;
  config.replications = args.reps;
  config.c_grid.clear();
  for (const std::string& item : split_list(args.c_grid))
    config.c_grid.push_back(std::stod(item));
  if (config.c_grid.empty()) throw validation_error("empty --c-grid");
  config.max_terminal = args.max_terminal;
  config.folds = args.folds;
  config.seed = args.seed;
  config.threads = args.threads;

  const StudyResult result = run_study(spec, config);

  std::cout << "scenario " << spec.scenario << ", " << spec.n_objects << " objects, "
            << spec.judges << " judges, " << (spec.effect == EffectSize::high ? "high" : "low")
            << " effect, " << config.replications << " replications ("
            << result.failures << " failed)\n";
  std::cout << std::left << std::setw(8) << "c"
            << (spec.scenario == 3 ? "power" : "type I error") << "\n";
  for (std::size_t ci = 0; ci < config.c_grid.size(); ++ci) {
    std::cout << std::left << std::setw(8) << config.c_grid[ci] << std::fixed
              << std::setprecision(2) << result.rates[ci] << "\n";
    std::cout.unsetf(std::ios_base::floatfield);
    std::cout << std::setprecision(6);
  }
  if (!args.out.empty()) {
    auto out = open_output(args.out);
    write_study_csv(out, result);
  }
  return kExitOk;
}

struct PredictArgs {
  std::string model;
  std::string input;
  std::string out;
};

int run_predict(const PredictArgs& args) {
  auto model_in = open_input(args.model);
  const ModelArtifact artifact = read_model_json(model_in);
  const BtrtModel& model = artifact.model;

  auto in = open_input(args.input);
  const Matrix covariates = read_covariates_csv(in, model.covariate_names);

  std::ostream* os = &std::cout;
  std::ofstream file;
  if (!args.out.empty()) {
    file = open_output(args.out);
    os = &file;
  }

  const int n_o = model.n_objects();
  *os << "judge,region";
  for (int i = 0; i < n_o; ++i)
    for (int j = i + 1; j < n_o; ++j)
      *os << ",p(" << model.object_names[static_cast<std::size_t>(i)] << ">"
          << model.object_names[static_cast<std::size_t>(j)] << ")";
  for (int i = 0; i < n_o; ++i) *os << ",rank:" << model.object_names[static_cast<std::size_t>(i)];
  *os << "\n";

  for (Index h = 0; h < covariates.rows(); ++h) {
    Index region = -1;
    for (Index t = 0; t < model.region_count(); ++t) {
      if (region_contains(model.regions.regions[static_cast<std::size_t>(t)],
                          covariates.row(h))) {
        if (region >= 0)
          throw validation_error("judge " + std::to_string(h + 1) +
                                 " matches more than one region");
        region = t;
      }
    }
    if (region < 0)
      throw validation_error("judge " + std::to_string(h + 1) + " matches no region");
    const Vector probs = model.pair_probabilities(covariates.row(h), region);
    const Ranking modal = model.modal_ranking(covariates.row(h), region);
    *os << (h + 1) << "," << (region + 1);
    for (Index q = 0; q < probs.size(); ++q) *os << "," << format_double(probs(q));
    for (int i = 0; i < n_o; ++i) *os << "," << modal.ranks[static_cast<std::size_t>(i)];
    *os << "\n";
  }
  return kExitOk;
}

struct ConsensusArgs {
  std::string input;
  std::string objects;
};

int run_consensus(const ConsensusArgs& args) {
  auto in = open_input(args.input);
  const RankingDataset data =
      read_rankings_csv(in, args.objects.empty() ? std::vector<std::string>{}
                                                 : split_list(args.objects));
  const ConsensusResult consensus = kemeny_consensus(data.rankings);
  std::cout << "judges: " << data.judge_count() << "\n";
  std::cout << "consensus ranking: " << ranking_text(consensus.ranking, data.object_names) << "\n";
  std::cout << "mean tau_x: " << std::fixed << std::setprecision(4) << consensus.tau << "\n";
  return kExitOk;
}

struct FixtureArgs {
  Index judges = 100;
  std::uint64_t seed = 42;
  std::string out;
};

int run_fixture(const FixtureArgs& args) {
  const RankingDataset data = make_survey_fixture(args.judges, args.seed);
  if (args.out.empty()) {
    write_dataset_csv(std::cout, data);
  } else {
    auto out = open_output(args.out);
    write_dataset_csv(out, data);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bradley-Terry regression trunks for preference rankings"};
  app.require_subcommand(1);

  FitArgs fit_args;
  CLI::App* fit_cmd = app.add_subcommand(
      "fit", "Fit a regression trunk on a rankings CSV and prune it by cross-validation");
  fit_cmd->add_option("input", fit_args.input, "rankings CSV")->required();
  fit_cmd->add_option("--objects", fit_args.objects,
                      "comma-separated rank column names (default: 'rank:' prefixed headers)");
  fit_cmd->add_option("--approach", fit_args.approach, "split search approach")
      ->check(CLI::IsMember({"oso", "ms"}));
  fit_cmd->add_option("--max-terminal", fit_args.max_terminal, "maximum terminal nodes (T)");
  fit_cmd->add_option("--c", fit_args.c, "pruning constant for the c*SE rule");
  fit_cmd->add_option("--folds", fit_args.folds, "cross-validation folds");
  fit_cmd->add_option("--seed", fit_args.seed, "fold assignment seed");
  fit_cmd->add_option("--out", fit_args.out, "model artifact JSON path");
  fit_cmd->add_option("--dot", fit_args.dot, "Graphviz trunk output path");
  fit_cmd->add_option("--pruning-csv", fit_args.pruning_csv, "pruning table CSV path");
  fit_cmd->add_option("--dump-design", fit_args.dump_design, "design matrix CSV path");
  fit_cmd->add_option("--threads", fit_args.threads, "worker threads");

  SimulateArgs sim_args;
  CLI::App* sim_cmd =
      app.add_subcommand("simulate", "Monte-Carlo study of the pruning rule (Type I error / power)");
  sim_cmd->add_option("--scenario", sim_args.scenario, "data-generating scenario")
      ->check(CLI::Range(1, 3))
      ->required();
  sim_cmd->add_option("--objects", sim_args.objects, "object count")->check(CLI::Range(4, 5));
  sim_cmd->add_option("--judges", sim_args.judges, "judges per replication");
  sim_cmd->add_option("--effect", sim_args.effect, "effect size")
      ->check(CLI::IsMember({"low", "high"}));
  sim_cmd->add_option("--reps", sim_args.reps, "replications");
  sim_cmd->add_option("--c-grid", sim_args.c_grid, "comma-separated pruning constants");
  sim_cmd->add_option("--seed", sim_args.seed, "master seed");
  sim_cmd->add_option("--out", sim_args.out, "study CSV path");
  sim_cmd->add_option("--max-terminal", sim_args.max_terminal, "maximum terminal nodes (T)");
  sim_cmd->add_option("--folds", sim_args.folds, "cross-validation folds");
  sim_cmd->add_option("--threads", sim_args.threads, "worker threads");

  PredictArgs predict_args;
  CLI::App* predict_cmd =
      app.add_subcommand("predict", "Pair probabilities and modal rankings for new judges");
  predict_cmd->add_option("--model", predict_args.model, "model artifact JSON")->required();
  predict_cmd->add_option("input", predict_args.input, "covariate CSV")->required();
  predict_cmd->add_option("--out", predict_args.out, "predictions CSV path (default: stdout)");

  ConsensusArgs consensus_args;
  CLI::App* consensus_cmd =
      app.add_subcommand("consensus", "Exact consensus ranking and mean tau_x of a rankings CSV");
  consensus_cmd->add_option("input", consensus_args.input, "rankings CSV")->required();
  consensus_cmd->add_option("--objects", consensus_args.objects,
                            "comma-separated rank column names");

  FixtureArgs fixture_args;
  CLI::App* fixture_cmd =
      app.add_subcommand("make-fixture", "Generate the synthetic survey demo dataset");
  fixture_cmd->add_option("--judges", fixture_args.judges, "judge count");
  fixture_cmd->add_option("--seed", fixture_args.seed, "generator seed");
  fixture_cmd->add_option("--out", fixture_args.out, "output CSV path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (fit_cmd->parsed()) return run_fit(fit_args);
    if (sim_cmd->parsed()) return run_simulate(sim_args);
    if (predict_cmd->parsed()) return run_predict(predict_args);
    if (consensus_cmd->parsed()) return run_consensus(consensus_args);
    if (fixture_cmd->parsed()) return run_fixture(fixture_args);
  } catch (const btrt::unsupported_size_error& e) {
    std::cerr << "error: exact search unsupported: " << e.what() << "\n";
    return kExitValidation;
  } catch (const btrt::validation_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const btrt::numerical_error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitOk;
}
