#include "btrt/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "btrt/errors.hpp"

namespace btrt {

using nlohmann::json;

std::string format_double(double value) {
  char buffer[64];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, ptr);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    // trim surrounding whitespace
    const auto begin = field.find_first_not_of(" \t\r");
    const auto end = field.find_last_not_of(" \t\r");
    fields.push_back(begin == std::string::npos ? "" : field.substr(begin, end - begin + 1));
  }
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

double parse_double(const std::string& text, std::size_t row, const std::string& column) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw validation_error("row " + std::to_string(row) + ", column '" + column +
                           "': cannot parse '" + text + "' as a number");
  }
}

std::vector<std::string> read_csv_table(std::istream& in, std::vector<std::string>& header) {
  std::vector<std::string> lines;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (!have_header) {
      header = split_csv_line(line);
      have_header = true;
    } else {
      lines.push_back(line);
    }
  }
  if (!have_header) throw validation_error("CSV input is empty");
  return lines;
}

}  // namespace

RankingDataset read_rankings_csv(std::istream& in, const std::vector<std::string>& rank_columns) {
  std::vector<std::string> header;
  const std::vector<std::string> lines = read_csv_table(in, header);

  std::vector<std::size_t> rank_cols;
  std::vector<std::string> object_names;
  std::vector<std::size_t> covariate_cols;
  std::vector<std::string> covariate_names;

  if (rank_columns.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (header[c].rfind("rank:", 0) == 0) {
        rank_cols.push_back(c);
        object_names.push_back(header[c].substr(5));
      } else {
        covariate_cols.push_back(c);
        covariate_names.push_back(header[c]);
      }
    }
  } else {
    for (const std::string& wanted : rank_columns) {
      const auto it = std::find(header.begin(), header.end(), wanted);
      if (it == header.end())
        throw validation_error("rank column '" + wanted + "' not found in CSV header");
      rank_cols.push_back(static_cast<std::size_t>(it - header.begin()));
      object_names.push_back(wanted);
    }
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (std::find(rank_cols.begin(), rank_cols.end(), c) == rank_cols.end()) {
        covariate_cols.push_back(c);
        covariate_names.push_back(header[c]);
      }
    }
  }

  if (rank_cols.size() < 2)
    throw validation_error("need at least 2 rank columns (use 'rank:' header prefixes or "
                           "--objects)");

  RankingDataset data;
  data.n_objects = static_cast<int>(rank_cols.size());
  data.object_names = object_names;
  data.covariate_names = covariate_names;
  data.covariates.resize(static_cast<Index>(lines.size()), static_cast<Index>(covariate_cols.size()));

  for (std::size_t r = 0; r < lines.size(); ++r) {
    const std::vector<std::string> fields = split_csv_line(lines[r]);
    if (fields.size() != header.size())
      throw validation_error("row " + std::to_string(r + 1) + ": expected " +
                             std::to_string(header.size()) + " fields, found " +
                             std::to_string(fields.size()));
    Ranking ranking;
    for (std::size_t k = 0; k < rank_cols.size(); ++k) {
      const double v = parse_double(fields[rank_cols[k]], r + 1, header[rank_cols[k]]);
      if (v != std::floor(v))
        throw validation_error("row " + std::to_string(r + 1) + ", column '" +
                               header[rank_cols[k]] + "': rank must be an integer");
      ranking.ranks.push_back(static_cast<int>(v));
    }
    if (!is_strict_ranking(ranking))
      throw validation_error("row " + std::to_string(r + 1) +
                             ": ranks are not a permutation of 1.." +
                             std::to_string(data.n_objects));
    data.rankings.push_back(std::move(ranking));
    for (std::size_t k = 0; k < covariate_cols.size(); ++k)
      data.covariates(static_cast<Index>(r), static_cast<Index>(k)) =
          parse_double(fields[covariate_cols[k]], r + 1, header[covariate_cols[k]]);
  }
  data.validate();
  return data;
}

Matrix read_covariates_csv(std::istream& in, const std::vector<std::string>& covariate_names) {
  std::vector<std::string> header;
  const std::vector<std::string> lines = read_csv_table(in, header);

  std::vector<std::size_t> order;
  for (const std::string& wanted : covariate_names) {
    const auto it = std::find(header.begin(), header.end(), wanted);
    if (it == header.end())
      throw validation_error("covariate '" + wanted + "' missing from prediction input");
    order.push_back(static_cast<std::size_t>(it - header.begin()));
  }
  for (const std::string& name : header) {
    if (std::find(covariate_names.begin(), covariate_names.end(), name) == covariate_names.end())
      throw validation_error("unexpected column '" + name + "' in prediction input");
  }

  Matrix out(static_cast<Index>(lines.size()), static_cast<Index>(covariate_names.size()));
  for (std::size_t r = 0; r < lines.size(); ++r) {
    const std::vector<std::string> fields = split_csv_line(lines[r]);
    if (fields.size() != header.size())
      throw validation_error("row " + std::to_string(r + 1) + ": expected " +
                             std::to_string(header.size()) + " fields, found " +
                             std::to_string(fields.size()));
    for (std::size_t k = 0; k < order.size(); ++k)
      out(static_cast<Index>(r), static_cast<Index>(k)) =
          parse_double(fields[order[k]], r + 1, covariate_names[k]);
  }
  return out;
}

void write_dataset_csv(std::ostream& os, const RankingDataset& data) {
  for (int i = 0; i < data.n_objects; ++i) {
    if (i) os << ",";
    os << "rank:" << data.object_names[static_cast<std::size_t>(i)];
  }
  for (const std::string& name : data.covariate_names) os << "," << name;
  os << "\n";
  for (Index h = 0; h < data.judge_count(); ++h) {
    const Ranking& r = data.rankings[static_cast<std::size_t>(h)];
    for (int i = 0; i < data.n_objects; ++i) {
      if (i) os << ",";
      os << r.ranks[static_cast<std::size_t>(i)];
    }
    for (Index p = 0; p < data.covariate_count(); ++p)
      os << "," << format_double(data.covariates(h, p));
    os << "\n";
  }
}

void write_design_csv(std::ostream& os, const DesignMatrix& design) {
  os << "response,block";
  for (const std::string& name : design.column_names) os << "," << name;
  os << "\n";
  for (const DesignMatrix::FullRow& row : design.full_rows()) {
    os << row.response << "," << row.block_id;
    for (Index c = 0; c < row.columns.size(); ++c) os << "," << format_double(row.columns(c));
    os << "\n";
  }
}

void write_pruning_csv(std::ostream& os, const PruningTable& table) {
  os << "model,D,Dcv,SEcv\n";
  for (const PruningRow& row : table.rows) {
    os << "mod" << row.model_index << "," << format_double(row.deviance) << ",";
    os << (row.cv_deviance ? format_double(*row.cv_deviance) : "NA") << ",";
    os << (row.cv_std_error ? format_double(*row.cv_std_error) : "NA") << "\n";
  }
}

void write_study_csv(std::ostream& os, const StudyResult& result) {
  os << "# seed=" << result.config.seed << " scenario=" << result.spec.scenario
     << " objects=" << result.spec.n_objects << " judges=" << result.spec.judges
     << " effect=" << (result.spec.effect == EffectSize::high ? "high" : "low")
     << " replications=" << result.config.replications << " folds=" << result.config.folds
     << " max_terminal=" << result.config.max_terminal << "\n";
  os << "c," << (result.spec.scenario == 3 ? "power" : "type_i_error") << ",valid,failures\n";
  const Index valid = result.config.replications - result.failures;
  for (std::size_t ci = 0; ci < result.config.c_grid.size(); ++ci) {
    os << format_double(result.config.c_grid[ci]) << "," << format_double(result.rates[ci]) << ","
       << valid << "," << result.failures << "\n";
  }
}

namespace {

json condition_to_json(const SplitCondition& c, const std::vector<std::string>& covariates) {
  return json{{"covariate", covariates[static_cast<std::size_t>(c.covariate)]},
              {"op", c.upper ? ">" : "<="},
              {"threshold", c.threshold}};
}

SplitCondition condition_from_json(const json& j, const std::vector<std::string>& covariates) {
  SplitCondition c;
  const std::string name = j.at("covariate").get<std::string>();
  const auto it = std::find(covariates.begin(), covariates.end(), name);
  if (it == covariates.end())
    throw validation_error("model artifact: unknown covariate '" + name + "' in region");
  c.covariate = static_cast<Index>(it - covariates.begin());
  c.upper = j.at("op").get<std::string>() == ">";
  c.threshold = j.at("threshold").get<double>();
  return c;
}

}  // namespace

void write_model_json(std::ostream& os, const ModelArtifact& artifact) {
  const BtrtModel& model = artifact.model;
  const int n_o = model.n_objects();
  json j;
  j["format"] = "btrt-model";
  j["version"] = 1;
  j["objects"] = model.object_names;
  j["reference_object"] = model.object_names.back();
  j["covariates"] = model.covariate_names;
  j["config"] = json{{"approach", artifact.approach},
                     {"c", artifact.c},
                     {"folds", artifact.folds},
                     {"seed", artifact.seed},
                     {"max_terminal", artifact.max_terminal}};
  j["selected_model"] = artifact.selected_index;
  j["deviance"] = model.deviance;
  j["converged"] = model.converged;

  json lambda = json::array();
  json beta = json::array();
  json region_coef = json::array();
  const Index P = model.beta_main.cols();
  const Index T = model.region_count();
  auto se_at = [&](Index col) {
    return col < model.std_errors.size() && std::isfinite(model.std_errors(col))
               ? json(model.std_errors(col))
               : json();
  };
  for (Index i = 0; i < n_o - 1; ++i) {
    lambda.push_back(json{{"object", model.object_names[static_cast<std::size_t>(i)]},
                          {"estimate", model.lambda(i)},
                          {"std_error", se_at(i)}});
    for (Index p = 0; p < P; ++p)
      beta.push_back(json{{"object", model.object_names[static_cast<std::size_t>(i)]},
                          {"covariate", model.covariate_names[static_cast<std::size_t>(p)]},
                          {"estimate", model.beta_main(i, p)},
                          {"std_error", se_at((n_o - 1) * (1 + p) + i)}});
    for (Index t = 1; t < T; ++t)
      region_coef.push_back(json{{"object", model.object_names[static_cast<std::size_t>(i)]},
                                 {"region", t + 1},
                                 {"estimate", model.beta_region(i, t - 1)},
                                 {"std_error", se_at((n_o - 1) * (1 + P + t - 1) + i)}});
  }
  j["coefficients"] = json{{"lambda", lambda}, {"beta", beta}, {"region", region_coef}};

  json regions = json::array();
  for (Index t = 0; t < T; ++t) {
    const Region& region = model.regions.regions[static_cast<std::size_t>(t)];
    json conditions = json::array();
    for (const SplitCondition& c : region.conditions)
      conditions.push_back(condition_to_json(c, model.covariate_names));
    json entry{{"index", t + 1},
               {"node", region.node_id},
               {"reference", t == 0},
               {"conditions", conditions}};
    if (t < static_cast<Index>(artifact.region_judge_counts.size()))
      entry["judges"] = artifact.region_judge_counts[static_cast<std::size_t>(t)];
    if (t < static_cast<Index>(model.node_consensus.size())) {
      entry["consensus"] = json{{"ranks", model.node_consensus[static_cast<std::size_t>(t)].ranking.ranks},
                                {"tau", model.node_consensus[static_cast<std::size_t>(t)].tau}};
    }
    regions.push_back(std::move(entry));
  }
  j["regions"] = regions;

  json splits = json::array();
  for (std::size_t s = 0; s < artifact.splits.size(); ++s) {
    splits.push_back(
        json{{"node", artifact.splits[s].node_id},
             {"covariate",
              model.covariate_names[static_cast<std::size_t>(artifact.splits[s].covariate)]},
             {"threshold", artifact.splits[s].threshold},
             {"deviance", s + 1 < artifact.split_deviances.size()
                              ? json(artifact.split_deviances[s + 1])
                              : json()}});
  }
  j["splits"] = splits;

  json pruning = json::array();
  for (const PruningRow& row : artifact.pruning.rows) {
    pruning.push_back(json{{"model", row.model_index},
                           {"deviance", row.deviance},
                           {"cv_deviance", row.cv_deviance ? json(*row.cv_deviance) : json()},
                           {"cv_std_error", row.cv_std_error ? json(*row.cv_std_error) : json()}});
  }
  j["pruning"] = pruning;

  os << j.dump(2) << "\n";
}

ModelArtifact read_model_json(std::istream& in) {
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw validation_error(std::string("model artifact: invalid JSON: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "btrt-model")
      throw validation_error("model artifact: unexpected format tag");

    ModelArtifact artifact;
    BtrtModel& model = artifact.model;
    model.object_names = j.at("objects").get<std::vector<std::string>>();
    model.covariate_names = j.at("covariates").get<std::vector<std::string>>();
    artifact.approach = j.at("config").at("approach").get<std::string>();
    artifact.c = j.at("config").at("c").get<double>();
    artifact.folds = j.at("config").at("folds").get<int>();
    artifact.seed = j.at("config").at("seed").get<std::uint64_t>();
    artifact.max_terminal = j.at("config").at("max_terminal").get<Index>();
    artifact.selected_index = j.at("selected_model").get<Index>();
    model.deviance = j.at("deviance").get<double>();
    model.converged = j.at("converged").get<bool>();

    const int n_o = static_cast<int>(model.object_names.size());
    const Index P = static_cast<Index>(model.covariate_names.size());
    const auto& regions_json = j.at("regions");
    const Index T = static_cast<Index>(regions_json.size());

    model.lambda = Vector::Zero(n_o - 1);
    model.beta_main = Matrix::Zero(n_o - 1, P);
    model.beta_region = Matrix::Zero(n_o - 1, T - 1);

    auto object_index = [&](const std::string& name) {
      const auto it = std::find(model.object_names.begin(), model.object_names.end(), name);
      if (it == model.object_names.end())
        throw validation_error("model artifact: unknown object '" + name + "'");
      return static_cast<Index>(it - model.object_names.begin());
    };
    auto covariate_index = [&](const std::string& name) {
      const auto it = std::find(model.covariate_names.begin(), model.covariate_names.end(), name);
      if (it == model.covariate_names.end())
        throw validation_error("model artifact: unknown covariate '" + name + "'");
      return static_cast<Index>(it - model.covariate_names.begin());
    };

    for (const auto& entry : j.at("coefficients").at("lambda"))
      model.lambda(object_index(entry.at("object").get<std::string>())) =
          entry.at("estimate").get<double>();
    for (const auto& entry : j.at("coefficients").at("beta"))
      model.beta_main(object_index(entry.at("object").get<std::string>()),
                      covariate_index(entry.at("covariate").get<std::string>())) =
          entry.at("estimate").get<double>();
    for (const auto& entry : j.at("coefficients").at("region"))
      model.beta_region(object_index(entry.at("object").get<std::string>()),
                        entry.at("region").get<Index>() - 2) = entry.at("estimate").get<double>();

    for (const auto& entry : regions_json) {
      Region region;
      region.node_id = entry.at("node").get<int>();
      for (const auto& cond : entry.at("conditions"))
        region.conditions.push_back(condition_from_json(cond, model.covariate_names));
      model.regions.regions.push_back(std::move(region));
      if (entry.contains("judges") && !entry.at("judges").is_null())
        artifact.region_judge_counts.push_back(entry.at("judges").get<Index>());
      if (entry.contains("consensus") && !entry.at("consensus").is_null()) {
        ConsensusResult consensus;
        consensus.ranking = Ranking(entry.at("consensus").at("ranks").get<std::vector<int>>());
        consensus.tau = entry.at("consensus").at("tau").get<double>();
        model.node_consensus.push_back(std::move(consensus));
      }
    }

    for (const auto& entry : j.at("splits")) {
      SplitRecord record;
      record.node_id = entry.at("node").get<int>();
      record.covariate = covariate_index(entry.at("covariate").get<std::string>());
      record.threshold = entry.at("threshold").get<double>();
      artifact.splits.push_back(record);
    }

    for (const auto& entry : j.at("pruning")) {
      PruningRow row;
      row.model_index = entry.at("model").get<Index>();
      row.deviance = entry.at("deviance").get<double>();
      if (!entry.at("cv_deviance").is_null()) row.cv_deviance = entry.at("cv_deviance").get<double>();
      if (!entry.at("cv_std_error").is_null())
        row.cv_std_error = entry.at("cv_std_error").get<double>();
      artifact.pruning.rows.push_back(row);
    }
    for (const PruningRow& row : artifact.pruning.rows)
      artifact.split_deviances.push_back(row.deviance);
    return artifact;
  } catch (const json::exception& e) {
    throw validation_error(std::string("model artifact: missing or malformed field: ") + e.what());
  }
}

}  // namespace btrt
