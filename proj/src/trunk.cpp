#include "btrt/trunk.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "btrt/errors.hpp"
#include "btrt/parallel.hpp"

namespace btrt {

namespace {

Index ceil_sqrt(Index n) {
  Index s = static_cast<Index>(std::floor(std::sqrt(static_cast<double>(n))));
  while (s > 0 && s * s >= n) --s;
  while (s * s < n) ++s;
  return s;
}

FitOptions tolerant_options() {
  FitOptions opt;
  opt.strict = false;
  return opt;
}

/// Path conditions from the root to a node, in root-first order.
std::vector<SplitCondition> path_conditions(const std::vector<TrunkNode>& nodes, int node_id) {
  std::vector<SplitCondition> conditions;
  const TrunkNode* node = nullptr;
  for (const TrunkNode& n : nodes)
    if (n.id == node_id) node = &n;
  while (node != nullptr && node->parent != 0) {
    const TrunkNode* parent = nullptr;
    for (const TrunkNode& n : nodes)
      if (n.id == node->parent) parent = &n;
    SplitCondition cond = *parent->split;
    cond.upper = (node->id == parent->right);
    conditions.push_back(cond);
    node = parent;
  }
  std::reverse(conditions.begin(), conditions.end());
  return conditions;
}

struct Candidate {
  int node_id = 0;
  Index region_pos = 0;
  Index covariate = 0;
  double threshold = 0.0;
};

/// Deterministic preference order among equal-deviance candidates.
bool tie_break_before(const Candidate& a, const Candidate& b) {
  if (a.covariate != b.covariate) return a.covariate < b.covariate;
  if (a.threshold != b.threshold) return a.threshold < b.threshold;
  return a.node_id < b.node_id;
}

RegionSet split_region_set(const RegionSet& current, Index region_pos, Index covariate,
                           double threshold) {
  const Region& target = current.regions[static_cast<std::size_t>(region_pos)];
  Region left = target;
  Region right = target;
  left.conditions.push_back(SplitCondition{covariate, false, threshold});
  right.conditions.push_back(SplitCondition{covariate, true, threshold});
  if (target.node_id > 0) {
    left.node_id = 2 * target.node_id;
    right.node_id = 2 * target.node_id + 1;
  }
  RegionSet out;
  out.regions.reserve(current.regions.size() + 1);
  for (Index t = 0; t < current.size(); ++t) {
    if (t == region_pos) {
      out.regions.push_back(left);
      out.regions.push_back(right);
    } else {
      out.regions.push_back(current.regions[static_cast<std::size_t>(t)]);
    }
  }
  const bool ids_usable = std::all_of(out.regions.begin(), out.regions.end(),
                                      [](const Region& r) { return r.node_id > 0; });
  if (ids_usable) {
    std::sort(out.regions.begin(), out.regions.end(),
              [](const Region& a, const Region& b) { return a.node_id < b.node_id; });
  }
  return out;
}

}  // namespace

std::vector<Index> TrunkSequence::split_covariates() const {
  std::vector<Index> out;
  for (const TrunkEntry& e : entries)
    if (e.split) out.push_back(e.split->covariate);
  return out;
}

std::vector<double> candidate_thresholds(const std::vector<double>& values) {
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  if (!sorted.empty()) sorted.pop_back();  // a split at the maximum leaves no right child
  return sorted;
}

bool stopping_rule(Index parent_size, Index left_size, Index right_size) {
  if (parent_size <= 4) return false;
  return std::min(left_size, right_size) >= ceil_sqrt(parent_size);
}

std::optional<double> evaluate_split(const RankingDataset& data, const RegionSet& current,
                                     Index region_index, Index covariate, double threshold) {
  if (region_index < 0 || region_index >= current.size())
    throw validation_error("evaluate_split: region index out of range");
  const RegionSet candidate = split_region_set(current, region_index, covariate, threshold);
  const DesignMatrix design = build_design(data, candidate);
  const GlmFit result = fit(design, tolerant_options());
  if (result.separated || !result.converged) return std::nullopt;
  return result.deviance;
}

RegionSet regions_at_step(const TrunkSequence& sequence, Index step) {
  RegionSet out;
  for (const TrunkNode& node : sequence.nodes) {
    if (node.created_at_step > step) continue;
    const bool terminal_here =
        node.is_terminal() ||
        // children exist but were created later than this step
        std::none_of(sequence.nodes.begin(), sequence.nodes.end(), [&](const TrunkNode& c) {
          return c.parent == node.id && c.created_at_step <= step;
        });
    if (terminal_here)
      out.regions.push_back(Region{path_conditions(sequence.nodes, node.id), node.id});
  }
  std::sort(out.regions.begin(), out.regions.end(),
            [](const Region& a, const Region& b) { return a.node_id < b.node_id; });
  return out;
}

TrunkSequence grow(const RankingDataset& data, const GrowConfig& config) {
  data.validate();
  if (config.max_terminal < 1) throw validation_error("grow: max_terminal must be >= 1");

  TrunkSequence sequence;
  sequence.approach = config.approach;

  TrunkNode root;
  root.id = 1;
  root.judges.resize(static_cast<std::size_t>(data.judge_count()));
  for (Index h = 0; h < data.judge_count(); ++h) root.judges[static_cast<std::size_t>(h)] = h;
  sequence.nodes.push_back(root);

  RegionSet regions = RegionSet::root_only();
  {
    const DesignMatrix design = build_design(data, regions);
    const GlmFit root_fit = fit(design);  // strict: root failures are fatal
    TrunkEntry entry;
    entry.regions = regions;
    entry.deviance = root_fit.deviance;
    entry.model = make_btrt_model(data, regions, design, root_fit);
    sequence.entries.push_back(std::move(entry));
  }

  std::set<Index> used_covariates;
  const Index P = data.covariate_count();

  while (static_cast<Index>(regions.regions.size()) < config.max_terminal) {
    // enumerate admissible candidates over the current terminal nodes
    std::vector<Candidate> candidates;
    for (Index pos = 0; pos < regions.size(); ++pos) {
      const Region& region = regions.regions[static_cast<std::size_t>(pos)];
      const TrunkNode* node = nullptr;
      for (TrunkNode& n : sequence.nodes)
        if (n.id == region.node_id) node = &n;
      const Index parent_size = static_cast<Index>(node->judges.size());
      if (parent_size <= 4) continue;
      for (Index p = 0; p < P; ++p) {
        if (config.approach == SplitApproach::one_split_only && used_covariates.count(p)) continue;
        std::vector<double> values;
        values.reserve(node->judges.size());
        for (Index h : node->judges) values.push_back(data.covariates(h, p));
        for (double s : candidate_thresholds(values)) {
          Index left = 0;
          for (double v : values)
            if (v <= s) ++left;
          if (stopping_rule(parent_size, left, parent_size - left))
            candidates.push_back(Candidate{region.node_id, pos, p, s});
        }
      }
    }
    if (candidates.empty()) break;

    std::vector<std::optional<double>> deviances(candidates.size());
    parallel_for(candidates.size(), config.threads, [&](std::size_t i) {
      const Candidate& c = candidates[i];
      deviances[i] = evaluate_split(data, regions, c.region_pos, c.covariate, c.threshold);
    });

    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (!deviances[i]) continue;
      if (!best || *deviances[i] < *deviances[*best] ||
          (*deviances[i] == *deviances[*best] && tie_break_before(candidates[i], candidates[*best])))
        best = i;
    }
    if (!best) break;  // every candidate infeasible

    const Candidate& chosen = candidates[*best];
    TrunkNode* parent = nullptr;
    for (TrunkNode& n : sequence.nodes)
      if (n.id == chosen.node_id) parent = &n;

    TrunkNode left_child;
    left_child.id = 2 * parent->id;
    left_child.parent = parent->id;
    left_child.depth = parent->depth + 1;
    TrunkNode right_child = left_child;
    right_child.id = 2 * parent->id + 1;
    for (Index h : parent->judges) {
      if (data.covariates(h, chosen.covariate) <= chosen.threshold)
        left_child.judges.push_back(h);
      else
        right_child.judges.push_back(h);
    }
    const int step = static_cast<int>(sequence.entries.size());
    left_child.created_at_step = step;
    right_child.created_at_step = step;
    parent->split = SplitCondition{chosen.covariate, false, chosen.threshold};
    parent->left = left_child.id;
    parent->right = right_child.id;
    sequence.nodes.push_back(left_child);
    sequence.nodes.push_back(right_child);

    regions = split_region_set(regions, chosen.region_pos, chosen.covariate, chosen.threshold);

    const DesignMatrix design = build_design(data, regions);
    const GlmFit refit = fit(design, tolerant_options());
    TrunkEntry entry;
    entry.split = SplitRecord{chosen.node_id, chosen.covariate, chosen.threshold};
    entry.regions = regions;
    entry.deviance = refit.deviance;
    entry.model = make_btrt_model(data, regions, design, refit);
    sequence.entries.push_back(std::move(entry));

    used_covariates.insert(chosen.covariate);
  }

  return sequence;
}

namespace {

std::string format_number(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

std::string ranking_label(const Ranking& r) {
  std::string out = "(";
  for (std::size_t i = 0; i < r.ranks.size(); ++i) {
    if (i) out += " ";
    out += std::to_string(r.ranks[i]);
  }
  out += ")";
  return out;
}

}  // namespace

void write_dot(std::ostream& os, const TrunkSequence& sequence, Index step,
               const RankingDataset& data) {
  if (step < 0 || step >= sequence.size())
    throw validation_error("write_dot: sequence entry out of range");
  const RegionSet regions = regions_at_step(sequence, step);
  std::map<int, Index> region_number;  // node id -> 1-based region index
  for (Index t = 0; t < regions.size(); ++t)
    region_number[regions.regions[static_cast<std::size_t>(t)].node_id] = t + 1;

  os << "digraph trunk {\n";
  os << "  node [shape=box, fontname=\"Helvetica\"];\n";
  for (const TrunkNode& node : sequence.nodes) {
    if (node.created_at_step > step) continue;
    std::vector<Ranking> members;
    for (Index h : node.judges) members.push_back(data.rankings[static_cast<std::size_t>(h)]);
    const ConsensusResult consensus = kemeny_consensus(members);
    os << "  n" << node.id << " [label=\"node " << node.id;
    auto number = region_number.find(node.id);
    if (number != region_number.end()) os << " (R" << number->second << ")";
    os << "\\nC = " << ranking_label(consensus.ranking) << "\\nh = " << node.judges.size()
       << ", tau_x = " << format_number(consensus.tau) << "\"];\n";
  }
  for (const TrunkNode& node : sequence.nodes) {
    if (node.created_at_step > step || node.is_terminal()) continue;
    bool children_shown = false;
    for (const TrunkNode& c : sequence.nodes)
      if (c.parent == node.id && c.created_at_step <= step) children_shown = true;
    if (!children_shown) continue;
    const std::string name =
        data.covariate_names[static_cast<std::size_t>(node.split->covariate)];
    os << "  n" << node.id << " -> n" << node.left << " [label=\"" << name
       << " <= " << format_number(node.split->threshold) << "\"];\n";
    os << "  n" << node.id << " -> n" << node.right << " [label=\"" << name << " > "
       << format_number(node.split->threshold) << "\"];\n";
  }
  os << "}\n";
}

}  // namespace btrt
