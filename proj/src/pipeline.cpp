#include "dtr/pipeline.hpp"

#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

#include "dtr/csv.hpp"
#include "dtr/stats.hpp"
#include "dtr/svg.hpp"

namespace dtr {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

std::vector<std::pair<std::string, std::string>> provenance(
    const ExperimentConfig& config) {
  return {{"config_hash", config_hash(config)},
          {"seed", std::to_string(config.seed)}};
}

void require_artifact(const fs::path& path, const std::string& producer) {
  if (!fs::exists(path)) throw MissingArtifactError(path.string(), producer);
}

std::string format_income(double theta) {
  // Incomes are whole currency units in the studies; keep file names tidy.
  return format_double(theta);
}

double parse_double(const std::string& field) { return std::stod(field); }

}  // namespace

void write_cohort_csv(const fs::path& path, const std::vector<CovariateProfile>& cohort,
                      const ExperimentConfig& config) {
  CsvTable table;
  table.comments = provenance(config);
  table.header = {"patient_id", "age", "blood_pressure", "exposure", "hormone", "income"};
  for (const auto& extra : config.covariates.extra) table.header.push_back(extra.name);
  for (std::size_t i = 0; i < cohort.size(); ++i) {
    const auto& p = cohort[i];
    std::vector<std::string> row = {std::to_string(i),
                                    format_double(p.age),
                                    format_double(p.blood_pressure),
                                    format_double(p.exposure),
                                    format_double(p.hormone),
                                    format_double(p.income)};
    for (double v : p.extra) row.push_back(format_double(v));
    table.rows.push_back(std::move(row));
  }
  table.write(path);
}

namespace {

CovariateProfile profile_from_row(const CsvTable& table,
                                  const std::vector<std::string>& row,
                                  std::size_t first_covariate_column) {
  CovariateProfile p;
  p.age = parse_double(row.at(table.column("age")));
  p.blood_pressure = parse_double(row.at(table.column("blood_pressure")));
  p.exposure = parse_double(row.at(table.column("exposure")));
  p.hormone = parse_double(row.at(table.column("hormone")));
  p.income = parse_double(row.at(table.column("income")));
  for (std::size_t c = first_covariate_column + 5; c < table.header.size(); ++c) {
    p.extra_names.push_back(table.header[c]);
    p.extra.push_back(parse_double(row.at(c)));
  }
  return p;
}

}  // namespace

std::vector<CovariateProfile> read_cohort_csv(const fs::path& path) {
  const CsvTable table = CsvTable::read(path);
  std::vector<CovariateProfile> cohort;
  cohort.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    cohort.push_back(profile_from_row(table, row, 1));
  }
  return cohort;
}

void write_trajectories_csv(const fs::path& path, const TrajectoryDataset& dataset,
                            const ExperimentConfig& config) {
  CsvTable table;
  table.comments = provenance(config);
  table.comments.emplace_back("horizon", std::to_string(dataset.horizon));
  table.header = {"patient_id", "t",       "state",  "action",
                  "next_state", "age",     "blood_pressure", "exposure",
                  "hormone",    "income"};
  for (const auto& extra : config.covariates.extra) table.header.push_back(extra.name);
  for (const auto& record : dataset.records) {
    const auto& p = dataset.profiles[record.patient_id];
    std::vector<std::string> row = {std::to_string(record.patient_id),
                                    std::to_string(record.t),
                                    std::to_string(record.state),
                                    std::to_string(record.action),
                                    std::to_string(record.next_state),
                                    format_double(p.age),
                                    format_double(p.blood_pressure),
                                    format_double(p.exposure),
                                    format_double(p.hormone),
                                    format_double(p.income)};
    for (double v : p.extra) row.push_back(format_double(v));
    table.rows.push_back(std::move(row));
  }
  table.write(path);
}

TrajectoryDataset read_trajectories_csv(const fs::path& path, int num_stages) {
  const CsvTable table = CsvTable::read(path);
  TrajectoryDataset dataset;
  dataset.num_stages = num_stages;
  std::map<int, CovariateProfile> profiles;
  for (const auto& row : table.rows) {
    TrajectoryRecord record;
    record.patient_id = std::stoi(row.at(table.column("patient_id")));
    record.t = std::stoi(row.at(table.column("t")));
    record.state = std::stoi(row.at(table.column("state")));
    record.action = std::stoi(row.at(table.column("action")));
    record.next_state = std::stoi(row.at(table.column("next_state")));
    dataset.records.push_back(record);
    dataset.horizon = std::max(dataset.horizon, record.t + 1);
    profiles.emplace(record.patient_id, profile_from_row(table, row, 5));
  }
  for (const auto& [key, value] : table.comments) {
    if (key == "horizon") dataset.horizon = std::stoi(value);
  }
  if (profiles.empty()) return dataset;
  const int max_id = profiles.rbegin()->first;
  dataset.profiles.resize(max_id + 1);
  for (auto& [id, profile] : profiles) dataset.profiles[id] = std::move(profile);
  return dataset;
}

fs::path model_path(const fs::path& dir, const TransitionContext& context) {
  std::string name = "model_";
  if (context.epoch != 0) name += "t" + std::to_string(context.epoch) + "_";
  name += "s" + std::to_string(context.state) + "_a" + std::to_string(context.action) +
          ".json";
  return dir / name;
}

TransitionModelSet load_models(const ExperimentConfig& config) {
  const fs::path dir = fs::path(config.output_dir) / "models";
  TransitionModelSet set;
  set.per_epoch = config.fit_per_epoch;
  set.design_columns = config.design_columns();
  const ActionSet actions = config.stage_actions();
  for (int s = 1; s <= config.num_stages; ++s) {
    for (int a : actions.for_state(s)) {
      std::vector<int> epochs = {0};
      if (config.fit_per_epoch) {
        epochs.clear();
        for (int t = 1; t <= config.horizon - 1; ++t) epochs.push_back(t);
      }
      for (int t : epochs) {
        const fs::path path = model_path(dir, TransitionContext{t, s, a});
        require_artifact(path, "fit");
        std::ifstream in(path);
        json doc;
        in >> doc;
        set.insert(FittedOrdinalModel::from_json(doc));
      }
    }
  }
  return set;
}

std::vector<fs::path> run_simulate(const ExperimentConfig& config, ExecMode mode) {
  const fs::path out(config.output_dir);
  fs::create_directories(out);

  const auto cohort = sample_cohort(config.covariates, config.training_size, config.seed);
  SimulationOptions options;
  options.initial_distribution = config.initial_distribution;
  options.mode = mode;
  const auto dataset = simulate_trajectories(config.dynamics, cohort,
                                             config.stage_actions(), config.horizon,
                                             config.seed, options);

  const fs::path cohort_path = out / "cohort.csv";
  const fs::path trajectories_path = out / "trajectories.csv";
  write_cohort_csv(cohort_path, cohort, config);
  write_trajectories_csv(trajectories_path, dataset, config);
  return {cohort_path, trajectories_path};
}

std::vector<fs::path> run_fit(const ExperimentConfig& config, ExecMode mode) {
  const fs::path out(config.output_dir);
  const fs::path trajectories_path = out / "trajectories.csv";
  require_artifact(trajectories_path, "simulate");

  const TrajectoryDataset dataset =
      read_trajectories_csv(trajectories_path, config.num_stages);
  const TransitionModelSet set =
      fit_transition_models(dataset, config.stage_actions(), config.design_columns(),
                            config.fitting, config.fit_per_epoch, mode);

  const fs::path dir = out / "models";
  fs::create_directories(dir);
  std::vector<fs::path> written;
  for (const auto& [key, model] : set.models) {
    json doc = model.to_json();
    doc["config_hash"] = config_hash(config);
    doc["seed"] = config.seed;
    const fs::path path = model_path(dir, model.context);
    std::ofstream file(path, std::ios::binary);
    file << doc.dump(2) << "\n";
    written.push_back(path);
  }
  return written;
}

namespace {

void append_action_rows(CsvTable& table, int patient_id,
                        const std::vector<std::vector<int>>& matrix) {
  for (std::size_t t = 0; t < matrix.size(); ++t) {
    std::vector<std::string> row = {std::to_string(patient_id), std::to_string(t + 1)};
    for (int action : matrix[t]) row.push_back(std::to_string(action));
    table.rows.push_back(std::move(row));
  }
}

std::vector<fs::path> solve_nonadaptive(const ExperimentConfig& config,
                                        const std::vector<CovariateProfile>& cohort,
                                        ExecMode mode) {
  const TransitionModelSet models = load_models(config);
  const auto solutions = solve_cohort(cohort, models, config.reward_parameters(),
                                      config.horizon, mode);

  CsvTable table;
  table.comments = provenance(config);
  table.comments.emplace_back("approach", "nonadaptive");
  table.header = {"patient_id", "t"};
  for (int s = 1; s <= config.num_stages; ++s) {
    table.header.push_back("stage_" + std::to_string(s));
  }
  for (std::size_t i = 0; i < solutions.size(); ++i) {
    append_action_rows(table, static_cast<int>(i), solutions[i].policy.d);
  }
  const fs::path path = fs::path(config.output_dir) / "actions.csv";
  table.write(path);
  return {path};
}

std::vector<fs::path> solve_adaptive(const ExperimentConfig& config,
                                     const std::vector<CovariateProfile>& cohort,
                                     ExecMode mode) {
  const fs::path out(config.output_dir);
  const fs::path trajectories_path = out / "trajectories.csv";
  require_artifact(trajectories_path, "simulate");
  const TrajectoryDataset dataset =
      read_trajectories_csv(trajectories_path, config.num_stages);

  const CovariateGrid grid = CovariateGrid::tertiles(cohort, config.grid_covariates);
  const AugmentedStateSpace space(config.num_stages, grid.cell_count());
  const ActionSet actions = config.stage_actions();
  const TransitionCounts counts = count_transitions(dataset, grid, space, actions);

  // The empirical kernel is shared; each patient's income still sets the
  // affordability term of the reward.
  std::vector<std::vector<std::vector<int>>> matrices(cohort.size());
  std::vector<std::exception_ptr> failures(cohort.size());
  parallel_for(cohort.size(), mode, [&](std::size_t i) {
    try {
      RewardParameters params = config.reward_parameters();
      params.income = cohort[i].income;
      const FiniteHorizonMDP mdp =
          build_adaptive_mdp(counts, space, actions, params, config.horizon);
      const auto projection = stage_projection(backward_induction(mdp), space);
      const std::size_t cell = grid.cell_of(cohort[i]);
      matrices[i].assign(config.horizon - 1, std::vector<int>(config.num_stages, 0));
      for (int t = 0; t < config.horizon - 1; ++t) {
        for (int s = 0; s < config.num_stages; ++s) {
          matrices[i][t][s] = projection[t][s][cell];
        }
      }
    } catch (...) {
      failures[i] = std::current_exception();
    }
  });
  for (const auto& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }

  CsvTable table;
  table.comments = provenance(config);
  table.comments.emplace_back("approach", "adaptive");
  table.comments.emplace_back("grid_cells", std::to_string(grid.cell_count()));
  table.header = {"patient_id", "t"};
  for (int s = 1; s <= config.num_stages; ++s) {
    table.header.push_back("stage_" + std::to_string(s));
  }
  for (std::size_t i = 0; i < matrices.size(); ++i) {
    append_action_rows(table, static_cast<int>(i), matrices[i]);
  }
  const fs::path path = out / "actions.csv";
  table.write(path);
  return {path};
}

}  // namespace

std::vector<fs::path> run_solve(const ExperimentConfig& config, ExecMode mode) {
  const fs::path cohort_path = fs::path(config.output_dir) / "cohort.csv";
  require_artifact(cohort_path, "simulate");
  const auto cohort = read_cohort_csv(cohort_path);
  if (config.approach == Approach::Adaptive) {
    return solve_adaptive(config, cohort, mode);
  }
  return solve_nonadaptive(config, cohort, mode);
}

std::vector<fs::path> run_sensitivity(const ExperimentConfig& config, ExecMode mode) {
  const TransitionModelSet models = load_models(config);
  const RewardParameters params = config.reward_parameters();

  std::vector<fs::path> written;
  for (const auto& request_config : config.sensitivity) {
    SensitivityRequest request;
    request.covariate = request_config.covariate;
    request.grid = default_sensitivity_grid(request_config.covariate, config.covariates,
                                            request_config.points,
                                            request_config.span_sd);
    request.entries = request_config.entries;
    request.reps = request_config.reps;
    const auto curves = sensitivity_curves(request, models, config.covariates, params,
                                           config.horizon, config.seed, mode);
    for (const auto& curve : curves) {
      const std::string stem = "sensitivity_" + curve.covariate + "_t" +
                               std::to_string(curve.entry_t) + "_s" +
                               std::to_string(curve.entry_stage);
      CsvTable table;
      table.comments = provenance(config);
      table.comments.emplace_back("covariate", curve.covariate);
      table.comments.emplace_back("entry", std::to_string(curve.entry_t) + "," +
                                               std::to_string(curve.entry_stage));
      table.comments.emplace_back("reps", std::to_string(curve.reps));
      table.header = {curve.covariate, "proportion", "lower", "upper"};
      for (std::size_t g = 0; g < curve.grid.size(); ++g) {
        table.rows.push_back({format_double(curve.grid[g]),
                              format_double(curve.proportion[g]),
                              format_double(curve.lower[g]),
                              format_double(curve.upper[g])});
      }
      const fs::path csv_path = fs::path(config.output_dir) / (stem + ".csv");
      table.write(csv_path);
      written.push_back(csv_path);

      LinePlot plot;
      plot.title = "Treatment proportion at entry (" + std::to_string(curve.entry_t) +
                   ", " + std::to_string(curve.entry_stage) + ")";
      plot.x_label = curve.covariate;
      plot.y_label = "proportion of treatment action";
      plot.comments = provenance(config);
      plot.bands.push_back({curve.grid, curve.lower, curve.upper, "#1f77b4"});
      plot.series.push_back({curve.grid, curve.proportion, "#1f77b4", ""});
      const fs::path svg_path = fs::path(config.output_dir) / (stem + ".svg");
      plot.write(svg_path);
      written.push_back(svg_path);
    }
  }
  return written;
}

std::vector<fs::path> run_compare(const ExperimentConfig& config, ExecMode mode) {
  const TransitionModelSet models = load_models(config);
  const RewardParameters params = config.reward_parameters();

  std::vector<fs::path> written;
  for (const auto& pair : config.compare) {
    const IncomeComparisonTable table =
        income_comparison(pair.theta_lo, pair.theta_hi, pair.group_size, models,
                          config.covariates, params, config.horizon, config.seed, mode);
    const auto verdicts = dominance_summary(table);

    const std::string stem =
        "compare_" + format_income(pair.theta_lo) + "_" + format_income(pair.theta_hi);

    CsvTable csv;
    csv.comments = provenance(config);
    csv.comments.emplace_back("theta_lo", format_double(table.theta_lo));
    csv.comments.emplace_back("theta_hi", format_double(table.theta_hi));
    csv.comments.emplace_back("group_size", std::to_string(table.group_size));
    for (const auto& verdict : verdicts) {
      std::string note = verdict.all_ties               ? "ties"
                         : verdict.hi_weakly_dominates ? "high income dominates"
                                                        : "mixed";
      if (!verdict.crossover_epochs.empty()) {
        note += "; crossovers at t =";
        for (int t : verdict.crossover_epochs) note += " " + std::to_string(t);
      }
      csv.comments.emplace_back("dominance_stage_" + std::to_string(verdict.stage), note);
    }
    csv.header = {"t", "stage", "proportion_lo", "proportion_hi"};
    for (std::size_t t = 0; t < table.lo.size(); ++t) {
      for (std::size_t s = 0; s < table.lo[t].size(); ++s) {
        csv.rows.push_back({std::to_string(t + 1), std::to_string(s + 1),
                            format_double(table.lo[t][s]),
                            format_double(table.hi[t][s])});
      }
    }
    const fs::path csv_path = fs::path(config.output_dir) / (stem + ".csv");
    csv.write(csv_path);
    written.push_back(csv_path);

    for (int s = 1; s <= config.num_stages; ++s) {
      LinePlot plot;
      plot.title = "Treatment proportion over time, stage " + std::to_string(s);
      plot.x_label = "observation time";
      plot.y_label = "proportion of treatment action";
      plot.comments = provenance(config);
      std::vector<double> ts(table.lo.size());
      std::vector<double> lo(table.lo.size());
      std::vector<double> hi(table.lo.size());
      for (std::size_t t = 0; t < table.lo.size(); ++t) {
        ts[t] = static_cast<double>(t + 1);
        lo[t] = table.lo[t][s - 1];
        hi[t] = table.hi[t][s - 1];
      }
      plot.series.push_back(
          {ts, lo, "#1f4fd7", "income " + format_income(pair.theta_lo)});
      plot.series.push_back(
          {ts, hi, "#0c6b2e", "income " + format_income(pair.theta_hi)});
      const fs::path svg_path =
          fs::path(config.output_dir) / (stem + "_stage" + std::to_string(s) + ".svg");
      plot.write(svg_path);
      written.push_back(svg_path);
    }
  }
  return written;
}

std::vector<fs::path> run_report(const ExperimentConfig& config) {
  const fs::path out(config.output_dir);
  fs::create_directories(out);

  json manifest;
  manifest["config_hash"] = config_hash(config);
  manifest["seed"] = config.seed;
  manifest["versions"] = {{"dtr", kVersion},
                          {"compiler", __VERSION__},
                          {"json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                       std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                       std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
  manifest["config"] = config.to_json();

  std::vector<std::string> outputs;
  for (const auto& entry : fs::recursive_directory_iterator(out)) {
    if (entry.is_regular_file() && entry.path().filename() != "manifest.json") {
      outputs.push_back(fs::relative(entry.path(), out).string());
    }
  }
  std::sort(outputs.begin(), outputs.end());
  manifest["outputs"] = outputs;

  const fs::path path = out / "manifest.json";
  std::ofstream file(path, std::ios::binary);
  file << manifest.dump(2) << "\n";
  return {path};
}

}  // namespace dtr
