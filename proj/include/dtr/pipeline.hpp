#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dtr/analysis.hpp"
#include "dtr/config.hpp"
#include "dtr/parallel.hpp"

namespace dtr {

/// File-based pipeline behind the CLI subcommands. Every function reads its
/// inputs from, and writes its artifacts into, config.output_dir; missing
/// upstream files raise MissingArtifactError naming the producing subcommand.
/// Returns the list of files written.
std::vector<std::filesystem::path> run_simulate(const ExperimentConfig& config,
                                                ExecMode mode = ExecMode::Parallel);
std::vector<std::filesystem::path> run_fit(const ExperimentConfig& config,
                                           ExecMode mode = ExecMode::Parallel);
std::vector<std::filesystem::path> run_solve(const ExperimentConfig& config,
                                             ExecMode mode = ExecMode::Parallel);
std::vector<std::filesystem::path> run_sensitivity(const ExperimentConfig& config,
                                                   ExecMode mode = ExecMode::Parallel);
std::vector<std::filesystem::path> run_compare(const ExperimentConfig& config,
                                               ExecMode mode = ExecMode::Parallel);
std::vector<std::filesystem::path> run_report(const ExperimentConfig& config);

// Artifact serialization shared by the pipeline and its tests.

void write_cohort_csv(const std::filesystem::path& path,
                      const std::vector<CovariateProfile>& cohort,
                      const ExperimentConfig& config);
std::vector<CovariateProfile> read_cohort_csv(const std::filesystem::path& path);

void write_trajectories_csv(const std::filesystem::path& path,
                            const TrajectoryDataset& dataset,
                            const ExperimentConfig& config);
TrajectoryDataset read_trajectories_csv(const std::filesystem::path& path,
                                        int num_stages);

std::filesystem::path model_path(const std::filesystem::path& dir,
                                 const TransitionContext& context);
TransitionModelSet load_models(const ExperimentConfig& config);

}  // namespace dtr
