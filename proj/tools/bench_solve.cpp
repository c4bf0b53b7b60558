// Benchmark of the data-parallel kernels: per-patient cohort solving and the
// sensitivity sweep, serial reference vs OpenMP.

#include <chrono>
#include <cstdio>

#include "dtr/analysis.hpp"
#include "dtr/config.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

int main() {
  const dtr::ExperimentConfig config = dtr::default_config();
  const std::uint64_t seed = config.seed;

  const auto cohort = dtr::sample_cohort(config.covariates, 2000, seed);
  const auto dataset = dtr::simulate_trajectories(
      config.dynamics, cohort, config.stage_actions(), config.horizon, seed);
  const auto models = dtr::fit_transition_models(dataset, config.stage_actions(),
                                                 config.design_columns());
  const dtr::RewardParameters params = config.reward_parameters();

  std::printf("%-28s %10s %10s %8s\n", "kernel", "serial[s]", "openmp[s]", "speedup");

  {
    auto start = Clock::now();
    const auto serial = dtr::solve_cohort(cohort, models, params, config.horizon,
                                          dtr::ExecMode::Serial);
    const double t_serial = seconds_since(start);

    start = Clock::now();
    const auto parallel = dtr::solve_cohort(cohort, models, params, config.horizon,
                                            dtr::ExecMode::Parallel);
    const double t_parallel = seconds_since(start);

    bool identical = serial.size() == parallel.size();
    for (std::size_t i = 0; identical && i < serial.size(); ++i) {
      identical = serial[i].policy == parallel[i].policy &&
                  serial[i].value == parallel[i].value;
    }
    std::printf("%-28s %10.3f %10.3f %7.2fx %s\n", "solve_cohort (n=2000)", t_serial,
                t_parallel, t_serial / t_parallel,
                identical ? "" : "MISMATCH");
  }

  {
    dtr::SensitivityRequest request;
    request.covariate = "age";
    request.grid = dtr::default_sensitivity_grid("age", config.covariates, 21, 3.0);
    request.entries = {{4, 1}, {3, 2}, {2, 3}, {5, 3}};
    request.reps = 200;

    auto start = Clock::now();
    const auto serial = dtr::sensitivity_curves(request, models, config.covariates,
                                                params, config.horizon, seed,
                                                dtr::ExecMode::Serial);
    const double t_serial = seconds_since(start);

    start = Clock::now();
    const auto parallel = dtr::sensitivity_curves(request, models, config.covariates,
                                                  params, config.horizon, seed,
                                                  dtr::ExecMode::Parallel);
    const double t_parallel = seconds_since(start);

    bool identical = true;
    for (std::size_t e = 0; e < serial.size(); ++e) {
      identical = identical && serial[e].proportion == parallel[e].proportion;
    }
    std::printf("%-28s %10.3f %10.3f %7.2fx %s\n", "sensitivity (21x200x4)", t_serial,
                t_parallel, t_serial / t_parallel,
                identical ? "" : "MISMATCH");
  }
  return 0;
}
