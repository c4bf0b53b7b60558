#include "dtr/cohort.hpp"

#include <stdexcept>

namespace dtr {

namespace {

double pinned_or(const CovariatePins* pins, const std::string& name, double drawn) {
  if (pins == nullptr) return drawn;
  const auto it = pins->find(name);
  return it == pins->end() ? drawn : it->second;
}

}  // namespace

CovariateProfile sample_profile(const CovariateSpec& spec, Rng& rng,
                                const CovariatePins* pins) {
  CovariateProfile profile;
  profile.age = pinned_or(pins, "age", rng.normal(spec.age_mean, spec.age_sd));
  profile.blood_pressure =
      pinned_or(pins, "blood_pressure",
                rng.normal(profile.age + spec.bp_offset, spec.bp_sd));
  profile.exposure = pinned_or(pins, "exposure",
                               rng.bernoulli(spec.exposure_rate) ? 1.0 : 0.0);
  profile.hormone =
      pinned_or(pins, "hormone", rng.normal(spec.hormone_mean, spec.hormone_sd));
  profile.income =
      pinned_or(pins, "income",
                spec.income_offset +
                    spec.income_multiplier *
                        rng.pareto(spec.income_pareto_scale, spec.income_pareto_shape));
  for (const auto& column : spec.extra) {
    profile.extra_names.push_back(column.name);
    profile.extra.push_back(
        pinned_or(pins, column.name, rng.bernoulli(column.rate) ? 1.0 : 0.0));
  }
  profile.validate();
  return profile;
}

std::vector<CovariateProfile> sample_cohort(const CovariateSpec& spec, std::size_t n,
                                            std::uint64_t seed) {
  std::vector<CovariateProfile> cohort;
  cohort.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(substream_seed(seed, static_cast<std::uint64_t>(StreamTag::Cohort), i));
    cohort.push_back(sample_profile(spec, rng));
  }
  return cohort;
}

std::vector<CovariateProfile> fixed_income_cohort(const CovariateSpec& spec,
                                                  double theta, std::size_t n,
                                                  std::uint64_t seed) {
  if (theta <= 0.0) throw std::invalid_argument("fixed income must be positive");
  const CovariatePins pins{{"income", theta}};
  std::vector<CovariateProfile> cohort;
  cohort.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(substream_seed(seed, static_cast<std::uint64_t>(StreamTag::Cohort), i));
    cohort.push_back(sample_profile(spec, rng, &pins));
  }
  return cohort;
}

const GroundTruthDynamics::Params& GroundTruthDynamics::params_for(int s, int a) const {
  const auto it = params.find({s, a});
  if (it == params.end()) {
    throw ConfigError("ground truth has no parameters for state " + std::to_string(s) +
                      ", action " + std::to_string(a));
  }
  return it->second;
}

std::vector<double> GroundTruthDynamics::kernel_row(
    int s, int a, const CovariateProfile& profile) const {
  const Params& p = params_for(s, a);
  double eta = 0.0;
  for (std::size_t k = 0; k < design.size(); ++k) {
    eta += p.beta[static_cast<Eigen::Index>(k)] *
           (profile.value(design[k].name) - design[k].center) / design[k].scale;
  }
  return category_probabilities(p.alpha, eta);
}

void GroundTruthDynamics::validate() const {
  if (num_stages < 2) throw std::invalid_argument("ground truth needs J >= 2");
  for (const auto& [key, p] : params) {
    if (p.alpha.size() != num_stages - 1) {
      throw std::invalid_argument("ground truth alpha has wrong length");
    }
    for (Eigen::Index j = 1; j < p.alpha.size(); ++j) {
      if (p.alpha[j] <= p.alpha[j - 1]) {
        throw std::invalid_argument("ground truth alpha must be strictly increasing");
      }
    }
    if (p.beta.size() != static_cast<Eigen::Index>(design.size())) {
      throw std::invalid_argument("ground truth beta does not match the design");
    }
  }
  for (const auto& column : design) {
    if (column.scale == 0.0) throw std::invalid_argument("design scale must be nonzero");
  }
}

TrajectoryDataset simulate_trajectories(const GroundTruthDynamics& truth,
                                        const std::vector<CovariateProfile>& cohort,
                                        const ActionSet& actions, int horizon,
                                        std::uint64_t seed,
                                        const SimulationOptions& options) {
  truth.validate();
  if (horizon < 2) throw std::invalid_argument("horizon must be >= 2");
  const int num_stages = truth.num_stages;
  if (!options.initial_distribution.empty() &&
      options.initial_distribution.size() != static_cast<std::size_t>(num_stages)) {
    throw std::invalid_argument("initial distribution must cover every stage");
  }

  TrajectoryDataset dataset;
  dataset.profiles = cohort;
  dataset.horizon = horizon;
  dataset.num_stages = num_stages;
  const std::size_t per_patient = static_cast<std::size_t>(horizon - 1);
  dataset.records.resize(cohort.size() * per_patient);

  parallel_for(cohort.size(), options.mode, [&](std::size_t i) {
    Rng rng(substream_seed(seed, static_cast<std::uint64_t>(StreamTag::Trajectory), i));
    int state;
    if (options.initial_distribution.empty()) {
      state = static_cast<int>(rng.uniform_index(num_stages)) + 1;
    } else {
      state = static_cast<int>(rng.categorical(options.initial_distribution)) + 1;
    }
    for (int t = 1; t <= horizon - 1; ++t) {
      const auto& admissible = actions.for_state(state);
      int action;
      if (options.behavior) {
        action = options.behavior(rng, t, state, admissible);
        if (!actions.is_admissible(state, action)) {
          throw InvalidPolicyError("behavior rule chose an inadmissible action");
        }
      } else {
        action = admissible[rng.uniform_index(admissible.size())];
      }
      const auto row = truth.kernel_row(state, action, cohort[i]);
      const int next = static_cast<int>(rng.categorical(row)) + 1;
      dataset.records[i * per_patient + static_cast<std::size_t>(t - 1)] =
          TrajectoryRecord{static_cast<int>(i), t, state, action, next};
      state = next;
    }
  });
  return dataset;
}

OrdinalDataset to_ordinal_dataset(const TrajectoryDataset& dataset, int s, int a,
                                  const std::vector<std::string>& columns, int epoch) {
  std::vector<const TrajectoryRecord*> rows;
  for (const auto& record : dataset.records) {
    if (record.state == s && record.action == a &&
        (epoch == 0 || record.t == epoch)) {
      rows.push_back(&record);
    }
  }
  OrdinalDataset out;
  out.num_categories = dataset.num_stages;
  out.context = TransitionContext{epoch, s, a};
  out.x.resize(static_cast<Eigen::Index>(rows.size()),
               static_cast<Eigen::Index>(columns.size()));
  out.y.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.x.row(static_cast<Eigen::Index>(i)) =
        design_vector(dataset.profiles[rows[i]->patient_id], columns).transpose();
    out.y.push_back(rows[i]->next_state);
  }
  return out;
}

TransitionCounts count_transitions(const TrajectoryDataset& dataset,
                                   const CovariateGrid& grid,
                                   const AugmentedStateSpace& space,
                                   const ActionSet& stage_actions) {
  TransitionCounts counts;
  counts.counts.resize(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) {
    const int stage = space.split(static_cast<int>(i) + 1).first;
    counts.counts[i].assign(stage_actions.for_state(stage).size(),
                            std::vector<double>(space.size(), 0.0));
  }
  for (const auto& record : dataset.records) {
    const auto cell = grid.cell_of(dataset.profiles[record.patient_id]);
    const int origin = space.label(record.state, cell);
    const int destination = space.label(record.next_state, cell);
    const int k = stage_actions.index_of(record.state, record.action);
    counts.counts[origin - 1][k][destination - 1] += 1.0;
  }
  return counts;
}

}  // namespace dtr
