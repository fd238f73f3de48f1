#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ispls/simulate.hpp"
#include "ispls/types.hpp"

namespace ispls {

enum class Method {
  MetaPls,
  MetaSpls,
  PooledSpls,
  IsplsHomoM,
  IsplsHomoS,
  IsplsHeteroM,
  IsplsHeteroS,
};

const std::vector<Method>& all_methods();
std::string method_name(Method m);
std::optional<Method> method_from_name(const std::string& name);

// Per-study outputs of one method on one dataset collection.
struct MethodFit {
  std::vector<VectorXd> directions;
  std::vector<MatrixXd> beta;
  std::vector<std::vector<bool>> selected;
};

// meta_pls: per-study PLS (dense); meta_spls: per-study SPLS with eta CV;
// pooled_spls: one SPLS on stacked rows, copied to every study; ispls_*:
// fit_ispls at CV-tuned (mu1, mu2) over default_grid. `seed` drives all fold
// assignments.
MethodFit run_method(Method m, const MultiStudyData& data, std::uint64_t seed,
                     int workers = 0);

struct StudyMetrics {
  double mspe = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
};

struct EvalResult {
  std::vector<StudyMetrics> per_study;
  StudyMetrics mean;
};

EvalResult evaluate(const MethodFit& fit, const GroundTruth& truth,
                    const MultiStudyData& test);

struct BenchmarkRow {
  std::string scenario;
  std::string method;
  int replicate = 0;
  int study = 0;  // -1 marks a failed (method, replicate) cell
  double mspe = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
  bool failed = false;
};

struct AggregateRow {
  std::string scenario;
  std::string method;
  std::size_t replicates = 0;  // successful replicates
  double mspe_mean = 0.0, mspe_sd = 0.0;
  double sensitivity_mean = 0.0, sensitivity_sd = 0.0;
  double specificity_mean = 0.0, specificity_sd = 0.0;
};

struct LoadingRow {
  std::string scenario;
  std::string method;
  int study = 0;
  int variable = 0;
  double loading = 0.0;
};

struct BenchmarkReport {
  std::vector<BenchmarkRow> rows;
  std::vector<AggregateRow> aggregate;
  std::vector<LoadingRow> loadings;  // replicate 0 directions
};

std::string scenario_label(const ScenarioSpec& spec);
std::string long_table_csv(const BenchmarkReport& report);
std::string aggregate_table_csv(const BenchmarkReport& report);
std::string loadings_table_csv(const BenchmarkReport& report);

// For each (scenario, replicate): fresh truth, independent train/test draws,
// every method tuned and fitted on train and scored on test. Deterministic
// given seed, independent of worker count.
BenchmarkReport run_benchmark(const std::vector<ScenarioSpec>& scenarios,
                              const std::vector<Method>& methods, int replicates,
                              std::uint64_t seed, int workers = 0);

struct OoiGene {
  std::string method;
  int variable = 0;
  double ooi = 0.0;  // fraction of resamples selecting the variable in >= 1 study
};

struct OoiMethodSummary {
  std::string method;
  double median_ooi = 0.0;
  double mean_rmse = 0.0;
};

struct OoiReport {
  std::vector<OoiGene> genes;
  std::vector<OoiMethodSummary> summary;
};

std::string ooi_genes_csv(const OoiReport& report);
std::string ooi_summary_csv(const OoiReport& report);

// Repeated train/test splits per study (fraction `split` for training);
// records selection frequency per variable and held-out RMSE per method.
OoiReport ooi_study(const MultiStudyData& data, const std::vector<Method>& methods,
                    int resamples, double split, std::uint64_t seed, int workers = 0);

// Sign-aligned, renormalized average of per-study directions (diagnostic
// combination; not used by the benchmark metrics).
VectorXd combined_direction(const std::vector<VectorXd>& directions);

}  // namespace ispls
