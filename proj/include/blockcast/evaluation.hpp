#pragma once

#include <Eigen/Core>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace blockcast {

inline constexpr double kProactiveHandoffMs = 11.4;
inline constexpr double kReactiveHandoffMs = 222.8;

double top1(std::span<const int> preds, std::span<const int> targets);

struct MaeStd {
  double mae = 0.0;
  double std = 0.0;  // population standard deviation of |error|
};
MaeStd mae_std(std::span<const double> preds, std::span<const double> targets);

struct Confusion {
  std::vector<int> classes;
  Eigen::MatrixXd counts;      // row = ground truth, column = prediction
  Eigen::MatrixXd normalized;  // rows sum to 1 where the row has samples
};
Confusion confusion(std::span<const int> preds, std::span<const int> targets,
                    std::span<const int> classes);

// Average hand-off latency given the proactive prediction accuracy p.
double latency_ms(double accuracy);

// One (problem, horizon) evaluation.
struct ProblemResult {
  int problem = 1;
  int horizon = 1;
  std::size_t samples = 0;       // windows evaluated
  std::size_t predictions = 0;   // windows with a usable prediction
  std::optional<double> accuracy;
  std::optional<MaeStd> error;
  std::optional<Confusion> confusion;
  std::optional<double> latency;
};

ProblemResult evaluate_classification(int problem, int horizon, std::span<const int> preds,
                                      std::span<const int> targets, std::span<const int> classes);
// Predictions of nullopt (no crossing found) are left out of the error.
ProblemResult evaluate_regression(int horizon, std::span<const std::optional<double>> preds,
                                  std::span<const double> targets);

struct ReportFiles {
  std::string json;
  std::string text;
  std::string curves_csv;
};

// Deterministic rendering; results are ordered by (problem, horizon).
ReportFiles emit_report(std::vector<ProblemResult> results, const std::string& manifest_json,
                        const std::string& version);

}  // namespace blockcast
