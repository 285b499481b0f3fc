#include "blockcast/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <sstream>
#include <tuple>

#include "blockcast/error.hpp"
#include "blockcast/format.hpp"

namespace blockcast {

namespace {

template <typename A, typename B>
void require_pairs(std::span<A> preds, std::span<B> targets, const char* what) {
  if (preds.size() != targets.size()) throw DomainError(std::string(what) + ": length mismatch");
  if (preds.empty()) throw DomainError(std::string(what) + ": empty input");
}

const char* problem_name(int problem) {
  switch (problem) {
    case 1: return "occurrence";
    case 2: return "instance";
    case 3: return "severity";
    case 4: return "direction";
    default: return "unknown";
  }
}

}  // namespace

double top1(std::span<const int> preds, std::span<const int> targets) {
  require_pairs(preds, targets, "top1");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) hits += preds[i] == targets[i];
  return static_cast<double>(hits) / static_cast<double>(preds.size());
}

MaeStd mae_std(std::span<const double> preds, std::span<const double> targets) {
  require_pairs(preds, targets, "mae_std");
  const auto n = static_cast<Eigen::Index>(preds.size());
  const Eigen::ArrayXd p = Eigen::Map<const Eigen::ArrayXd>(preds.data(), n);
  const Eigen::ArrayXd t = Eigen::Map<const Eigen::ArrayXd>(targets.data(), n);
  const Eigen::ArrayXd err = (t - p).abs();
  const double mae = err.mean();
  return {mae, std::sqrt((err - mae).square().mean())};
}

Confusion confusion(std::span<const int> preds, std::span<const int> targets,
                    std::span<const int> classes) {
  require_pairs(preds, targets, "confusion");
  Confusion c;
  c.classes.assign(classes.begin(), classes.end());
  const auto k = static_cast<Eigen::Index>(classes.size());
  auto index = [&](int label) {
    const auto it = std::find(classes.begin(), classes.end(), label);
    if (it == classes.end()) throw DomainError("confusion: unknown label " + std::to_string(label));
    return static_cast<Eigen::Index>(it - classes.begin());
  };
  c.counts = Eigen::MatrixXd::Zero(k, k);
  for (std::size_t i = 0; i < preds.size(); ++i) c.counts(index(targets[i]), index(preds[i])) += 1;
  c.normalized = c.counts;
  for (Eigen::Index r = 0; r < k; ++r) {
    const double total = c.counts.row(r).sum();
    if (total > 0) c.normalized.row(r) /= total;
  }
  return c;
}

double latency_ms(double accuracy) {
  if (!(accuracy >= 0.0 && accuracy <= 1.0)) throw DomainError("latency: accuracy outside [0, 1]");
  return accuracy * kProactiveHandoffMs + (1.0 - accuracy) * kReactiveHandoffMs;
}

ProblemResult evaluate_classification(int problem, int horizon, std::span<const int> preds,
                                      std::span<const int> targets, std::span<const int> classes) {
  ProblemResult r;
  r.problem = problem;
  r.horizon = horizon;
  r.samples = r.predictions = preds.size();
  r.accuracy = top1(preds, targets);
  r.confusion = confusion(preds, targets, classes);
  if (problem == 1) r.latency = latency_ms(*r.accuracy);
  return r;
}

ProblemResult evaluate_regression(int horizon, std::span<const std::optional<double>> preds,
                                  std::span<const double> targets) {
  if (preds.size() != targets.size()) throw DomainError("evaluate_regression: length mismatch");
  ProblemResult r;
  r.problem = 2;
  r.horizon = horizon;
  r.samples = preds.size();
  std::vector<double> p, t;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (!preds[i]) continue;
    p.push_back(*preds[i]);
    t.push_back(targets[i]);
  }
  r.predictions = p.size();
  if (!p.empty()) r.error = mae_std(p, t);
  return r;
}

ReportFiles emit_report(std::vector<ProblemResult> results, const std::string& manifest_json,
                        const std::string& version) {
  if (results.empty()) throw DomainError("emit_report: no results");
  std::stable_sort(results.begin(), results.end(), [](const auto& a, const auto& b) {
    return std::tie(a.problem, a.horizon) < std::tie(b.problem, b.horizon);
  });

  nlohmann::ordered_json doc;
  doc["tool"] = "blockcast";
  doc["version"] = version;
  doc["manifest"] = manifest_json.empty() ? nlohmann::ordered_json::object()
                                          : nlohmann::ordered_json::parse(manifest_json);
  auto& entries = doc["results"] = nlohmann::ordered_json::array();

  std::ostringstream text;
  std::ostringstream curves;
  curves << "horizon,metric,value\n";
  text << "blockcast " << version << " evaluation report\n\n";
  text << "problem     horizon  samples  predicted  metric\n";

  for (const auto& r : results) {
    nlohmann::ordered_json e;
    e["problem"] = r.problem;
    e["name"] = problem_name(r.problem);
    e["horizon"] = r.horizon;
    e["samples"] = r.samples;
    e["predictions"] = r.predictions;
    const std::string prefix = "p" + std::to_string(r.problem) + "_";
    std::string metric;
    if (r.accuracy) {
      e["top1"] = round9(*r.accuracy);
      metric = "top1=" + fmt9(*r.accuracy);
      curves << r.horizon << ',' << prefix << "top1," << fmt9(*r.accuracy) << '\n';
    }
    if (r.error) {
      e["mae"] = round9(r.error->mae);
      e["std"] = round9(r.error->std);
      metric = "mae=" + fmt9(r.error->mae) + " std=" + fmt9(r.error->std);
      curves << r.horizon << ',' << prefix << "mae," << fmt9(r.error->mae) << '\n';
      curves << r.horizon << ',' << prefix << "std," << fmt9(r.error->std) << '\n';
    } else if (r.problem == 2) {
      metric = "mae=n/a";
    }
    if (r.problem == 2 && r.samples > 0) {
      const double coverage = static_cast<double>(r.predictions) / static_cast<double>(r.samples);
      e["coverage"] = round9(coverage);
      metric += " coverage=" + fmt9(coverage);
      curves << r.horizon << ',' << prefix << "coverage," << fmt9(coverage) << '\n';
    }
    if (r.latency) {
      e["latency_ms"] = round9(*r.latency);
      metric += " latency_ms=" + fmt9(*r.latency);
      curves << r.horizon << ',' << prefix << "latency_ms," << fmt9(*r.latency) << '\n';
    }
    if (r.confusion) {
      auto& cm = e["confusion"];
      cm["classes"] = r.confusion->classes;
      for (Eigen::Index i = 0; i < r.confusion->normalized.rows(); ++i) {
        std::vector<double> row;
        std::vector<long long> counts;
        for (Eigen::Index j = 0; j < r.confusion->normalized.cols(); ++j) {
          row.push_back(round9(r.confusion->normalized(i, j)));
          counts.push_back(static_cast<long long>(r.confusion->counts(i, j)));
        }
        cm["normalized"].push_back(row);
        cm["counts"].push_back(counts);
      }
    }
    entries.push_back(std::move(e));

    char line[160];
    std::snprintf(line, sizeof line, "%-11s %7d  %7zu  %9zu  ", problem_name(r.problem),
                  r.horizon, r.samples, r.predictions);
    text << line << metric << '\n';
    if (r.confusion) {
      text << "    confusion (rows = truth, columns = prediction):";
      for (const int c : r.confusion->classes) text << ' ' << c;
      text << '\n';
      for (Eigen::Index i = 0; i < r.confusion->normalized.rows(); ++i) {
        text << "      " << r.confusion->classes[i] << ':';
        for (Eigen::Index j = 0; j < r.confusion->normalized.cols(); ++j) {
          std::snprintf(line, sizeof line, " %6.4f", r.confusion->normalized(i, j));
          text << line;
        }
        text << '\n';
      }
    }
  }

  return {doc.dump(2) + "\n", text.str(), curves.str()};
}

}  // namespace blockcast
