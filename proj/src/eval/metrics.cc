#include "bytesing/eval/metrics.h"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>

#include "bytesing/common/error.h"
#include "bytesing/eval/mel.h"

namespace bytesing::eval {

double msd_db(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ValidationError("msd needs equal shapes, got " + std::to_string(a.rows()) + "x" +
                          std::to_string(a.cols()) + " and " + std::to_string(b.rows()) +
                          "x" + std::to_string(b.cols()));
  }
  if (a.rows() == 0) throw ValidationError("msd of empty spectrograms");
  const Matrix d = (a - b) * kNepersToDb;
  return d.rowwise().norm().mean();
}

F0Comparison compare_f0(const F0Track& a, const F0Track& b) {
  if (a.size() != b.size()) {
    throw ValidationError("F0 tracks differ in length: " + std::to_string(a.size()) +
                          " vs " + std::to_string(b.size()));
  }
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.voiced[i] && b.voiced[i]) {
      xs.push_back(a.f0_hz[i]);
      ys.push_back(b.f0_hz[i]);
    }
  }
  F0Comparison out;
  out.overlap = static_cast<long>(xs.size());
  if (xs.empty()) return out;
  const auto n = static_cast<double>(xs.size());
  double se = 0.0;
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    se += (xs[i] - ys[i]) * (xs[i] - ys[i]);
    mx += xs[i];
    my += ys[i];
  }
  out.rmse_hz = std::sqrt(se / n);
  if (xs.size() < 2) return out;
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx > 0.0 && syy > 0.0) {
    out.corr = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  }
  return out;
}

std::string MetricReport::to_json() const {
  nlohmann::json j;
  j["msd_db"] = msd_db;
  j["voiced_overlap_frames"] = f0.overlap;
  j["f0_rmse_hz"] = f0.rmse_hz ? nlohmann::json(*f0.rmse_hz) : nlohmann::json(nullptr);
  j["f0_corr"] = f0.corr ? nlohmann::json(*f0.corr) : nlohmann::json(nullptr);
  return j.dump();
}

MetricReport evaluate_waves(const std::vector<double>& ref, const std::vector<double>& hyp) {
  MetricReport report;
  report.msd_db = msd_db(extract_mel(ref), extract_mel(hyp));
  report.f0 = compare_f0(extract_f0(ref), extract_f0(hyp));
  return report;
}

}  // namespace bytesing::eval
