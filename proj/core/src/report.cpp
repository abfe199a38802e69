#include "sspcast/report.hpp"

#include <fstream>

#include <json.hpp>

#include "sspcast/errors.hpp"
#include "sspcast/format.hpp"

namespace sspcast {

namespace {

void require_scored(const ForecastReport& report) {
  if (!report.layer_rmse || !report.actual || !report.truth_profile || !report.full_depth_rmse) {
    throw InvalidInput("report has not been scored against a truth profile");
  }
}

std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw IoError("failed writing " + path);
}

}  // namespace

void write_layer_report_csv(const ForecastReport& report, const std::string& path) {
  require_scored(report);
  auto out = open_for_write(path);
  out << "layer,depth_m,predicted,actual,rmse\n";
  for (std::size_t k = 0; k < report.depths.size(); ++k) {
    out << k << ',' << format_exact(report.depths[k]) << ','
        << format_exact(report.predicted(0, static_cast<Eigen::Index>(k))) << ','
        << format_exact((*report.actual)[k]) << ',' << format_exact((*report.layer_rmse)[k]) << '\n';
  }
  finish(out, path);
}

void write_curves_csv(const ForecastReport& report, const std::string& path) {
  require_scored(report);
  auto out = open_for_write(path);
  out << "depth_m,predicted,actual\n";
  const auto& predicted = report.profiles.front().samples();
  const auto& actual = report.truth_profile->samples();
  for (std::size_t k = 0; k < predicted.size(); ++k) {
    out << format_exact(predicted[k].depth) << ',' << format_exact(predicted[k].speed) << ','
        << format_exact(actual[k].speed) << '\n';
  }
  finish(out, path);
}

void write_forecast_csv(const ForecastReport& report, const std::string& path) {
  auto out = open_for_write(path);
  out << "step,timestamp";
  for (std::size_t k = 0; k < report.depths.size(); ++k) out << ",layer_" << k;
  out << '\n';
  for (Eigen::Index step = 0; step < report.predicted.rows(); ++step) {
    out << (step + 1) << ',' << report.timestamps[static_cast<std::size_t>(step)];
    for (Eigen::Index k = 0; k < report.predicted.cols(); ++k) out << ',' << format_exact(report.predicted(step, k));
    out << '\n';
  }
  finish(out, path);
}

std::string report_json(const ForecastReport& report, const std::string& method) {
  nlohmann::ordered_json doc;
  doc["method"] = method;
  doc["depths_m"] = report.depths;
  doc["timestamps"] = report.timestamps;
  auto steps = nlohmann::ordered_json::array();
  for (Eigen::Index step = 0; step < report.predicted.rows(); ++step) {
    std::vector<double> row(static_cast<std::size_t>(report.predicted.cols()));
    for (Eigen::Index k = 0; k < report.predicted.cols(); ++k) row[static_cast<std::size_t>(k)] = report.predicted(step, k);
    steps.push_back(std::move(row));
  }
  doc["predicted"] = std::move(steps);
  if (report.layer_rmse) {
    doc["actual"] = *report.actual;
    doc["layer_rmse"] = *report.layer_rmse;
    doc["full_depth_rmse"] = *report.full_depth_rmse;
  }
  return doc.dump(2) + "\n";
}

void write_report_json(const ForecastReport& report, const std::string& method, const std::string& path) {
  write_text_file(path, report_json(report, method));
}

void write_text_file(const std::string& path, const std::string& text) {
  auto out = open_for_write(path);
  out << text;
  finish(out, path);
}

}  // namespace sspcast
