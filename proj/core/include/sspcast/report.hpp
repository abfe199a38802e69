#pragma once

#include <string>

#include "sspcast/hierarchy.hpp"

namespace sspcast {

// All numeric fields are written with round-trip precision.

/// `layer,depth_m,predicted,actual,rmse`, one row per layer. Requires a scored report.
void write_layer_report_csv(const ForecastReport& report, const std::string& path);

/// `depth_m,predicted,actual` on the full-depth grid. Requires a scored report.
void write_curves_csv(const ForecastReport& report, const std::string& path);

/// `step,timestamp,layer_0,...,layer_{L-1}`, one row per forecast step.
void write_forecast_csv(const ForecastReport& report, const std::string& path);

/// Forecast matrix, depths, timestamps and (when present) the scores.
std::string report_json(const ForecastReport& report, const std::string& method);
void write_report_json(const ForecastReport& report, const std::string& method, const std::string& path);

/// Writes `text` to `path`, replacing the file.
void write_text_file(const std::string& path, const std::string& text);

}  // namespace sspcast
