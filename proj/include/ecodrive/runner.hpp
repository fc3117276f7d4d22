#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ecodrive/dp.hpp"
#include "ecodrive/sim.hpp"

namespace ecodrive {

// FNV-1a over the bytes; keys the plan cache and ties reports to their route.
std::string content_hash_hex(const std::string& content);
std::string read_file(const std::filesystem::path& path);
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

// ECODRIVE_CACHE_DIR overrides the default ".ecodrive-cache".
std::filesystem::path plan_cache_dir(const std::optional<std::string>& override_dir);

// Whole-route fuel-optimal profile (rest to rest, stall nodes excluded inside).
SpeedProfile solve_route_profile(const RouteProfile& route, const VehicleConfig& vehicle);

struct PlanResult {
  SpeedProfile profile;
  bool cache_hit = false;
  std::filesystem::path cache_file;
  std::string route_hash;
};

PlanResult plan_eco_cruise(const std::string& route_path, const std::string& vehicle_path,
                           const std::optional<std::string>& cache_dir);

struct RunOptions {
  std::string route_path;
  std::string vehicle_path;
  std::vector<int> cases;  // subset of 1..5
  unsigned seed = 42;
  std::string out_dir = "out";
  std::optional<double> dt_s;
  std::optional<double> duration_s;
  std::optional<std::string> cache_dir;
};

struct CaseResult {
  int case_id = 0;
  SimReport report;
  std::filesystem::path trace_path;
  std::filesystem::path report_path;
};

// 0: all requested cases ran clean; 2: a safety violation (collision / red light /
// missed stop) occurred. Throws std::invalid_argument on bad inputs (exit code 1).
int run_cases(const RunOptions& opts, std::vector<CaseResult>* results = nullptr);

// Adaptive comparison: with all five cases present this is the case-3-referenced
// table; with exactly two reports the later case is compared against the earlier.
std::vector<ComparisonRow> compare_reports(std::vector<SimReport> reports);
std::string comparison_to_text(const std::vector<ComparisonRow>& rows);
std::string comparison_to_csv(const std::vector<ComparisonRow>& rows);

// Column subset (and optional downsampling) of a trace for plotting.
std::string export_trace(const SimTrace& trace, const std::vector<std::string>& fields,
                         int downsample = 1);
std::vector<std::string> trace_field_names();

}  // namespace ecodrive
