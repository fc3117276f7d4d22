#include "ecodrive/runner.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace ecodrive {

namespace fs = std::filesystem;

std::string content_hash_hex(const std::string& content) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : content) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write: " + tmp.string());
    out << content;
  }
  fs::rename(tmp, path);
}

fs::path plan_cache_dir(const std::optional<std::string>& override_dir) {
  if (override_dir) return *override_dir;
  if (const char* env = std::getenv("ECODRIVE_CACHE_DIR")) return env;
  return ".ecodrive-cache";
}

SpeedProfile solve_route_profile(const RouteProfile& route, const VehicleConfig& vehicle) {
  DPProblem p;
  p.start_station_m = 0.0;
  p.end_station_m = route.length_m;
  p.distance_step_m = 10.0;
  p.speed_grid = make_speed_grid(route.max_speed_limit());
  p.initial_speed_m_s = 0.0;
  p.terminal_speed_m_s = 0.0;
  p.interior_speed_floor_m_s = p.speed_grid.size() > 1 ? p.speed_grid[1] : 0.0;
  p.limits = vehicle.limits();
  p.vehicle = vehicle.vehicle;
  p.fuel = vehicle.fuel;
  p.route = &route;
  return solve(p);
}

PlanResult plan_eco_cruise(const std::string& route_path, const std::string& vehicle_path,
                           const std::optional<std::string>& cache_dir) {
  const std::string route_text = read_file(route_path);
  const std::string vehicle_text = read_file(vehicle_path);
  const RouteProfile route = parse_route(route_text);
  const VehicleConfig vehicle = parse_vehicle_config(vehicle_text);

  PlanResult result;
  result.route_hash = content_hash_hex(route_text);
  const std::string key = content_hash_hex(route_text + "\x1f" + vehicle_text);
  result.cache_file = plan_cache_dir(cache_dir) / ("ecocruise_" + key + ".csv");

  if (fs::exists(result.cache_file)) {
    result.profile = profile_from_csv(read_file(result.cache_file));
    result.cache_hit = true;
    // the cached file does not carry the cost; recompute it for reporting
    result.profile.total_fuel_g = evaluate_profile(result.profile, vehicle.vehicle,
                                                   vehicle.fuel, route, vehicle.limits());
    return result;
  }

  result.profile = solve_route_profile(route, vehicle);
  write_file_atomic(result.cache_file, profile_to_csv(result.profile));
  return result;
}

int run_cases(const RunOptions& opts, std::vector<CaseResult>* results) {
  if (opts.cases.empty()) throw std::invalid_argument("run: no cases requested");
  for (int c : opts.cases)
    if (c < 1 || c > 5) throw std::invalid_argument("run: case ids must be in 1..5");

  const PlanResult plan = plan_eco_cruise(opts.route_path, opts.vehicle_path, opts.cache_dir);

  SimInputs inputs;
  inputs.route = std::make_shared<RouteProfile>(parse_route(read_file(opts.route_path)));
  inputs.vehicle = load_vehicle_config(opts.vehicle_path);
  inputs.eco_profile = plan.profile;
  inputs.route_hash = plan.route_hash;

  int exit_code = 0;
  for (int c : opts.cases) {
    Scenario sc = make_case_scenario(c, opts.seed, *inputs.route);
    if (opts.dt_s) sc.dt_s = *opts.dt_s;
    if (opts.duration_s) sc.duration_s = *opts.duration_s;

    auto [trace, report] = run_scenario(sc, inputs);
    const EventSummary ev = detect_events(trace, *inputs.route);
    const bool unsafe = report.collision || report.red_violations > 0 || !ev.stop_compliance;
    if (unsafe) exit_code = 2;

    const fs::path case_dir = fs::path(opts.out_dir) / ("case_" + std::to_string(c));
    CaseResult cr;
    cr.case_id = c;
    cr.report = report;
    cr.trace_path = case_dir / "trace.csv";
    cr.report_path = case_dir / "report.json";
    write_file_atomic(cr.trace_path, trace.to_csv());
    write_file_atomic(cr.report_path, report.to_json());
    if (results) results->push_back(std::move(cr));
  }
  return exit_code;
}

std::vector<ComparisonRow> compare_reports(std::vector<SimReport> reports) {
  if (reports.size() < 2) throw std::invalid_argument("compare: need at least two reports");
  const std::string& hash = reports.front().route_hash;
  for (const auto& r : reports) {
    if (r.route_hash != hash)
      throw std::invalid_argument("compare: reports come from different routes");
  }

  std::map<int, SimReport> by_case;
  for (auto& r : reports) by_case[r.case_id] = r;

  bool all_five = true;
  for (int c = 1; c <= 5; ++c) all_five &= by_case.count(c) > 0;
  if (all_five) return compare_cases(by_case);

  // pairwise / partial: reference is the lowest present case id
  const SimReport& base = by_case.begin()->second;
  std::vector<ComparisonRow> rows;
  for (const auto& [c, r] : by_case) {
    ComparisonRow row{c, r.scenario_name, r.total_fuel_g, std::nullopt};
    if (c != base.case_id)
      row.reduction_vs_case3_pct = 100.0 * (base.total_fuel_g - r.total_fuel_g) /
                                   base.total_fuel_g;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string comparison_to_text(const std::vector<ComparisonRow>& rows) {
  std::ostringstream out;
  out << "case  scenario              fuel_g     reduction_%\n";
  char buf[160];
  for (const auto& r : rows) {
    if (r.reduction_vs_case3_pct)
      std::snprintf(buf, sizeof(buf), "%-5d %-20s %10.2f %10.2f\n", r.case_id,
                    r.name.c_str(), r.fuel_g, *r.reduction_vs_case3_pct);
    else
      std::snprintf(buf, sizeof(buf), "%-5d %-20s %10.2f %10s\n", r.case_id, r.name.c_str(),
                    r.fuel_g, "-");
    out << buf;
  }
  return out.str();
}

std::string comparison_to_csv(const std::vector<ComparisonRow>& rows) {
  std::ostringstream out;
  out << "case_id,scenario_name,total_fuel_g,reduction_pct\n";
  char buf[160];
  for (const auto& r : rows) {
    if (r.reduction_vs_case3_pct)
      std::snprintf(buf, sizeof(buf), "%d,%s,%.6f,%.6f\n", r.case_id, r.name.c_str(),
                    r.fuel_g, *r.reduction_vs_case3_pct);
    else
      std::snprintf(buf, sizeof(buf), "%d,%s,%.6f,\n", r.case_id, r.name.c_str(), r.fuel_g);
    out << buf;
  }
  return out.str();
}

std::vector<std::string> trace_field_names() {
  return {"t_s",   "station_m", "speed_m_s",    "accel_m_s2",   "mode",        "command_m_s",
          "gap_m", "lead_speed_m_s", "lane",    "light_phases", "fuel_rate_g_s",
          "fuel_used_g"};
}

std::string export_trace(const SimTrace& trace, const std::vector<std::string>& fields,
                         int downsample) {
  if (downsample < 1) throw std::invalid_argument("export: downsample must be >= 1");
  const auto names = trace_field_names();
  for (const auto& f : fields) {
    if (std::find(names.begin(), names.end(), f) == names.end()) {
      std::string valid;
      for (const auto& n : names) valid += (valid.empty() ? "" : ", ") + n;
      throw std::invalid_argument("export: unknown field '" + f + "' (valid: " + valid + ")");
    }
  }

  auto cell = [](const TraceRecord& r, const std::string& f) -> std::string {
    char buf[64];
    auto num = [&](double v, const char* fmt = "%.6f") {
      std::snprintf(buf, sizeof(buf), fmt, v);
      return std::string(buf);
    };
    if (f == "t_s") return num(r.t_s, "%.1f");
    if (f == "station_m") return num(r.station_m);
    if (f == "speed_m_s") return num(r.speed_m_s);
    if (f == "accel_m_s2") return num(r.accel_m_s2);
    if (f == "mode") return mode_name(r.mode);
    if (f == "command_m_s") return num(r.command_m_s);
    if (f == "gap_m") return num(r.gap_m);
    if (f == "lead_speed_m_s") return num(r.lead_speed_m_s);
    if (f == "lane") return std::to_string(r.lane);
    if (f == "light_phases") return r.light_phases;
    if (f == "fuel_rate_g_s") return num(r.fuel_rate_g_s, "%.9f");
    return num(r.fuel_used_g, "%.9f");
  };

  std::ostringstream out;
  for (size_t i = 0; i < fields.size(); ++i) out << (i ? "," : "") << fields[i];
  out << "\n";
  for (size_t i = 0; i < trace.records.size(); i += downsample) {
    for (size_t f = 0; f < fields.size(); ++f)
      out << (f ? "," : "") << cell(trace.records[i], fields[f]);
    out << "\n";
  }
  return out.str();
}

}  // namespace ecodrive
