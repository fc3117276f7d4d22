#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ecodrive/runner.hpp"

namespace fs = std::filesystem;
using namespace ecodrive;

namespace {

int do_plan(const std::string& route, const std::string& vehicle,
            const std::optional<std::string>& cache_dir) {
  const PlanResult plan = plan_eco_cruise(route, vehicle, cache_dir);
  std::cout << (plan.cache_hit ? "cache hit: " : "planned: ") << plan.cache_file.string()
            << "\n";
  std::cout << "stations: " << plan.profile.stations_m.size()
            << "  predicted fuel: " << plan.profile.total_fuel_g << " g\n";
  return 0;
}

int do_run(const RunOptions& opts) {
  std::vector<CaseResult> results;
  const int code = run_cases(opts, &results);
  for (const auto& r : results) {
    std::cout << "case " << r.case_id << ": fuel " << r.report.total_fuel_g << " g, time "
              << r.report.travel_time_s << " s, stops " << r.report.stop_count
              << (r.report.collision ? ", COLLISION" : "")
              << (r.report.red_violations ? ", RED VIOLATION" : "") << "\n";
  }
  // comparison file when the full experiment ran
  if (results.size() == 5) {
    std::vector<SimReport> reports;
    for (const auto& r : results) reports.push_back(r.report);
    const auto rows = compare_reports(reports);
    write_file_atomic(fs::path(opts.out_dir) / "comparison.csv", comparison_to_csv(rows));
    std::cout << comparison_to_text(rows);
  }
  return code;
}

int do_compare(const std::vector<std::string>& report_paths, const std::string& out_csv) {
  std::vector<SimReport> reports;
  for (const auto& p : report_paths) reports.push_back(SimReport::from_json(read_file(p)));
  const auto rows = compare_reports(std::move(reports));
  std::cout << comparison_to_text(rows);
  if (!out_csv.empty()) write_file_atomic(out_csv, comparison_to_csv(rows));
  return 0;
}

int do_export(const std::string& trace_path, const std::string& fields_arg, int downsample,
              const std::string& out_path) {
  const SimTrace trace = SimTrace::from_csv(read_file(trace_path));
  std::vector<std::string> fields;
  std::string cur;
  for (char c : fields_arg) {
    if (c == ',') {
      if (!cur.empty()) fields.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) fields.push_back(cur);
  const std::string csv = export_trace(trace, fields, downsample);
  if (out_path.empty()) std::cout << csv;
  else write_file_atomic(out_path, csv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"eco-driving planner and traffic simulation runner"};
  app.require_subcommand(1);

  std::string route, vehicle, out_dir = "out";
  std::string cases_arg = "all";
  unsigned seed = 42;
  double dt = 0.0, duration = 0.0;
  std::string cache_dir_arg;

  auto* plan = app.add_subcommand("plan", "precompute and cache the cruise speed profile");
  plan->add_option("--route", route, "route JSON file")->required();
  plan->add_option("--vehicle", vehicle, "vehicle/fuel JSON file")->required();
  plan->add_option("--cache-dir", cache_dir_arg, "plan cache directory");

  auto* run = app.add_subcommand("run", "run simulation cases");
  run->add_option("--route", route, "route JSON file")->required();
  run->add_option("--vehicle", vehicle, "vehicle/fuel JSON file")->required();
  run->add_option("--cases", cases_arg, "comma-separated case ids or 'all'");
  run->add_option("--seed", seed, "traffic seed");
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--dt", dt, "integration step override, s");
  run->add_option("--duration", duration, "simulation duration override, s");
  run->add_option("--cache-dir", cache_dir_arg, "plan cache directory");

  std::vector<std::string> report_paths;
  std::string compare_out;
  auto* cmp = app.add_subcommand("compare", "tabulate fuel across case reports");
  cmp->add_option("--reports", report_paths, "report.json files")->required()->expected(-2);
  cmp->add_option("--out", compare_out, "write the table as CSV here");

  std::string trace_path, fields = "t_s,speed_m_s,mode", export_out;
  int downsample = 1;
  auto* exp = app.add_subcommand("export", "project trace columns for plotting");
  exp->add_option("--trace", trace_path, "trace.csv file")->required();
  exp->add_option("--fields", fields, "comma-separated column names");
  exp->add_option("--downsample", downsample, "keep every Nth tick");
  exp->add_option("--out", export_out, "output file (stdout when omitted)");

  CLI11_PARSE(app, argc, argv);

  std::optional<std::string> cache_dir;
  if (!cache_dir_arg.empty()) cache_dir = cache_dir_arg;

  try {
    if (plan->parsed()) return do_plan(route, vehicle, cache_dir);
    if (run->parsed()) {
      RunOptions opts;
      opts.route_path = route;
      opts.vehicle_path = vehicle;
      if (cases_arg == "all") {
        opts.cases = {1, 2, 3, 4, 5};
      } else {
        std::string cur;
        for (char c : cases_arg + ",") {
          if (c == ',') {
            if (!cur.empty()) opts.cases.push_back(std::stoi(cur));
            cur.clear();
          } else {
            cur.push_back(c);
          }
        }
      }
      opts.seed = seed;
      opts.out_dir = out_dir;
      if (dt > 0.0) opts.dt_s = dt;
      if (duration > 0.0) opts.duration_s = duration;
      opts.cache_dir = cache_dir;
      return do_run(opts);
    }
    if (cmp->parsed()) return do_compare(report_paths, compare_out);
    if (exp->parsed()) return do_export(trace_path, fields, downsample, export_out);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
