// verify: batch runner for the torus_lab check suites.
//
//   verify --config cfg.json --out report.json [--suites a,b] [--record name:seed:N]
//
// TORUS_VERIFY_OUT_DIR, when set, replaces the directory part of --out.
// Exit status: 0 all checks pass, 1 some check failed, 2 usage or config error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "torus_lab/reports.hpp"

namespace fs = std::filesystem;
using namespace torus_lab;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  out << text;
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Run torus_lab verification suites and write a JSON report"};
  std::string config_path, out_path, suites_csv, record;
  app.add_option("--config", config_path, "JSON suite configuration")->required();
  app.add_option("--out", out_path, "report path (JSON)")->required();
  app.add_option("--suites", suites_csv, "comma-separated subset of the configured suites");
  app.add_option("--record", record, "rerun a single record, name:seed:N");
  app.set_version_flag("--version", std::string(kVersion));
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  SuiteReport report;
  fs::path out(out_path);
  try {
    auto config = SuiteConfig::parse(read_file(config_path));
    if (!suites_csv.empty()) {
      config.suites = split_csv(suites_csv);
      config.validate();
    }
    std::optional<RecordKey> only;
    if (!record.empty()) only = RecordKey::parse(record);
    if (const char* dir = std::getenv("TORUS_VERIFY_OUT_DIR"); dir && *dir) out = fs::path(dir) / out.filename();

    report = run_suites(config, only);
    if (only && report.records.empty()) {
      throw ConfigError("--record: no check matches '" + record + "' under this config");
    }
  } catch (const ConfigError& e) {
    std::cerr << "verify: config error: " << e.what() << "\n";
    return 2;
  }

  const bool has_convergence = std::find(report.config.suites.begin(), report.config.suites.end(),
                                         "convergence") != report.config.suites.end();
  if (has_convergence) {
    const auto table = emit_convergence_table(report);
    if (table.warning) report.warnings.push_back(*table.warning);
    auto csv_path = out;
    csv_path.replace_extension(".convergence.csv");
    write_file(csv_path, table.csv);
  }

  auto body = report.to_json();
  body["generated_at"] = utc_timestamp();
  write_file(out, body.dump(2) + "\n");

  std::cout << report.records.size() - report.failed() << "/" << report.records.size() << " checks passed\n";
  for (const auto& r : report.records) {
    if (!r.pass) {
      std::cout << "FAIL " << r.name << ":" << r.seed << ":" << r.n << " residual " << r.residual << " > "
                << r.tolerance << (r.cause.empty() ? "" : " (" + r.cause + ")") << "\n";
    }
  }
  for (const auto& w : report.warnings) std::cout << "warning: " << w << "\n";
  return report.all_pass() ? 0 : 1;
}
