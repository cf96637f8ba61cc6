#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rbfim/correlation.hpp"
#include "rbfim/rbfim_metric.hpp"

namespace rbfim {

struct manifest_row {
  std::filesystem::path ref_path;
  std::filesystem::path dist_path;
  double mos = 0.0;
  std::string tag;
};

enum class mos_scale { five_point, percent };

// CSV with header ref_path,dist_path,mos[,tag]. Lines starting with '#' are comments, except
// "# mos_scale: percent", which divides every MOS by 20 at load. Relative paths resolve
// against the manifest's directory.
struct manifest {
  std::vector<manifest_row> rows;
  mos_scale scale = mos_scale::five_point;
};

manifest parse_manifest(std::istream& in, const std::filesystem::path& base_dir, const std::string& source = "manifest");
manifest load_manifest(const std::filesystem::path& path);

// Metric names: rbfim (Q in dB), p2po, p2pl (symmetric MSE), psnr_p2po, psnr_p2pl,
// mse_y, mse_u, mse_v, psnr_y, psnr_u, psnr_v.
const std::vector<std::string>& known_metrics();
std::vector<std::string> parse_metric_list(const std::string& comma_separated);

struct row_result {
  manifest_row row;
  bool ok = false;
  std::string error;
  std::map<std::string, double> scores;
  std::map<std::string, double> timings;  // seconds
};

struct metric_stats {
  std::optional<correlation_stats> stats;  // empty when degenerate
  bool degenerate = false;
  std::string reason;
  std::size_t n = 0;
};

using stats_table = std::map<std::string, metric_stats>;

struct pairwise_flag {
  std::string a;
  std::string b;
  char relation;  // '>', '<' or '=' comparing |SROCC|
};

struct benchmark_result {
  std::vector<std::string> metrics;
  std::vector<row_result> rows;  // manifest order
  stats_table stats;
  std::map<std::string, stats_table> stats_by_tag;
  std::vector<pairwise_flag> pairwise;  // only with two or more metrics
};

metric_stats correlate(const std::vector<double>& pred, const std::vector<double>& mos);

// Rows run on cfg.threads workers; each row evaluates single-threaded.
benchmark_result run_benchmark(const manifest& m, const std::vector<std::string>& metrics, const rbfim_config& cfg);

std::string to_json(const benchmark_result& result, int indent = 2);
void print_table(std::ostream& out, const benchmark_result& result);

}  // namespace rbfim
