#include "cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "rbfim/baseline_metrics.hpp"
#include "rbfim/bench_harness.hpp"
#include "rbfim/parallel.hpp"
#include "rbfim/rbfim_metric.hpp"

namespace rbfim {

namespace {

constexpr int kExitInput = 2;
constexpr int kExitNumeric = 3;

struct shared_flags {
  std::string kernel = "gaussian";
  int t_min = 20;
  int t_max = 40;
  double eps0 = 0.01;
  int grid = 16;
  double ref_fraction = 1.0;
  std::string feature = "luma";
  int curvature_k = 12;
  std::uint64_t seed = 0;
  int threads = 0;
  std::string out_path;

  rbfim_config to_config() const {
    rbfim_config cfg;
    cfg.kernel = parse_kernel(kernel);
    cfg.partition.t_min = t_min;
    cfg.partition.t_max = t_max;
    cfg.partition.eps0 = eps0;
    cfg.grid_scale = grid;
    cfg.ref_fraction = ref_fraction;
    cfg.feature = parse_feature(feature, curvature_k);
    cfg.rng_seed = seed;
    cfg.threads = resolve_threads(threads);
    cfg.validate();
    return cfg;
  }
};

void add_metric_flags(CLI::App* app, shared_flags& f) {
  std::vector<std::string> kernels;
  for (kernel_kind k : kAllKernels) {
    kernels.push_back(to_string(k));
  }
  app->add_option("--kernel", f.kernel, "Radial basis function")->check(CLI::IsMember(kernels));
  app->add_option("--tmin", f.t_min, "Minimum points per subdomain");
  app->add_option("--tmax", f.t_max, "Maximum points per subdomain");
  app->add_option("--eps0", f.eps0, "Planarity threshold for splitting full cells");
  app->add_option("--grid", f.grid, "Pooling grid cells per axis");
  app->add_option("--ref-fraction", f.ref_fraction, "Fraction of original points used as reference");
  app->add_option("--feature", f.feature, "Point feature")->check(CLI::IsMember({"luma", "cb", "cr", "curvature"}));
  app->add_option("--curvature-k", f.curvature_k, "Neighbors for the curvature feature");
  app->add_option("--seed", f.seed, "Seed for every random choice");
  app->add_option("--threads", f.threads, "Worker threads, 0 = available parallelism");
  app->add_option("--out", f.out_path, "Write a JSON report to this path");
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream file(path, std::ios::binary);
  if (!file || !(file << text << '\n')) {
    throw input_error(path + ": cannot write report");
  }
}

std::string config_line(const rbfim_config& c) {
  std::ostringstream s;
  s << "kernel=" << to_string(c.kernel) << " feature=" << to_string(c.feature) << " tmin=" << c.partition.t_min
    << " tmax=" << c.partition.t_max << " eps0=" << c.partition.eps0 << " grid=" << c.grid_scale
    << " ref_fraction=" << c.ref_fraction << " seed=" << c.rng_seed;
  return s.str();
}

nlohmann::json error_json(const directional_error& e) {
  return {{"d1", e.d1}, {"d2", e.d2}, {"mse", e.mse}, {"psnr", e.psnr}};
}

int cmd_compare(const std::string& ref, const std::string& dist, const shared_flags& f, bool with_baselines,
                std::ostream& out) {
  rbfim_config cfg = f.to_config();
  point_cloud a = load_ply(ref);
  point_cloud b = load_ply(dist);
  metric_report rep = compute_rbfim(a, b, cfg);

  out << config_line(cfg) << '\n';
  out << std::fixed;
  out << "D_RBFIM = " << std::setprecision(6) << rep.d_rbfim << '\n';
  out << "Q_RBFIM = " << std::setprecision(2) << rep.q_rbfim << " dB\n";
  out << "points original=" << rep.n_original << " distorted=" << rep.n_distorted
      << " subdomains=" << rep.n_subdomains << " cells=" << rep.m_r << '\n';

  nlohmann::json doc;
  doc["original"] = ref;
  doc["distorted"] = dist;
  doc["config"] = {{"kernel", to_string(cfg.kernel)},        {"feature", to_string(cfg.feature)},
                   {"tmin", cfg.partition.t_min},            {"tmax", cfg.partition.t_max},
                   {"eps0", cfg.partition.eps0},             {"grid", cfg.grid_scale},
                   {"ref_fraction", cfg.ref_fraction},       {"seed", cfg.rng_seed}};
  doc["d_rbfim"] = rep.d_rbfim;
  doc["q_rbfim"] = rep.q_rbfim;
  doc["m_r"] = rep.m_r;
  doc["n_original"] = rep.n_original;
  doc["n_distorted"] = rep.n_distorted;
  doc["n_reference"] = rep.n_reference;
  doc["n_subdomains"] = rep.n_subdomains;
  doc["solve_paths"] = rep.solve_paths;
  doc["timings"] = rep.timings;

  if (with_baselines) {
    baseline_report base = compute_baselines(a, b);
    out << std::setprecision(4);
    out << "p2po mse=" << base.p2po.mse << " psnr=" << base.p2po.psnr << " dB\n";
    out << "p2pl mse=" << base.p2pl.mse << " psnr=" << base.p2pl.psnr << " dB\n";
    nlohmann::json bj = {{"p2po", error_json(base.p2po)}, {"p2pl", error_json(base.p2pl)}};
    const std::pair<const char*, const std::optional<directional_error>*> channels[] = {
        {"y", &base.y}, {"u", &base.u}, {"v", &base.v}};
    for (const auto& [name, e] : channels) {
      if (*e) {
        out << name << "   mse=" << (*e)->mse << " psnr=" << (*e)->psnr << " dB\n";
        bj[name] = error_json(**e);
      }
    }
    doc["baselines"] = bj;
  }
  if (!f.out_path.empty()) {
    write_text(f.out_path, doc.dump(2));
  }
  return 0;
}

int cmd_benchmark(const std::string& manifest_path, const shared_flags& f, const std::string& metric_list,
                  std::ostream& out) {
  rbfim_config cfg = f.to_config();
  std::vector<std::string> metrics = parse_metric_list(metric_list);
  manifest m = load_manifest(manifest_path);
  benchmark_result result = run_benchmark(m, metrics, cfg);
  out << config_line(cfg) << '\n';
  print_table(out, result);
  if (!f.out_path.empty()) {
    write_text(f.out_path, to_json(result));
  }
  return 0;
}

int cmd_distort(const std::string& in_path, const std::string& out_path, double quant_step, double luma_sigma,
                std::uint64_t seed, bool ascii, std::ostream& out) {
  point_cloud cloud = load_ply(in_path);
  point_cloud distorted = synth_distort(cloud, quant_step, luma_sigma, seed);
  write_ply(out_path, distorted, ascii ? ply_format::ascii : ply_format::binary_little_endian);
  out << "original points:  " << cloud.size() << '\n';
  out << "quantized points: " << distorted.size() << '\n';
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"RBFIM point cloud quality metric", "rbfim"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);

  shared_flags compare_flags;
  std::string ref;
  std::string dist;
  bool with_baselines = false;
  CLI::App* compare = app.add_subcommand("compare", "Score a distorted cloud against its original");
  compare->add_option("reference", ref, "Original PLY")->required();
  compare->add_option("distorted", dist, "Distorted PLY")->required();
  add_metric_flags(compare, compare_flags);
  compare->add_flag("--with-baselines", with_baselines, "Also report p2po, p2pl and color PSNR");

  shared_flags bench_flags;
  std::string manifest_path;
  std::string metric_list = "rbfim,psnr_p2po,psnr_p2pl";
  CLI::App* bench = app.add_subcommand("benchmark", "Score every manifest row and correlate with MOS");
  bench->add_option("manifest", manifest_path, "CSV manifest")->required();
  add_metric_flags(bench, bench_flags);
  std::string metric_help = "Comma-separated metrics:";
  for (const auto& name : known_metrics()) {
    metric_help += " " + name;
  }
  bench->add_option("--metrics", metric_list, metric_help);

  std::string distort_in;
  std::string distort_out;
  double quant_step = 0.0;
  double luma_sigma = 0.0;
  std::uint64_t distort_seed = 0;
  bool ascii = false;
  CLI::App* distort = app.add_subcommand("distort", "Write a synthetically distorted copy of a cloud");
  distort->add_option("input", distort_in, "Input PLY")->required();
  distort->add_option("--out", distort_out, "Output PLY")->required();
  distort->add_option("--quant-step", quant_step, "Lattice step for position quantization, 0 = off")
      ->check(CLI::NonNegativeNumber);
  distort->add_option("--luma-sigma", luma_sigma, "Std of Gaussian luminance noise, 0 = off")
      ->check(CLI::NonNegativeNumber);
  distort->add_option("--seed", distort_seed, "Noise seed");
  distort->add_flag("--ascii", ascii, "Write ASCII instead of binary little endian");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (*compare) {
      return cmd_compare(ref, dist, compare_flags, with_baselines, out);
    }
    if (*bench) {
      return cmd_benchmark(manifest_path, bench_flags, metric_list, out);
    }
    return cmd_distort(distort_in, distort_out, quant_step, luma_sigma, distort_seed, ascii, out);
  } catch (const input_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const numeric_error& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "internal failure: " << e.what() << '\n';
    return kExitNumeric;
  }
}

}  // namespace rbfim
