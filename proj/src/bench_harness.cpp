#include "rbfim/bench_harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "rbfim/baseline_metrics.hpp"
#include "rbfim/parallel.hpp"

namespace rbfim {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) {
    return {};
  }
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

// Comma-separated fields with optional double quotes ("" inside quotes is a literal quote).
std::vector<std::string> split_csv(const std::string& line, const std::string& where) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
      was_quoted = true;
    } else if (c == ',') {
      fields.push_back(was_quoted ? cur : trim(cur));
      cur.clear();
      was_quoted = false;
    } else {
      cur += c;
    }
  }
  if (quoted) {
    throw input_error(where + ": unterminated quote");
  }
  fields.push_back(was_quoted ? cur : trim(cur));
  return fields;
}

double score_of(const baseline_report& b, const std::string& name) {
  auto color = [&](const std::optional<directional_error>& e) -> const directional_error& {
    if (!e) {
      throw input_error(name + " needs colors on both clouds");
    }
    return *e;
  };
  if (name == "p2po") return b.p2po.mse;
  if (name == "p2pl") return b.p2pl.mse;
  if (name == "psnr_p2po") return b.p2po.psnr;
  if (name == "psnr_p2pl") return b.p2pl.psnr;
  if (name == "mse_y") return color(b.y).mse;
  if (name == "mse_u") return color(b.u).mse;
  if (name == "mse_v") return color(b.v).mse;
  if (name == "psnr_y") return color(b.y).psnr;
  if (name == "psnr_u") return color(b.u).psnr;
  if (name == "psnr_v") return color(b.v).psnr;
  throw input_error("unknown metric " + name);
}

row_result evaluate_row(const manifest_row& row, const std::vector<std::string>& metrics, const rbfim_config& cfg) {
  using clock = std::chrono::steady_clock;
  row_result r;
  r.row = row;
  try {
    point_cloud ref = load_ply(row.ref_path);
    point_cloud dist = load_ply(row.dist_path);
    bool want_rbfim = std::find(metrics.begin(), metrics.end(), "rbfim") != metrics.end();
    bool want_baselines = std::any_of(metrics.begin(), metrics.end(), [](const std::string& m) { return m != "rbfim"; });
    if (want_rbfim) {
      metric_report rep = compute_rbfim(ref, dist, cfg);
      r.scores["rbfim"] = rep.q_rbfim;
      r.scores["rbfim_d"] = rep.d_rbfim;
      r.timings["rbfim"] = rep.timings.at("total");
    }
    if (want_baselines) {
      auto t0 = clock::now();
      baseline_report b = compute_baselines(ref, dist);
      r.timings["baselines"] = std::chrono::duration<double>(clock::now() - t0).count();
      for (const std::string& m : metrics) {
        if (m != "rbfim") {
          r.scores[m] = score_of(b, m);
        }
      }
    }
    r.ok = true;
  } catch (const std::exception& e) {
    r.ok = false;
    r.error = e.what();
    r.scores.clear();
  }
  return r;
}

stats_table stats_over(const std::vector<row_result>& rows, const std::vector<std::string>& metrics,
                       const std::string* tag) {
  stats_table table;
  for (const std::string& m : metrics) {
    std::vector<double> pred;
    std::vector<double> mos;
    for (const row_result& r : rows) {
      if (!r.ok || (tag && r.row.tag != *tag)) {
        continue;
      }
      pred.push_back(r.scores.at(m));
      mos.push_back(r.row.mos);
    }
    table[m] = correlate(pred, mos);
  }
  return table;
}

nlohmann::json stats_json(const metric_stats& s) {
  nlohmann::json j;
  j["n"] = s.n;
  j["degenerate"] = s.degenerate;
  if (s.degenerate) {
    j["reason"] = s.reason;
  }
  if (s.stats) {
    j["plcc"] = s.stats->plcc;
    j["plcc_raw"] = s.stats->plcc_raw;
    j["srocc"] = s.stats->srocc;
    j["krocc"] = s.stats->krocc;
    j["rmse"] = s.stats->rmse;
    j["logistic"] = s.stats->beta;
  }
  return j;
}

nlohmann::json table_json(const stats_table& t) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [name, s] : t) {
    j[name] = stats_json(s);
  }
  return j;
}

}  // namespace

manifest parse_manifest(std::istream& in, const std::filesystem::path& base_dir, const std::string& source) {
  manifest m;
  std::string line;
  int line_no = 0;
  bool have_header = false;
  bool has_tag = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = source + ":" + std::to_string(line_no);
    if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
      line.erase(0, 3);
    }
    std::string t = trim(line);
    if (t.empty()) {
      continue;
    }
    if (t[0] == '#') {
      std::string body = lower(trim(t.substr(1)));
      if (body.rfind("mos_scale", 0) == 0) {
        auto colon = body.find(':');
        std::string value = colon == std::string::npos ? "" : trim(body.substr(colon + 1));
        if (value == "percent" || value == "percentage") {
          m.scale = mos_scale::percent;
        } else if (value == "five_point" || value == "five-point") {
          m.scale = mos_scale::five_point;
        } else {
          throw input_error(where + ": unknown mos_scale '" + value + "'");
        }
      }
      continue;
    }
    std::vector<std::string> fields = split_csv(t, where);
    if (!have_header) {
      std::vector<std::string> names;
      for (const auto& f : fields) {
        names.push_back(lower(f));
      }
      bool base = names.size() >= 3 && names[0] == "ref_path" && names[1] == "dist_path" && names[2] == "mos";
      if (!base || names.size() > 4 || (names.size() == 4 && names[3] != "tag")) {
        throw input_error(where + ": expected header ref_path,dist_path,mos[,tag]");
      }
      has_tag = names.size() == 4;
      have_header = true;
      continue;
    }
    if (fields.size() < 3 || fields.size() > (has_tag ? 4u : 3u)) {
      throw input_error(where + ": expected " + std::string(has_tag ? "3 or 4" : "3") + " fields, got " +
                        std::to_string(fields.size()));
    }
    manifest_row row;
    if (fields[0].empty() || fields[1].empty()) {
      throw input_error(where + ": empty path");
    }
    auto resolve = [&](const std::string& p) {
      std::filesystem::path path(p);
      return path.is_absolute() ? path : base_dir / path;
    };
    row.ref_path = resolve(fields[0]);
    row.dist_path = resolve(fields[1]);
    try {
      std::size_t used = 0;
      row.mos = std::stod(fields[2], &used);
      if (used != fields[2].size()) {
        throw std::invalid_argument("trailing characters");
      }
    } catch (const std::exception&) {
      throw input_error(where + ": mos '" + fields[2] + "' is not a number");
    }
    if (!std::isfinite(row.mos)) {
      throw input_error(where + ": mos must be finite");
    }
    if (fields.size() == 4) {
      row.tag = fields[3];
    }
    m.rows.push_back(std::move(row));
  }
  if (!have_header) {
    throw input_error(source + ": missing header ref_path,dist_path,mos[,tag]");
  }
  if (m.scale == mos_scale::percent) {
    for (auto& row : m.rows) {
      row.mos /= 20.0;
    }
  }
  return m;
}

manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw input_error(path.string() + ": cannot open manifest");
  }
  return parse_manifest(in, path.parent_path(), path.string());
}

const std::vector<std::string>& known_metrics() {
  static const std::vector<std::string> names{"rbfim",  "p2po",   "p2pl",   "psnr_p2po", "psnr_p2pl", "mse_y",
                                              "mse_u",  "mse_v",  "psnr_y", "psnr_u",    "psnr_v"};
  return names;
}

std::vector<std::string> parse_metric_list(const std::string& comma_separated) {
  std::vector<std::string> out;
  std::stringstream ss(comma_separated);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = lower(trim(item));
    if (item.empty()) {
      continue;
    }
    const auto& known = known_metrics();
    if (std::find(known.begin(), known.end(), item) == known.end()) {
      throw input_error("unknown metric '" + item + "'");
    }
    if (std::find(out.begin(), out.end(), item) == out.end()) {
      out.push_back(item);
    }
  }
  if (out.empty()) {
    throw input_error("no metrics selected");
  }
  return out;
}

metric_stats correlate(const std::vector<double>& pred, const std::vector<double>& mos) {
  metric_stats s;
  s.n = pred.size();
  auto constant = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
  };
  if (pred.size() < 3) {
    s.degenerate = true;
    s.reason = "fewer than 3 scored rows";
  } else if (constant(mos)) {
    s.degenerate = true;
    s.reason = "constant mos";
  } else if (constant(pred)) {
    s.degenerate = true;
    s.reason = "constant scores";
  } else if (!std::all_of(pred.begin(), pred.end(), [](double x) { return std::isfinite(x); })) {
    s.degenerate = true;
    s.reason = "non-finite scores";
  } else {
    s.stats = compute_correlations(pred, mos);
  }
  return s;
}

benchmark_result run_benchmark(const manifest& m, const std::vector<std::string>& metrics, const rbfim_config& cfg) {
  if (m.rows.empty()) {
    throw input_error("manifest has no rows");
  }
  if (metrics.empty()) {
    throw input_error("no metrics selected");
  }
  cfg.validate();
  rbfim_config row_cfg = cfg;
  row_cfg.threads = 1;

  benchmark_result result;
  result.metrics = metrics;
  result.rows.resize(m.rows.size());
  parallel_for(static_cast<index_t>(m.rows.size()), cfg.threads,
               [&](index_t i) { result.rows[i] = evaluate_row(m.rows[i], metrics, row_cfg); });

  result.stats = stats_over(result.rows, metrics, nullptr);
  std::vector<std::string> tags;
  for (const auto& row : m.rows) {
    if (!row.tag.empty() && std::find(tags.begin(), tags.end(), row.tag) == tags.end()) {
      tags.push_back(row.tag);
    }
  }
  for (const std::string& tag : tags) {
    result.stats_by_tag[tag] = stats_over(result.rows, metrics, &tag);
  }

  for (std::size_t i = 0; i < metrics.size(); ++i) {
    for (std::size_t j = i + 1; j < metrics.size(); ++j) {
      const metric_stats& a = result.stats.at(metrics[i]);
      const metric_stats& b = result.stats.at(metrics[j]);
      if (!a.stats || !b.stats) {
        continue;
      }
      double sa = std::abs(a.stats->srocc);
      double sb = std::abs(b.stats->srocc);
      result.pairwise.push_back({metrics[i], metrics[j], sa > sb ? '>' : (sa < sb ? '<' : '=')});
    }
  }
  return result;
}

std::string to_json(const benchmark_result& result, int indent) {
  nlohmann::json doc;
  doc["metrics"] = result.metrics;
  doc["rows"] = nlohmann::json::array();
  nlohmann::json failed = nlohmann::json::array();
  for (std::size_t i = 0; i < result.rows.size(); ++i) {
    const row_result& r = result.rows[i];
    nlohmann::json row;
    row["ref_path"] = r.row.ref_path.string();
    row["dist_path"] = r.row.dist_path.string();
    row["mos"] = r.row.mos;
    row["tag"] = r.row.tag;
    row["ok"] = r.ok;
    if (!r.ok) {
      row["error"] = r.error;
      failed.push_back({{"row", i}, {"dist_path", r.row.dist_path.string()}, {"error", r.error}});
    }
    row["scores"] = r.scores;
    row["timings"] = r.timings;
    doc["rows"].push_back(std::move(row));
  }
  doc["failed_rows"] = failed;
  doc["stats"] = table_json(result.stats);
  doc["stats_by_tag"] = nlohmann::json::object();
  for (const auto& [tag, t] : result.stats_by_tag) {
    doc["stats_by_tag"][tag] = table_json(t);
  }
  doc["pairwise"] = nlohmann::json::array();
  for (const pairwise_flag& p : result.pairwise) {
    doc["pairwise"].push_back({{"a", p.a}, {"b", p.b}, {"relation", std::string(1, p.relation)}});
  }
  return doc.dump(indent);
}

void print_table(std::ostream& out, const benchmark_result& result) {
  const auto flags = out.flags();
  out << std::fixed << std::setprecision(4);

  std::size_t path_w = 8;
  for (const row_result& r : result.rows) {
    path_w = std::max(path_w, r.row.dist_path.filename().string().size());
  }
  out << std::left << std::setw(static_cast<int>(path_w)) << "dist" << std::right << std::setw(10) << "mos";
  for (const std::string& m : result.metrics) {
    out << std::setw(12) << m;
  }
  out << '\n';
  for (const row_result& r : result.rows) {
    out << std::left << std::setw(static_cast<int>(path_w)) << r.row.dist_path.filename().string() << std::right
        << std::setw(10) << r.row.mos;
    if (!r.ok) {
      out << "  FAILED: " << r.error << '\n';
      continue;
    }
    for (const std::string& m : result.metrics) {
      out << std::setw(12) << r.scores.at(m);
    }
    out << '\n';
  }

  auto block = [&](const std::string& title, const stats_table& t) {
    out << '\n' << title << '\n';
    out << std::left << std::setw(12) << "metric" << std::right << std::setw(10) << "plcc" << std::setw(10) << "srocc"
        << std::setw(10) << "krocc" << std::setw(10) << "rmse" << std::setw(6) << "n" << '\n';
    for (const std::string& m : result.metrics) {
      const metric_stats& s = t.at(m);
      out << std::left << std::setw(12) << m << std::right;
      if (s.stats) {
        out << std::setw(10) << s.stats->plcc << std::setw(10) << s.stats->srocc << std::setw(10) << s.stats->krocc
            << std::setw(10) << s.stats->rmse << std::setw(6) << s.n << '\n';
      } else {
        out << "  degenerate (" << s.reason << "), n = " << s.n << '\n';
      }
    }
  };
  block("all rows", result.stats);
  for (const auto& [tag, t] : result.stats_by_tag) {
    block("tag " + tag, t);
  }
  if (!result.pairwise.empty()) {
    out << "\npairwise |srocc|\n";
    for (const pairwise_flag& p : result.pairwise) {
      out << "  " << p.a << ' ' << p.relation << ' ' << p.b << '\n';
    }
  }
  out.flags(flags);
}

}  // namespace rbfim
