#ifndef HDC_REPORT_HPP
#define HDC_REPORT_HPP

#include <cstdint>
#include <string>

#include <json.hpp>

#include "hdc/common.hpp"
#include "hdc/dc.hpp"
#include "hdc/rng.hpp"

namespace hdc {

using ordered_json = nlohmann::ordered_json;

inline constexpr const char* kReportFormatVersion = "1.0";

/// Everything a solve run reports: input identity, option echo, per-merge
/// statistics, flop totals, verification metrics, and timing. Serializes
/// to the documented JSON schema and back without loss; wall_time_ms is
/// the only field that varies between identical runs.
struct SolveReport {
  std::string format_version = kReportFormatVersion;
  ordered_json input = ordered_json::object();
  DCOptions options;
  int threads = 0;
  std::string rng_generator = rng_name();
  Index n = 0;
  SolveStats stats;
  VerifyMetrics verification;
  double orth_threshold = 5e-13;
  double resid_threshold = 1e-12;
  bool passed = false;
  double wall_time_ms = 0.0;
};

inline ordered_json report_to_json(const SolveReport& r) {
  ordered_json j;
  j["format_version"] = r.format_version;
  j["program"] = {{"name", "hdc"}, {"version", HDC_VERSION_STRING}};
  j["input"] = r.input;
  j["options"] = {
      {"base_size", r.options.base_size},
      {"switch_threshold", r.options.switch_threshold},
      {"hss_tol", r.options.hss_tol},
      {"leaf_size", r.options.leaf_size},
      {"r0", r.options.r0},
      {"oversampling", r.options.p},
      {"rank_increment", r.options.rank_increment},
      {"path", to_string(r.options.path)},
      {"tol_factor", r.options.tol_factor},
      {"threads", r.threads},
  };
  j["rng"] = {{"generator", r.rng_generator}, {"seed", r.options.seed}};
  j["n"] = r.n;
  ordered_json merges = ordered_json::array();
  for (const auto& m : r.stats.merges) {
    ordered_json e;
    e["level"] = m.level;
    e["n"] = m.n_merge;
    e["K"] = m.K;
    e["deflation_fraction"] = m.deflation_fraction;
    e["path"] = m.path;
    if (m.path == "hss") {
      e["hss_rank"] = m.hss_rank;
      e["hss_samples"] = m.hss_samples;
      e["hss_fallback"] = m.hss_fallback;
    }
    e["flops_secular"] = m.flops_secular;
    e["flops_update"] = m.flops_update;
    merges.push_back(std::move(e));
  }
  j["merges"] = std::move(merges);
  j["totals"] = {
      {"flops", r.stats.flops_total},
      {"flops_base", r.stats.flops_base},
      {"flops_secular", r.stats.flops_secular},
      {"flops_update", r.stats.flops_update},
      {"deflation_fraction", r.stats.deflation_fraction},
      {"max_hss_rank", r.stats.max_hss_rank},
  };
  j["verification"] = {
      {"orthogonality", r.verification.orthogonality},
      {"max_residual", r.verification.max_residual},
      {"ascending", r.verification.ascending},
      {"thresholds",
       {{"orthogonality", r.orth_threshold}, {"max_residual", r.resid_threshold}}},
      {"passed", r.passed},
  };
  j["wall_time_ms"] = r.wall_time_ms;
  return j;
}

inline SolveReport report_from_json(const ordered_json& j) {
  SolveReport r;
  try {
    r.format_version = j.at("format_version").get<std::string>();
    const auto dot = r.format_version.find('.');
    const int major = std::stoi(r.format_version.substr(0, dot));
    if (major != 1)
      throw ParseError("report: unsupported format version '" + r.format_version + "'");

    r.input = j.at("input");
    const auto& o = j.at("options");
    r.options.base_size = o.at("base_size").get<Index>();
    r.options.switch_threshold = o.at("switch_threshold").get<Index>();
    r.options.hss_tol = o.at("hss_tol").get<double>();
    r.options.leaf_size = o.at("leaf_size").get<Index>();
    r.options.r0 = o.at("r0").get<Index>();
    r.options.p = o.at("oversampling").get<Index>();
    r.options.rank_increment = o.at("rank_increment").get<Index>();
    r.options.path = path_override_from_string(o.at("path").get<std::string>());
    r.options.tol_factor = o.at("tol_factor").get<double>();
    r.threads = o.at("threads").get<int>();
    r.rng_generator = j.at("rng").at("generator").get<std::string>();
    r.options.seed = j.at("rng").at("seed").get<std::uint64_t>();
    r.n = j.at("n").get<Index>();
    for (const auto& e : j.at("merges")) {
      MergeStats m;
      m.level = e.at("level").get<Index>();
      m.n_merge = e.at("n").get<Index>();
      m.K = e.at("K").get<Index>();
      m.deflation_fraction = e.at("deflation_fraction").get<double>();
      m.path = e.at("path").get<std::string>();
      if (m.path == "hss") {
        m.hss_rank = e.at("hss_rank").get<Index>();
        m.hss_samples = e.at("hss_samples").get<Index>();
        m.hss_fallback = e.at("hss_fallback").get<bool>();
      }
      m.flops_secular = e.at("flops_secular").get<std::uint64_t>();
      m.flops_update = e.at("flops_update").get<std::uint64_t>();
      r.stats.merges.push_back(std::move(m));
    }
    const auto& t = j.at("totals");
    r.stats.flops_total = t.at("flops").get<std::uint64_t>();
    r.stats.flops_base = t.at("flops_base").get<std::uint64_t>();
    r.stats.flops_secular = t.at("flops_secular").get<std::uint64_t>();
    r.stats.flops_update = t.at("flops_update").get<std::uint64_t>();
    r.stats.deflation_fraction = t.at("deflation_fraction").get<double>();
    r.stats.max_hss_rank = t.at("max_hss_rank").get<Index>();
    const auto& v = j.at("verification");
    r.verification.orthogonality = v.at("orthogonality").get<double>();
    r.verification.max_residual = v.at("max_residual").get<double>();
    r.verification.ascending = v.at("ascending").get<bool>();
    r.orth_threshold = v.at("thresholds").at("orthogonality").get<double>();
    r.resid_threshold = v.at("thresholds").at("max_residual").get<double>();
    r.passed = v.at("passed").get<bool>();
    r.wall_time_ms = j.at("wall_time_ms").get<double>();
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(std::string("report: malformed document: ") + e.what());
  }
  return r;
}

}  // namespace hdc

#endif  // HDC_REPORT_HPP
