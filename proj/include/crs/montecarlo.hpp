#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "crs/schemes.hpp"

namespace crs {

struct MonteCarloConfig {
  int trials = 100;
  std::vector<double> snr_grid_db{0, 5, 10, 15, 20, 25, 30};
  int n_t = 2;
  ChannelStats stats;
  std::vector<SchemeId> schemes{kAllSchemes.begin(), kAllSchemes.end()};
  std::uint64_t seed = 1;
  double epsilon = 1e-3;
  int threads = 1;
  bool timing = false;  // record wall-clock solver time (makes the CSV nondeterministic)

  void validate() const {
    if (trials < 1) throw DomainError("trials must be at least 1");
    if (snr_grid_db.empty()) throw DomainError("snr grid is empty");
    for (double s : snr_grid_db)
      if (!std::isfinite(s)) throw DomainError("snr values must be finite");
    if (schemes.empty()) throw DomainError("scheme list is empty");
    if (n_t < 2) throw InvalidDimension("n_t must be at least 2");
    if (threads < 1) throw DomainError("threads must be at least 1");
    if (!(epsilon > 0)) throw DomainError("epsilon must be positive");
    crs::validate(stats);
  }
};

struct TrialRecord {
  double snr_db = 0;
  SchemeId scheme = SchemeId::kCRS;
  int trial = 0;
  double ssr = 0;
  double theta = 0;
  int case_id = 0;  // 0 when no case was feasible
  int iters = 0;
  double solve_ms = 0;
  std::string status;
  std::string fingerprint;
};

struct SummaryRow {
  double snr_db = 0;
  SchemeId scheme = SchemeId::kCRS;
  int count = 0;
  double mean = 0;
  double std_error = 0;
};

inline constexpr const char* kCsvHeader = "snr_db,scheme,trial,ssr_bits,theta,case,iters,solve_ms,status";

inline PowerBudget budget_from_snr_db(double snr_db) {
  const double p = std::pow(10.0, snr_db / 10.0);
  return {p, p};
}

// Parses "start:step:stop" (inclusive) or a comma-separated list.
inline std::vector<double> parse_snr_grid(const std::string& text) {
  auto to_d = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      throw ParseError("snr", "not a number: '" + s + "'");
    }
    if (used != s.size() || !std::isfinite(v)) throw ParseError("snr", "not a number: '" + s + "'");
    return v;
  };
  std::vector<std::string> parts;
  const char sep = text.find(':') != std::string::npos ? ':' : ',';
  std::size_t pos = 0;
  while (true) {
    const auto next = text.find(sep, pos);
    parts.push_back(text.substr(pos, next - pos));
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  std::vector<double> grid;
  if (sep == ',') {
    for (const auto& p : parts) grid.push_back(to_d(p));
    return grid;
  }
  if (parts.size() != 3) throw ParseError("snr", "expected start:step:stop");
  const double start = to_d(parts[0]), step = to_d(parts[1]), stop = to_d(parts[2]);
  if (!(step > 0) || stop < start) throw ParseError("snr", "need step > 0 and stop >= start");
  const auto n = static_cast<int>(std::floor((stop - start) / step + 1e-9));
  for (int i = 0; i <= n; ++i) grid.push_back(start + i * step);
  return grid;
}

inline std::vector<SchemeId> parse_scheme_list(const std::string& text) {
  std::vector<SchemeId> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto next = text.find(',', pos);
    const auto name = text.substr(pos, next - pos);
    if (!name.empty()) {
      const auto s = parse_scheme(name);
      if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
    }
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  if (out.empty()) throw ParseError("schemes", "scheme list is empty");
  return out;
}

// Channel of one trial; identical at every SNR and for every scheme.
inline ChannelSet trial_channels(const MonteCarloConfig& cfg, int trial) {
  CounterRng rng = CounterRng(cfg.seed).split(static_cast<std::uint64_t>(trial));
  return generate_channel_set(rng, cfg.n_t, cfg.stats);
}

inline TrialRecord make_record(double snr_db, SchemeId s, int trial, const Solution& sol, bool timing) {
  TrialRecord r;
  r.snr_db = snr_db;
  r.scheme = s;
  r.trial = trial;
  r.ssr = std::max(sol.ssr(), 0.0);
  r.theta = sol.best.iterate.design.theta;
  r.case_id = sol.best.feasible() ? case_number(sol.best.case_id) : 0;
  r.iters = sol.best.iterations;
  r.solve_ms = 0;
  if (timing)
    for (const auto& c : sol.cases) r.solve_ms += c.solver_ms();
  r.status = to_string(sol.best.status);
  r.fingerprint = sol.fingerprint;
  return r;
}

// All requested schemes on one (snr, trial) cell; CRS is seeded with the
// baselines solved in the same cell.
inline std::vector<TrialRecord> run_cell(const MonteCarloConfig& cfg, const ChannelSet& cs,
                                         double snr_db, int trial) {
  ScaConfig sca;
  sca.epsilon = cfg.epsilon;
  sca.parallel_cases = false;
  const auto pb = budget_from_snr_db(snr_db);
  std::vector<TrialRecord> out;
  std::vector<std::pair<SchemeId, Solution>> baselines;
  for (SchemeId s : cfg.schemes) {
    if (s == SchemeId::kCRS) continue;
    try {
      baselines.emplace_back(s, solve_scheme(s, cs, pb, sca));
      out.push_back(make_record(snr_db, s, trial, baselines.back().second, cfg.timing));
    } catch (const std::exception&) {
      TrialRecord r{snr_db, s, trial, 0, 0, 0, 0, 0, "degraded", fingerprint(cs)};
      out.push_back(r);
    }
  }
  if (std::find(cfg.schemes.begin(), cfg.schemes.end(), SchemeId::kCRS) != cfg.schemes.end()) {
    std::vector<std::pair<SchemeId, const Solution*>> seeds;
    for (const auto& [s, sol] : baselines) seeds.emplace_back(s, &sol);
    try {
      out.push_back(make_record(snr_db, SchemeId::kCRS, trial, solve_crs_nested(cs, pb, sca, seeds),
                                cfg.timing));
    } catch (const std::exception&) {
      out.push_back({snr_db, SchemeId::kCRS, trial, 0, 0, 0, 0, 0, "degraded", fingerprint(cs)});
    }
  }
  return out;
}

inline bool record_less(const TrialRecord& a, const TrialRecord& b) {
  return std::tuple(a.snr_db, a.trial, static_cast<int>(a.scheme)) <
         std::tuple(b.snr_db, b.trial, static_cast<int>(b.scheme));
}

using CellCallback = std::function<void(const std::vector<TrialRecord>&)>;

inline std::vector<TrialRecord> run_montecarlo(const MonteCarloConfig& cfg,
                                               const CellCallback& on_cell = {}) {
  cfg.validate();
  std::vector<ChannelSet> channels;
  for (int t = 0; t < cfg.trials; ++t) channels.push_back(trial_channels(cfg, t));

  const int cells = static_cast<int>(cfg.snr_grid_db.size()) * cfg.trials;
  std::vector<std::vector<TrialRecord>> results(static_cast<std::size_t>(cells));
  std::atomic<int> next{0};
  std::mutex cb_mutex;
  auto worker = [&] {
    for (int k = next++; k < cells; k = next++) {
      const int si = k / cfg.trials, t = k % cfg.trials;
      results[static_cast<std::size_t>(k)] = run_cell(cfg, channels[t], cfg.snr_grid_db[si], t);
      if (on_cell) {
        std::lock_guard lock(cb_mutex);
        on_cell(results[static_cast<std::size_t>(k)]);
      }
    }
  };
  const int n_threads = std::min(cfg.threads, cells);
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::vector<TrialRecord> all;
  for (auto& r : results) all.insert(all.end(), r.begin(), r.end());
  std::sort(all.begin(), all.end(), record_less);
  return all;
}

inline std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& records) {
  std::map<std::pair<double, int>, std::vector<double>> groups;
  for (const auto& r : records) groups[{r.snr_db, static_cast<int>(r.scheme)}].push_back(r.ssr);
  std::vector<SummaryRow> out;
  for (const auto& [key, v] : groups) {
    SummaryRow row;
    row.snr_db = key.first;
    row.scheme = static_cast<SchemeId>(key.second);
    row.count = static_cast<int>(v.size());
    double sum = 0;
    for (double x : v) sum += x;
    row.mean = sum / row.count;
    if (row.count > 1) {
      double ss = 0;
      for (double x : v) ss += (x - row.mean) * (x - row.mean);
      row.std_error = std::sqrt(ss / (row.count - 1) / row.count);
    }
    out.push_back(row);
  }
  return out;
}

inline std::string format_number(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline void write_csv(std::ostream& os, const std::vector<TrialRecord>& records) {
  os << kCsvHeader << '\n';
  for (const auto& r : records)
    os << format_number(r.snr_db, 2) << ',' << to_string(r.scheme) << ',' << r.trial << ','
       << format_number(r.ssr, 6) << ',' << format_number(r.theta, 6) << ',' << r.case_id << ','
       << r.iters << ',' << format_number(r.solve_ms, 3) << ',' << r.status << '\n';
}

inline void write_summary(std::ostream& os, const std::vector<SummaryRow>& rows) {
  os << "snr_db,scheme,trials,mean_ssr_bits,std_error\n";
  for (const auto& r : rows)
    os << format_number(r.snr_db, 2) << ',' << to_string(r.scheme) << ',' << r.count << ','
       << format_number(r.mean, 6) << ',' << format_number(r.std_error, 6) << '\n';
}

}  // namespace crs
