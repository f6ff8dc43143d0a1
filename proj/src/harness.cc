/*
 * Copyright 2026 The byzfed Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "byzfed/harness.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include "byzfed/error.h"

namespace byzfed {
namespace {

[[noreturn]] void ConfigError(const std::string& msg) {
  throw Error(ErrorCode::kConfigError, msg);
}

double ToDouble(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos == v.size()) return d;
  } catch (const std::exception&) {
  }
  ConfigError(key + ": expected a number, got '" + v + "'");
}

uint64_t ToU64(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    if (!v.empty() && v[0] != '-') {
      unsigned long long x = std::stoull(v, &pos);
      if (pos == v.size()) return x;
    }
  } catch (const std::exception&) {
  }
  ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
}

uint32_t ToU32(const std::string& key, const std::string& v) {
  uint64_t x = ToU64(key, v);
  if (x > UINT32_MAX) ConfigError(key + ": value too large");
  return static_cast<uint32_t>(x);
}

bool ToBool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  ConfigError(key + ": expected a boolean, got '" + v + "'");
}

// Shortest text that reads back to the same double.
std::string Num(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::string Bool(bool b) { return b ? "true" : "false"; }

std::string ByzantineSpec(const FaultPlan& f) {
  std::string s;
  for (const auto& [j, script] : f.byzantine) {
    if (!s.empty()) s += ",";
    s += std::to_string(j) + ":" + ByzScriptName(script);
  }
  return s;
}

std::map<uint32_t, ByzScript> ParseByzantine(const std::string& key, const std::string& v) {
  std::map<uint32_t, ByzScript> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(std::remove_if(item.begin(), item.end(), ::isspace), item.end());
    if (item.empty()) continue;
    auto colon = item.find(':');
    if (colon == std::string::npos) ConfigError(key + ": expected id:script, got '" + item + "'");
    out[ToU32(key, item.substr(0, colon))] = ParseByzScript(item.substr(colon + 1));
  }
  return out;
}

struct Field {
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define BYZ_U32(expr)                                                               \
  Field{[](RunConfig& c, const std::string& k, const std::string& v) { expr = ToU32(k, v); }, \
        [](const RunConfig& c) { return std::to_string(expr); }}
#define BYZ_U64(expr)                                                               \
  Field{[](RunConfig& c, const std::string& k, const std::string& v) { expr = ToU64(k, v); }, \
        [](const RunConfig& c) { return std::to_string(expr); }}
#define BYZ_DBL(expr)                                                                  \
  Field{[](RunConfig& c, const std::string& k, const std::string& v) { expr = ToDouble(k, v); }, \
        [](const RunConfig& c) { return Num(expr); }}
#define BYZ_BOOL(expr)                                                               \
  Field{[](RunConfig& c, const std::string& k, const std::string& v) { expr = ToBool(k, v); }, \
        [](const RunConfig& c) { return Bool(expr); }}
#define BYZ_INT(expr)                                                                  \
  Field{[](RunConfig& c, const std::string& k, const std::string& v) {                  \
          expr = static_cast<int>(ToDouble(k, v));                                      \
        },                                                                              \
        [](const RunConfig& c) { return std::to_string(expr); }}

// Schema: section.key -> accessors. Order here is the order SaveConfig writes.
const std::vector<std::pair<std::string, Field>>& Schema() {
  static const auto* schema = new std::vector<std::pair<std::string, Field>>{
      {"run.name", Field{[](RunConfig& c, const std::string&, const std::string& v) { c.name = v; },
                         [](const RunConfig& c) { return c.name; }}},
      {"run.seed", BYZ_U64(c.sim.seed)},
      {"run.horizon", BYZ_U32(c.sim.params.horizon)},
      {"run.watchdog_factor", BYZ_DBL(c.sim.watchdog_factor)},
      {"topology.n_c", BYZ_U32(c.sim.params.n_c)},
      {"topology.n_a", BYZ_U32(c.sim.params.n_a)},
      {"topology.t_c", BYZ_U32(c.sim.params.t_c)},
      {"topology.t_a", BYZ_U32(c.sim.params.t_a)},
      {"topology.rho", BYZ_U32(c.sim.params.rho)},
      {"model.dim", BYZ_U32(c.sim.params.dim)},
      {"model.mask_dim", BYZ_U32(c.sim.params.mask_dim)},
      {"model.scale_bits", BYZ_INT(c.sim.params.scale_bits)},
      {"model.max_magnitude", BYZ_DBL(c.sim.params.max_magnitude)},
      {"model.max_summands", BYZ_U64(c.sim.params.max_summands)},
      {"model.model_scale_bits", BYZ_INT(c.sim.params.model_scale_bits)},
      {"model.group_bits", BYZ_INT(c.sim.params.group_bits)},
      {"model.seal",
       Field{[](RunConfig& c, const std::string& k, const std::string& v) {
               if (v == "static_box") c.sim.params.seal_backend = SealBackend::kStaticBox;
               else if (v == "sealed_box") c.sim.params.seal_backend = SealBackend::kSealedBox;
               else ConfigError(k + ": expected static_box or sealed_box");
             },
             [](const RunConfig& c) {
               return std::string(c.sim.params.seal_backend == SealBackend::kStaticBox
                                      ? "static_box" : "sealed_box");
             }}},
      {"task.heterogeneity",
       Field{[](RunConfig& c, const std::string&, const std::string& v) {
               c.sim.task.mode = ParseHeterogeneity(v);
             },
             [](const RunConfig& c) { return HeterogeneityName(c.sim.task.mode); }}},
      {"task.mu", BYZ_DBL(c.sim.task.mu)},
      {"task.L", BYZ_DBL(c.sim.task.L)},
      {"task.center_norm", BYZ_DBL(c.sim.task.center_norm)},
      {"task.spread", BYZ_DBL(c.sim.task.spread)},
      {"task.slow_count", BYZ_U32(c.sim.task.slow_count)},
      {"task.seed", BYZ_U64(c.sim.task.seed)},
      {"train.gamma", BYZ_DBL(c.gamma)},
      {"train.decay", BYZ_BOOL(c.decay)},
      {"train.clip", BYZ_DBL(c.sim.params.clip)},
      {"dp.epsilon", BYZ_DBL(c.epsilon)},
      {"dp.delta", BYZ_DBL(c.delta)},
      {"dp.sigma2", BYZ_DBL(c.raw_sigma2)},
      {"inclusion.mode",
       Field{[](RunConfig& c, const std::string& k, const std::string& v) {
               if (v == "debiased") c.sim.params.inclusion = InclusionMode::kDebiased;
               else if (v == "first_arrival") c.sim.params.inclusion = InclusionMode::kFirstArrival;
               else ConfigError(k + ": expected debiased or first_arrival");
             },
             [](const RunConfig& c) {
               return std::string(c.sim.params.inclusion == InclusionMode::kDebiased
                                      ? "debiased" : "first_arrival");
             }}},
      {"inclusion.blame", BYZ_BOOL(c.sim.params.blame_enabled)},
      {"inclusion.blame_given", BYZ_BOOL(c.blame_given)},
      {"inclusion.expected_var", BYZ_DBL(c.sim.params.blame.expected_var)},
      {"inclusion.sec_param", BYZ_DBL(c.sim.params.blame.sec_param)},
      {"inclusion.delta_max", BYZ_DBL(c.sim.params.blame.delta_max)},
      {"inclusion.calib_trials", BYZ_U32(c.calib_trials)},
      {"inclusion.calib_validation_trials", BYZ_U32(c.calib_validation_trials)},
      {"inclusion.fairness_assertions", BYZ_BOOL(c.sim.params.fairness_assertions)},
      {"inclusion.relax_rho_bound", BYZ_BOOL(c.sim.params.relax_rho_bound)},
      {"delay.agg_shape", BYZ_DBL(c.sim.delays.aggregator.shape)},
      {"delay.agg_scale", BYZ_DBL(c.sim.delays.aggregator.scale)},
      {"delay.fast_shape", BYZ_DBL(c.sim.delays.fast_client.shape)},
      {"delay.fast_scale", BYZ_DBL(c.sim.delays.fast_client.scale)},
      {"delay.slow_shape", BYZ_DBL(c.sim.delays.slow_client.shape)},
      {"delay.slow_scale", BYZ_DBL(c.sim.delays.slow_client.scale)},
      {"delay.slow_count", BYZ_INT(c.sim.delays.slow_count)},
      {"faults.crash_count", BYZ_U32(c.crash_count)},
      {"faults.crash_start", BYZ_DBL(c.crash_start)},
      {"faults.crash_end", BYZ_DBL(c.crash_end)},
      {"faults.byzantine",
       Field{[](RunConfig& c, const std::string& k, const std::string& v) {
               c.sim.faults.byzantine = ParseByzantine(k, v);
             },
             [](const RunConfig& c) { return ByzantineSpec(c.sim.faults); }}},
      {"faults.halt_round", BYZ_U64(c.sim.faults.byz_options.halt_round)},
      {"output.trace", Field{[](RunConfig& c, const std::string& k, const std::string& v) {
                               c.sim.trace_path = ToBool(k, v) ? "trace.ndjson" : "";
                             },
                             [](const RunConfig& c) { return Bool(!c.sim.trace_path.empty()); }}},
      {"output.payloads", BYZ_BOOL(c.sim.dump_payloads)},
  };
  return *schema;
}

#undef BYZ_U32
#undef BYZ_U64
#undef BYZ_DBL
#undef BYZ_BOOL
#undef BYZ_INT

double MeanDelay(const DelayModel& d) {
  return 2.0 * std::max(d.slow_client.mean(), d.fast_client.mean()) + 8.0 * d.aggregator.mean();
}

uint32_t SlowCount(const RunConfig& c) {
  const ProtocolParams& p = c.sim.params;
  const int64_t n = c.sim.delays.slow_count >= 0 ? c.sim.delays.slow_count : 2 * int64_t{p.t_c} + 1;
  return static_cast<uint32_t>(std::min<int64_t>(n, p.n_c));
}

// The explicit crash times, or crash_count lowest ids evenly spaced over
// [crash_start, crash_end].
std::map<uint32_t, double> CrashTimes(const RunConfig& c) {
  if (!c.sim.faults.client_crash_times.empty() || c.crash_count == 0) {
    return c.sim.faults.client_crash_times;
  }
  std::map<uint32_t, double> out;
  const double end =
      c.crash_end >= 0 ? c.crash_end : 0.5 * MeanDelay(c.sim.delays) * c.sim.params.horizon;
  for (uint32_t i = 0; i < c.crash_count; ++i) {
    out[i] = c.crash_count == 1 ? c.crash_start
                                : c.crash_start + (end - c.crash_start) * i / (c.crash_count - 1);
  }
  return out;
}

}  // namespace

std::vector<std::string> PresetNames() {
  return {"smoke",       "liveness_halt",      "liveness_omit",          "liveness_fabricate",
          "liveness_tamper", "fairness_debiased", "fairness_first_arrival", "convergence",
          "oracle",      "complexity",         "equivocation"};
}

RunConfig Preset(const std::string& name) {
  RunConfig c;
  c.name = name;
  ProtocolParams& p = c.sim.params;
  if (name == "smoke") {
    // k = 4 admits no rho above 1 + sqrt(5) below k, so the bound is relaxed.
    p.n_c = 8; p.n_a = 2; p.t_a = 0; p.t_c = 0; p.rho = 2; p.horizon = 3;
    p.relax_rho_bound = true;
    c.calib_trials = 50;
    c.calib_validation_trials = 50;
  } else if (name.rfind("liveness_", 0) == 0) {
    p.n_c = 120; p.n_a = 4; p.t_a = 1; p.t_c = 30; p.rho = 8; p.horizon = 50;
    c.crash_count = 30;
    c.sim.faults.byzantine[0] = ParseByzScript(name.substr(9));
  } else if (name == "fairness_debiased" || name == "fairness_first_arrival") {
    p.n_c = 64; p.n_a = 1; p.t_a = 0; p.t_c = 12; p.rho = 16; p.horizon = 300;
    c.sim.task.mode = Heterogeneity::kTwoPopulation;
    // Gradients stay unclipped near the optimum, and the decaying step
    // removes sampling jitter so the final distance isolates inclusion bias.
    p.clip = 4;
    c.decay = true;
    if (name == "fairness_first_arrival") {
      p.inclusion = InclusionMode::kFirstArrival;
      p.blame_enabled = false;
    }
  } else if (name == "convergence") {
    // Clusters of 128 keep the inclusion bound, and so the noise, low.
    p.n_c = 512; p.n_a = 4; p.t_a = 1; p.t_c = 16; p.rho = 16; p.horizon = 300;
    c.epsilon = 8;
    c.decay = true;
    c.crash_count = 16;
    c.sim.faults.byzantine[0] = ByzScript::kHalt;
  } else if (name == "oracle") {
    p.n_c = 64; p.n_a = 1; p.t_a = 0; p.t_c = 0; p.rho = 16; p.horizon = 100;
    p.blame_enabled = false;
  } else if (name == "complexity") {
    p.n_c = 120; p.n_a = 4; p.t_a = 1; p.t_c = 0; p.rho = 8; p.horizon = 5;
  } else if (name == "equivocation") {
    p.n_c = 64; p.n_a = 4; p.t_a = 1; p.t_c = 0; p.rho = 6; p.horizon = 3;
    c.sim.faults.byzantine[0] = ByzScript::kEquivocate;
  } else {
    ConfigError("unknown preset '" + name + "'");
  }
  return c;
}

RunConfig LoadConfig(const std::string& path, const RunConfig& base) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    ConfigError(std::string("cannot read config: ") + e.what());
  }
  RunConfig c = base;
  const auto& schema = Schema();
  for (const auto& [section, keys] : tree) {
    if (keys.empty() && !keys.data().empty()) ConfigError("key outside a section: " + section);
    for (const auto& [key, value] : keys) {
      const std::string full = section + "." + key;
      auto it = std::find_if(schema.begin(), schema.end(),
                             [&](const auto& e) { return e.first == full; });
      if (it == schema.end()) ConfigError("unknown config key '" + full + "'");
      it->second.set(c, full, value.data());
    }
  }
  return c;
}

void SaveConfig(const RunConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) ConfigError("cannot write " + path);
  std::string section;
  for (const auto& [full, field] : Schema()) {
    const std::string sec = full.substr(0, full.find('.'));
    if (sec != section) {
      if (!section.empty()) out << "\n";
      out << "[" << sec << "]\n";
      section = sec;
    }
    out << full.substr(sec.size() + 1) << " = " << field.get(cfg) << "\n";
  }
}

BlameCalibration CalibrateBlameFor(const RunConfig& cfg) {
  const ProtocolParams& p = cfg.sim.params;
  BlameCalibrationConfig bc;
  bc.n_c = p.n_c;
  bc.n_a = p.n_a;
  bc.t_c = p.t_c;
  bc.rho = p.rho;
  bc.participation = p.ping_quorum();
  bc.horizon = p.horizon;
  bc.trials = cfg.calib_trials;
  bc.validation_trials = cfg.calib_validation_trials;
  // Participation follows the configured delays: a PING arrives after the
  // TRAIN and PING legs of the client's link, two iid gamma draws.
  const DelayModel& d = cfg.sim.delays;
  const uint32_t slow_from = p.n_c - SlowCount(cfg);
  for (uint32_t c = 0; c < p.n_c; ++c) {
    const GammaParams& g = c >= slow_from ? d.slow_client : d.fast_client;
    bc.arrival.emplace_back(2 * g.shape, g.scale);
  }
  for (const auto& [c, t] : CrashTimes(cfg)) {
    bc.crash_round[c] = static_cast<uint64_t>(t / MeanDelay(d));
  }
  bc.assignment_seed = DeriveSeed(SeedFromU64(cfg.sim.seed), "byzfed/public");
  bc.mc_seed = cfg.sim.seed;
  return CalibrateBlame(bc);
}

PreparedRun Prepare(const RunConfig& cfg) {
  PreparedRun out;
  out.cfg = cfg;
  RunConfig& c = out.cfg;
  ProtocolParams& p = c.sim.params;
  p.public_seed = DeriveSeed(SeedFromU64(c.sim.seed), "byzfed/public");

  // Topology rules first so errors name the violated constraint.
  {
    ProtocolParams probe = p;
    probe.blame_enabled = false;
    probe.step.gamma0 = 1;
    probe.Validate();
  }

  if (c.sim.task.mode == Heterogeneity::kTwoPopulation && c.sim.task.slow_count == 0) {
    c.sim.task.slow_count = SlowCount(c);
  }

  if (c.gamma <= 0) c.gamma = 1.0 / c.sim.task.L;
  p.step.gamma0 = c.gamma;
  p.step.decay = c.decay;
  p.step.mu = c.sim.task.mu;
  p.step.t0 = c.sim.task.L / c.sim.task.mu;

  const bool debiased = p.inclusion == InclusionMode::kDebiased;
  if (debiased && (p.blame_enabled || c.epsilon > 0) && !c.blame_given) {
    out.blame = CalibrateBlameFor(c);
    out.blame_calibrated = true;
    p.blame = out.blame.params;
  }
  p.blame.keep = static_cast<uint32_t>(p.inclusion_keep());

  if (c.epsilon > 0) {
    out.dp_T = debiased ? InclusionBound(p.horizon, p.rho, p.k(),
                                         static_cast<uint64_t>(std::ceil(p.blame.delta_max)))
                        : p.horizon;
    out.dp = DpFromRdp(c.epsilon, c.delta, static_cast<double>(out.dp_T), p.clip);
    p.sigma2 = out.dp.sigma2;
  } else {
    p.sigma2 = c.raw_sigma2;
  }

  c.sim.faults.client_crash_times = CrashTimes(c);
  p.Validate();
  return out;
}

void MessageTally::Add(const ProtocolParams& p, const TraceRecord& rec) {
  if (rec.src == rec.dst) {
    ++self;
    return;
  }
  ++total;
  const bool from_agg = rec.src < p.n_a;
  ++by_round_type_role[{rec.round, rec.type, from_agg ? Role::kAggregator : Role::kClient}];
  if (from_agg) {
    ++per_agg_round[{rec.src, rec.round}];
  } else {
    ++per_client_round[{rec.src - p.n_a, rec.round}];
  }
}

Metrics ExtractMetrics(const Simulator& sim, const SimResult& res, MessageTally tally) {
  const ProtocolParams& p = sim.context().params;
  Metrics m;
  m.trace_hash = res.trace_hash;
  m.messages = std::move(tally);
  m.inclusion_counts.assign(p.n_c, 0);

  std::map<std::pair<uint32_t, uint64_t>, bool> wasted;
  std::map<std::pair<uint32_t, uint64_t>, uint32_t> blames;
  for (const EventRecord& e : sim.recorder().events) {
    ++m.events[e.kind];
    if (sim.is_byzantine(e.node)) continue;
    if (e.kind == "included") {
      for (uint32_t c : e.ids) ++m.inclusion_counts[c];
    } else if (e.kind == "wasted" || e.kind == "abort") {
      wasted[{e.node, e.round}] = true;
    } else if (e.kind == "blame" || e.kind == "self_blame") {
      ++blames[{e.node, e.round}];
    }
  }
  for (const FinalizeRecord& f : sim.recorder().finalizations) {
    if (sim.is_byzantine(f.aggregator)) continue;
    Evaluation ev = Evaluate(f.model, sim.tasks());
    RoundMetric r;
    r.aggregator = f.aggregator;
    r.round = f.round;
    r.time = f.time;
    r.distance = ev.distance;
    r.objective = ev.objective;
    r.final_selec = f.final_selec;
    r.wasted = wasted.count({f.aggregator, f.round - 1}) != 0;
    auto b = blames.find({f.aggregator, f.round - 1});
    r.blame_events = b == blames.end() ? 0 : b->second;
    m.rounds.push_back(r);
  }
  return m;
}

ComplexitySample MeasureComplexity(const ProtocolParams& p, const MessageTally& tally,
                                   const std::vector<uint32_t>& honest) {
  ComplexitySample s;
  s.n_c = p.n_c;
  s.n_a = p.n_a;
  bool first = true;
  for (const auto& [key, n] : tally.per_client_round) {
    s.client_per_round_min = first ? n : std::min<double>(s.client_per_round_min, n);
    s.client_per_round_max = first ? n : std::max<double>(s.client_per_round_max, n);
    first = false;
  }
  double sum = 0;
  size_t count = 0;
  for (const auto& [key, n] : tally.per_agg_round) {
    if (std::find(honest.begin(), honest.end(), key.first) == honest.end()) continue;
    s.agg_per_round_max = std::max<double>(s.agg_per_round_max, n);
    sum += n;
    ++count;
  }
  s.agg_per_round_mean = count == 0 ? 0 : sum / count;
  return s;
}

RunConfig ComplexityConfig(const RunConfig& base, uint32_t n_c, uint32_t n_a, uint32_t horizon) {
  RunConfig cfg = base;
  ProtocolParams& p = cfg.sim.params;
  p.n_a = n_a;
  p.t_a = (n_a - 1) / 3;
  // Nearest multiple of n_a so clusters stay equal-sized.
  p.n_c = std::max<uint32_t>(n_a, (n_c + n_a / 2) / n_a * n_a);
  p.t_c = 0;
  p.horizon = horizon;
  const double k = static_cast<double>(p.k());
  p.rho = static_cast<uint32_t>(std::floor(1 + std::sqrt(1 + k))) + 1;
  p.fairness_assertions = false;
  cfg.crash_count = 0;
  cfg.sim.faults = {};
  cfg.epsilon = 0;
  cfg.raw_sigma2 = 0;
  cfg.name = "complexity_" + std::to_string(p.n_c) + "_" + std::to_string(n_a);
  return cfg;
}

ComplexityReport BuildComplexityReport(std::vector<ComplexitySample> samples) {
  ComplexityReport r;
  r.samples = std::move(samples);
  // Least squares without intercept: y ~ c1 a + c2 k.
  double saa = 0, sak = 0, skk = 0, say = 0, sky = 0;
  for (const auto& s : r.samples) {
    const double a = s.n_a, k = static_cast<double>(s.n_c) / s.n_a, y = s.agg_per_round_max;
    saa += a * a; sak += a * k; skk += k * k; say += a * y; sky += k * y;
  }
  const double det = saa * skk - sak * sak;
  double c1 = 0, c2 = 0;
  if (std::fabs(det) > 1e-12) {
    c1 = (say * skk - sky * sak) / det;
    c2 = (saa * sky - sak * say) / det;
  }
  r.c1 = std::ceil(std::max(c1, 0.0));
  r.c2 = std::ceil(std::max(c2, 0.0));
  r.client_ok = !r.samples.empty();
  r.aggregator_ok = !r.samples.empty();
  std::ostringstream os;
  os << "fitted c1 = " << c1 << " -> " << r.c1 << ", c2 = " << c2 << " -> " << r.c2 << "\n";
  os << std::left << std::setw(6) << "n_c" << std::setw(6) << "n_a" << std::setw(6) << "k"
     << std::setw(14) << "client/round" << std::setw(10) << "n_a+1" << std::setw(12)
     << "agg/round" << std::setw(12) << "agg mean" << "bound\n";
  for (const auto& s : r.samples) {
    const double k = static_cast<double>(s.n_c) / s.n_a;
    const double bound = r.c1 * s.n_a + r.c2 * k;
    const bool cok = s.client_per_round_min == s.n_a + 1 && s.client_per_round_max == s.n_a + 1;
    const bool aok = s.agg_per_round_max <= bound;
    r.client_ok = r.client_ok && cok;
    r.aggregator_ok = r.aggregator_ok && aok;
    std::ostringstream cr;
    cr << s.client_per_round_min << "-" << s.client_per_round_max;
    os << std::setw(6) << s.n_c << std::setw(6) << s.n_a << std::setw(6) << k << std::setw(14)
       << cr.str() << std::setw(10) << s.n_a + 1 << std::setw(12) << s.agg_per_round_max
       << std::setw(12) << std::setprecision(4) << s.agg_per_round_mean << bound
       << (cok && aok ? "" : "  VIOLATION") << "\n";
  }
  r.text = os.str();
  return r;
}

namespace {

void WriteCsvs(const ExperimentResult& r, const std::string& dir, const Simulator& sim) {
  const ProtocolParams& p = r.prepared.cfg.sim.params;
  {
    std::ofstream f(dir + "/metrics.csv");
    f << "round,aggregator,time,distance,objective,final_selec,wasted,blame_events\n";
    f << std::setprecision(10);
    for (const auto& m : r.metrics.rounds) {
      f << m.round << "," << m.aggregator << "," << m.time << "," << m.distance << ","
        << m.objective << "," << m.final_selec << "," << (m.wasted ? 1 : 0) << ","
        << m.blame_events << "\n";
    }
  }
  {
    std::ofstream f(dir + "/inclusion.csv");
    f << "client,count,slow\n";
    const uint32_t slow_from = p.n_c - sim.slow_count();
    for (uint32_t c = 0; c < p.n_c; ++c) {
      f << c << "," << r.metrics.inclusion_counts[c] << "," << (c >= slow_from ? 1 : 0) << "\n";
    }
  }
  {
    std::ofstream f(dir + "/messages.csv");
    f << "round,type,sender_role,count\n";
    for (const auto& [key, n] : r.metrics.messages.by_round_type_role) {
      const auto& [round, type, role] = key;
      f << round << "," << MsgTypeName(type) << ","
        << (role == Role::kAggregator ? "aggregator" : "client") << "," << n << "\n";
    }
  }
  std::ofstream(dir + "/summary.json") << SummaryJson(r) << "\n";
}

}  // namespace

std::string SummaryJson(const ExperimentResult& r) {
  using nlohmann::ordered_json;
  const RunConfig& c = r.prepared.cfg;
  const ProtocolParams& p = c.sim.params;
  ordered_json j;
  j["name"] = c.name;
  j["seed"] = c.sim.seed;
  j["params"] = {{"n_c", p.n_c}, {"n_a", p.n_a}, {"t_c", p.t_c}, {"t_a", p.t_a},
                 {"k", p.k()}, {"rho", p.rho}, {"dim", p.dim}, {"mask_dim", p.mask_dim},
                 {"horizon", p.horizon}, {"clip", p.clip}, {"sigma2", p.sigma2},
                 {"gamma", p.step.gamma0}, {"decay", p.step.decay},
                 {"inclusion", p.inclusion == InclusionMode::kDebiased ? "debiased" : "first_arrival"},
                 {"byzantine", ByzantineSpec(c.sim.faults)},
                 {"crashes", c.sim.faults.client_crash_times.size()}};
  if (c.epsilon > 0) {
    j["dp"] = {{"epsilon", c.epsilon}, {"delta", c.delta}, {"T", r.prepared.dp_T},
               {"alpha", r.prepared.dp.alpha}, {"sigma2", r.prepared.dp.sigma2}};
  }
  j["blame"] = {{"enabled", p.blame_enabled}, {"expected_var", p.blame.expected_var},
                {"sec_param", p.blame.sec_param}, {"delta_max", p.blame.delta_max},
                {"keep", p.blame.keep}};
  if (r.prepared.blame_calibrated) {
    j["blame"]["false_blame_rate"] = r.prepared.blame.false_blame_rate;
    j["blame"]["checks"] = r.prepared.blame.checks;
  }
  j["completed"] = r.sim.completed;
  j["watchdog_tripped"] = r.sim.watchdog_tripped;
  j["end_time"] = r.sim.end_time;
  j["sends"] = r.sim.sends;
  j["deliveries"] = r.sim.deliveries;
  j["dropped_crashed"] = r.sim.dropped_crashed;
  j["trace_hash"] = Hex(r.sim.trace_hash);
  ordered_json counts = ordered_json::object();
  for (int t = 1; t <= kNumMsgTypes; ++t) {
    counts[std::string(MsgTypeName(static_cast<MsgType>(t)))] = r.sim.counts_by_type[t];
  }
  j["messages"] = counts;
  ordered_json finals = ordered_json::array();
  std::map<uint32_t, const RoundMetric*> last;
  for (const auto& m : r.metrics.rounds) last[m.aggregator] = &m;
  for (const auto& [a, m] : last) {
    finals.push_back({{"aggregator", a}, {"rounds", m->round}, {"distance", m->distance},
                      {"objective", m->objective}});
  }
  j["final"] = finals;
  j["events"] = r.metrics.events;
  j["violations"] = r.violations;
  return j.dump(2);
}

ExperimentResult RunExperiment(const RunConfig& cfg, const std::string& out_dir) {
  ExperimentResult r;
  r.prepared = Prepare(cfg);
  SimConfig sc = r.prepared.cfg.sim;
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    if (!sc.trace_path.empty()) sc.trace_path = out_dir + "/" + sc.trace_path;
  } else {
    sc.trace_path.clear();
  }
  MessageTally tally;
  const ProtocolParams params = sc.params;
  auto user_tap = sc.tap;
  sc.tap = [&tally, &params, user_tap](const TraceRecord& rec, std::span<const uint8_t> b) {
    tally.Add(params, rec);
    if (user_tap) user_tap(rec, b);
  };
  Simulator sim(sc);
  r.sim = sim.Run(false);
  r.metrics = ExtractMetrics(sim, r.sim, std::move(tally));

  const ProtocolParams& p = params;
  if (!r.sim.completed) r.violations.push_back("liveness: " + r.sim.failure);
  // Accounting: the tally must match the simulator's own counters.
  const MessageTally& t = r.metrics.messages;
  uint64_t by_type = 0;
  for (uint64_t n : r.sim.counts_by_type) by_type += n;
  if (t.total + t.self != r.sim.deliveries || t.total != by_type) {
    r.violations.push_back("message accounting does not match the trace");
  }
  if (r.sim.completed && r.prepared.cfg.sim.drain && r.sim.sends != r.sim.deliveries) {
    r.violations.push_back("reliable delivery: sends != deliveries");
  }
  for (const auto& [key, n] : t.per_client_round) {
    if (n != p.n_a + 1) {
      r.violations.push_back("client " + std::to_string(key.first) + " sent " +
                             std::to_string(n) + " messages in round " +
                             std::to_string(key.second));
      break;
    }
  }
  if (!out_dir.empty()) WriteCsvs(r, out_dir, sim);
  return r;
}

}  // namespace byzfed
