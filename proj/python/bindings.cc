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

// Python bindings: codec, secret sharing, privacy calibration, assignment
// and inclusion primitives, plus whole experiments through the harness.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "byzfed/assignment.h"
#include "byzfed/dp.h"
#include "byzfed/error.h"
#include "byzfed/field.h"
#include "byzfed/harness.h"
#include "byzfed/inclusion.h"
#include "byzfed/shamir.h"

namespace py = pybind11;

namespace byzfed {
namespace {

FixedPointCodec MakeCodec(int scale_bits, double max_magnitude, uint64_t max_summands) {
  return FixedPointCodec(PrimeField(), scale_bits, max_magnitude, max_summands);
}

Seed PublicSeed(uint64_t seed) { return DeriveSeed(SeedFromU64(seed), "byzfed/public"); }

RunConfig Resolve(const std::optional<std::string>& preset,
                  const std::optional<std::string>& config, std::optional<uint64_t> seed) {
  RunConfig cfg = preset ? Preset(*preset) : RunConfig{};
  if (config) cfg = LoadConfig(*config, cfg);
  if (seed) cfg.sim.seed = *seed;
  return cfg;
}

std::string ConfigText(const RunConfig& cfg) {
  const auto path = std::filesystem::temp_directory_path() / "byzfed_py_config.ini";
  SaveConfig(cfg, path.string());
  std::stringstream ss;
  ss << std::ifstream(path).rdbuf();
  std::filesystem::remove(path);
  return ss.str();
}

}  // namespace
}  // namespace byzfed

PYBIND11_MODULE(_byzfed, m) {
  using namespace byzfed;
  m.doc() = "Byzantine-resilient private federated learning simulator";
  py::register_exception<Error>(m, "ByzfedError", PyExc_ValueError);

  m.attr("MODULUS") = py::int_(kMersenne61);

  m.def(
      "encode",
      [](const std::vector<double>& x, int scale_bits, double max_magnitude,
         uint64_t max_summands) {
        return MakeCodec(scale_bits, max_magnitude, max_summands).Encode(x).elems;
      },
      py::arg("values"), py::arg("scale_bits") = 16, py::arg("max_magnitude") = 1 << 20,
      py::arg("max_summands") = 1 << 16);
  m.def(
      "decode",
      [](const std::vector<uint64_t>& v, int scale_bits) {
        return MakeCodec(scale_bits, 1, 1).Decode(FieldVec(v));
      },
      py::arg("residues"), py::arg("scale_bits") = 16);
  m.def(
      "field_add",
      [](const std::vector<uint64_t>& a, const std::vector<uint64_t>& b) {
        return VecAdd(PrimeField(), FieldVec(a), FieldVec(b)).elems;
      },
      py::arg("a"), py::arg("b"));

  m.def(
      "shamir_share",
      [](const std::vector<uint64_t>& secret, int n, int t, uint64_t seed) {
        ChaChaRng rng(SeedFromU64(seed));
        std::vector<std::pair<uint32_t, std::vector<uint64_t>>> out;
        for (const Share& s : ShamirShare(PrimeField(), FieldVec(secret), n, t, rng)) {
          out.emplace_back(s.owner, s.payload.elems);
        }
        return out;
      },
      py::arg("secret"), py::arg("n"), py::arg("t"), py::arg("seed") = 1,
      "Shares as (owner, payload) pairs; owners are 1-based.");
  m.def(
      "shamir_recover",
      [](const std::vector<std::pair<uint32_t, std::vector<uint64_t>>>& shares, int t) {
        std::vector<Share> in;
        for (const auto& [owner, payload] : shares) in.push_back({owner, FieldVec(payload)});
        return ShamirRecover(PrimeField(), in, t).elems;
      },
      py::arg("shares"), py::arg("t"));

  m.def("inclusion_bound", &InclusionBound, py::arg("horizon"), py::arg("rho"), py::arg("k"),
        py::arg("delta_max"));
  m.def("calibrate_sigma2", &CalibrateSigma2, py::arg("T"), py::arg("C"), py::arg("alpha"),
        py::arg("epsilon"));
  m.def(
      "dp_from_rdp",
      [](double epsilon, double delta, double T, double C) {
        DpCalibration d = DpFromRdp(epsilon, delta, T, C);
        py::dict out;
        out["alpha"] = d.alpha;
        out["sigma2"] = d.sigma2;
        out["epsilon_rdp"] = d.epsilon_rdp;
        return out;
      },
      py::arg("epsilon"), py::arg("delta"), py::arg("T"), py::arg("C"));

  m.def(
      "assign",
      [](uint64_t round, uint32_t n_c, uint32_t n_a, uint64_t seed) {
        RoundAssignment a = Assign(round, n_c, n_a, PublicSeed(seed));
        std::vector<std::vector<uint32_t>> out;
        for (uint32_t j = 0; j < n_a; ++j) {
          out.emplace_back(a.Cluster(j).begin(), a.Cluster(j).end());
        }
        return out;
      },
      py::arg("round"), py::arg("n_c"), py::arg("n_a"), py::arg("seed") = 1,
      "Clusters of round `round` as run with root seed `seed`.");
  m.def(
      "include",
      [](const std::vector<uint32_t>& counts, const std::vector<uint32_t>& candidates,
         uint32_t rho, uint64_t round, uint64_t seed) {
        const uint32_t n_c = static_cast<uint32_t>(counts.size());
        return Include(counts, candidates, rho, TieBreakValues(PublicSeed(seed), round, n_c));
      },
      py::arg("counts"), py::arg("candidates"), py::arg("rho"), py::arg("round") = 0,
      py::arg("seed") = 1);

  m.def("presets", &PresetNames);
  m.def(
      "config_text",
      [](std::optional<std::string> preset, std::optional<std::string> config,
         std::optional<uint64_t> seed) { return ConfigText(Resolve(preset, config, seed)); },
      py::arg("preset") = py::none(), py::arg("config") = py::none(),
      py::arg("seed") = py::none(), "The resolved configuration as INI text.");
  m.def(
      "run_json",
      [](std::optional<std::string> preset, std::optional<std::string> config,
         std::optional<uint64_t> seed, const std::string& out_dir) {
        RunConfig cfg = Resolve(preset, config, seed);
        py::gil_scoped_release release;
        return SummaryJson(RunExperiment(cfg, out_dir));
      },
      py::arg("preset") = py::none(), py::arg("config") = py::none(),
      py::arg("seed") = py::none(), py::arg("out_dir") = "",
      "Runs one experiment and returns its summary as JSON text.");
}
