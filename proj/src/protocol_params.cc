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

#include "byzfed/protocol_params.h"

#include <cmath>
#include <string>

#include "byzfed/error.h"

namespace byzfed {
namespace {

void Require(bool ok, const std::string& rule) {
  if (!ok) throw Error(ErrorCode::kConfigError, "config violates " + rule);
}

std::string Vals(std::initializer_list<std::pair<const char*, double>> kv) {
  std::string s = " (";
  bool first = true;
  for (const auto& [k, v] : kv) {
    if (!first) s += ", ";
    first = false;
    s += k;
    s += "=";
    s += std::to_string(v);
  }
  return s + ")";
}

}  // namespace

uint32_t ProtocolParams::ping_quorum() const {
  const uint64_t lost = static_cast<uint64_t>(t_c) + static_cast<uint64_t>(t_a) * k();
  return lost >= n_c ? 0 : static_cast<uint32_t>(n_c - lost);
}

void ProtocolParams::Validate() const {
  Require(n_a >= 1 && n_c >= 1, "n_a >= 1 and n_c >= 1");
  Require(allow_weak_resilience || n_a >= 3 * t_a + 1,
          "n_a >= 3 t_a + 1" + Vals({{"n_a", n_a}, {"t_a", t_a}}));
  Require(t_a < n_a, "t_a < n_a");
  Require(n_c % n_a == 0, "n_a | n_c" + Vals({{"n_c", n_c}, {"n_a", n_a}}));
  Require(rho >= 1 && rho < k(), "1 <= rho < k" + Vals({{"rho", rho}, {"k", k()}}));
  Require(!fairness_assertions || k() > 2 * rho,
          "k > 2 rho" + Vals({{"k", k()}, {"rho", rho}}));
  Require(relax_rho_bound ||
              static_cast<double>(rho) > 1.0 + std::sqrt(1.0 + static_cast<double>(k())),
          "rho > 1 + sqrt(1 + k)" + Vals({{"rho", rho}, {"k", k()}}));
  Require(t_c <= n_c, "t_c <= n_c");
  Require(ping_quorum() >= rho, "n_c - t_c - t_a k >= rho" +
                                    Vals({{"n_c", n_c}, {"t_c", t_c}, {"t_a", t_a}}));
  Require(mask_dim >= 1 && mask_dim <= dim, "1 <= N_s <= N_g");
  Require(horizon >= 1, "horizon >= 1");
  Require(clip > 0 && clip < max_magnitude, "0 < C < max_magnitude");
  Require(sigma2 >= 0, "sigma2 >= 0");
  Require(max_summands >= rho, "codec max_summands >= rho");
  Require(step.gamma0 > 0, "step size > 0");
  try {
    FixedPointCodec(PrimeField(field_modulus), scale_bits, max_magnitude, max_summands);
    FixedPointCodec(PrimeField(field_modulus), model_scale_bits, max_magnitude, 1);
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfigError, std::string("config violates codec headroom: ") + e.what());
  }
}

NodeKeys DeriveNodeKeys(const Seed& root, Role role, uint32_t id) {
  NodeKeys k;
  k.sign = SigningKeyFromSeed(DeriveSeed(root, "byzfed/sign-key", {uint64_t(role), id}));
  k.box = BoxKeyFromSeed(DeriveSeed(root, "byzfed/box-key", {uint64_t(role), id}));
  return k;
}

std::shared_ptr<ProtocolContext> MakeContext(const ProtocolParams& params,
                                             std::shared_ptr<const TaskSet> tasks,
                                             const Seed& key_root) {
  params.Validate();
  PrimeField f(params.field_modulus);
  auto ctx = std::make_shared<ProtocolContext>(ProtocolContext{
      params, f,
      FixedPointCodec(f, params.scale_bits, params.max_magnitude, params.max_summands),
      FixedPointCodec(f, params.model_scale_bits, params.max_magnitude, 1),
      PublicMatrix::Expand(params.public_seed, params.dim, params.mask_dim, f),
      SharedCommitmentKey(params.field_modulus, params.group_bits, params.dim),
      Pki{}, std::move(tasks), nullptr});
  for (uint32_t j = 0; j < params.n_a; ++j) {
    NodeKeys k = DeriveNodeKeys(key_root, Role::kAggregator, j);
    ctx->pki.agg_sign.push_back(k.sign.pk);
    ctx->pki.agg_box.push_back(k.box.pk);
  }
  for (uint32_t c = 0; c < params.n_c; ++c) {
    NodeKeys k = DeriveNodeKeys(key_root, Role::kClient, c);
    ctx->pki.client_sign.push_back(k.sign.pk);
    ctx->pki.client_box.push_back(k.box.pk);
  }
  return ctx;
}

}  // namespace byzfed
