// Copyright 2026 The Telequery Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>

#include "json.hpp"
#include "oracles.hpp"
#include "telequery/embedding.hpp"
#include "telequery/stub_backend.hpp"

namespace telequery {
namespace {

TEST(StubEmbeddingTest, FrozenVectors) {
  const std::vector<double> ue{0.33125589764687075, 0.1633533699845403,  -0.38029246734177147, -0.3112091143582236,
                               0.0809571539555976,  0.5199420855989764,  0.5243359280422383,   -0.2651221126628605};
  const auto got = stub_embedding("ue", 8, 0);
  ASSERT_EQ(got.size(), 8u);
  for (std::size_t i = 0; i < 8; ++i) EXPECT_NEAR(got[i], ue[i], 1e-15);

  const auto h = stub_embedding("handover", 12, 7);
  ASSERT_EQ(h.size(), 12u);
  EXPECT_NEAR(h[0], 0.3276821663170886, 1e-15);
  EXPECT_NEAR(h[8], -0.23394744263989203, 1e-15);
  EXPECT_NEAR(h[11], -0.16678111019074524, 1e-15);
}

TEST(StubEmbeddingTest, UnitNormAndDeterministic) {
  for (std::size_t dim : {1u, 8u, 64u, 100u}) {
    const auto v = stub_embedding("PDCP", dim, 1);
    EXPECT_EQ(v.size(), dim);
    EXPECT_NEAR(l2_norm(v), 1.0, 1e-12);
    EXPECT_EQ(v, stub_embedding("PDCP", dim, 1));
    if (dim > 1) {
      EXPECT_NE(v, stub_embedding("PDCP", dim, 2));
    }
  }
  EXPECT_EQ(stub_model_id(64, 0), "stub-64-0");
}

TEST(StubEmbeddingTest, DistinctTextsNearlyOrthogonal) {
  oracle::Random rng(1);
  double total = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto a = stub_embedding("a" + std::to_string(i), 64, 0);
    const auto b = stub_embedding("b" + std::to_string(i), 64, 0);
    total += std::abs(dot(a, b));
  }
  EXPECT_LT(total / 1000.0, 0.3);
}

TEST(StubBackendTest, EmbedEndpoint) {
  StubBackend backend;
  const auto reply = backend.post("/embed", R"({"mode":"sequence","texts":["ue"]})");
  ASSERT_EQ(reply.status, 200);
  const auto j = nlohmann::json::parse(reply.body);
  EXPECT_EQ(j.at("model_id"), "stub-64-0");
  EXPECT_EQ(j.at("dim"), 64);
  ASSERT_EQ(j.at("vectors").size(), 1u);
  EXPECT_EQ(j.at("vectors")[0].size(), 64u);
  EXPECT_EQ(backend.post("/embed", R"({"mode":"sequence","texts":["ue"]})").body, reply.body);

  const auto tokens = nlohmann::json::parse(backend.post("/embed", R"({"mode":"token","texts":["a b c d e"]})").body);
  EXPECT_EQ(tokens.at("vectors")[0].size(), 5u);
}

TEST(StubBackendTest, EmbedErrors) {
  StubBackend backend;
  EXPECT_EQ(backend.post("/embed", "not json").status, 400);
  EXPECT_EQ(backend.post("/embed", R"({"mode":"sequence"})").status, 400);
  EXPECT_EQ(backend.post("/embed", R"({"mode":"sequence","texts":[]})").status, 422);
  EXPECT_EQ(backend.post("/embed", R"({"mode":"sequence","texts":[""]})").status, 422);
  EXPECT_EQ(backend.post("/embed", R"({"mode":"token","texts":["--"]})").status, 422);
  EXPECT_EQ(backend.post("/nope", "{}").status, 404);
}

TEST(StubBackendTest, ScriptedGeneration) {
  StubBackend backend(8, 0, [](const std::string& p) -> std::optional<std::string> {
    if (p == "known") return "option 1";
    return std::nullopt;
  });
  const auto ok = backend.post("/generate", R"({"max_new_tokens":10,"prompt":"known","temperature":0})");
  EXPECT_EQ(ok.status, 200);
  EXPECT_EQ(nlohmann::json::parse(ok.body).at("text"), "option 1");
  EXPECT_EQ(backend.post("/generate", R"({"max_new_tokens":10,"prompt":"other","temperature":0})").status, 404);
  EXPECT_EQ(backend.post("/generate", R"({"prompt":1})").status, 400);
}

}  // namespace
}  // namespace telequery
