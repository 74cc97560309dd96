#include <cstdio>
#include <fstream>
#include <string>

#include <gtest/gtest.h>

#include "qbjm/io.hpp"
#include "test_util.hpp"

using namespace qbjm;

namespace {

const std::string kData = QBJM_DATA_DIR;

std::string write_temp(const std::string& name, const std::string& text) {
  const std::string path = ::testing::TempDir() + name;
  std::ofstream(path) << text;
  return path;
}

}  // namespace

TEST(Load, ShippedAssemblages) {
  const auto p = load_assemblage(kData + "/pauli_pair.json");
  EXPECT_EQ(p.n_x(), 2u);
  for (std::size_t i = 0; i < p.effects().size(); ++i) EXPECT_EQ(p.effects()[i], pauli_pair().effects()[i]);
  const auto t = load_assemblage(kData + "/trine.json");
  for (std::size_t i = 0; i < t.effects().size(); ++i) EXPECT_EQ(t.effects()[i], trine().effects()[i]);
}

TEST(Load, ShippedState) {
  const auto g = load_state(kData + "/ghz_y.json");
  EXPECT_EQ(g.dims(), (std::vector<std::size_t>{2, 2, 2}));
  EXPECT_EQ(g.matrix(), ghz_y().matrix());
}

TEST(Load, ShippedCatalogBoundsRecomputed) {
  for (const char* name : {"/chsh.json", "/mermin.json", "/i3322.json"}) {
    const auto cat = load_catalog(kData + name);
    ASSERT_EQ(cat.size(), 1u);
    const auto& e = cat.front();
    ASSERT_TRUE(e.advisory_bound.has_value());
    // Independent recomputation against the vertex maximum.
    EXPECT_EQ(vertex_maximum(e.inequality.scenario, e.inequality.coefficients), e.inequality.local_bound);
    EXPECT_EQ(*e.advisory_bound, e.inequality.local_bound) << name;
  }
  const auto i = load_catalog(kData + "/i3322.json").front().inequality;
  EXPECT_EQ(i.coefficients, i3322().coefficients);
}

TEST(Load, CatalogArrayAndWrongAdvisoryBound) {
  json a = json::array({to_json(chsh()), to_json(mermin())});
  a[0]["local_bound"] = 5.0;
  const auto cat = load_catalog(write_temp("cat.json", a.dump()));
  ASSERT_EQ(cat.size(), 2u);
  EXPECT_EQ(cat[0].inequality.local_bound, 2.0);
  EXPECT_EQ(*cat[0].advisory_bound, 5.0);
}

TEST(Load, TripartiteIngestFormat) {
  // A single tripartite full-correlator term, written by hand.
  const char* text = R"({"scenario":{"N":3,"n_x":2,"n_a":2},"name":"t",
    "coefficients":[{"x":[0,0,0],"a":[0,0,0],"c":1},{"x":[0,0,0],"a":[1,1,1],"c":-1}]})";
  const auto cat = load_catalog(write_temp("tri.json", text));
  EXPECT_EQ(cat[0].inequality.local_bound, 1.0);
  EXPECT_FALSE(cat[0].advisory_bound.has_value());
}

TEST(Load, EffectsSummingAboveIdentity) {
  try {
    load_assemblage(std::string(QBJM_DATA_DIR) + "/../tests/data/bad_povm.json");
    FAIL() << "expected an invariant violation";
  } catch (const InvariantViolation& e) {
    EXPECT_EQ(e.invariant(), "effects-sum-to-identity");
  }
}

TEST(Load, ParseErrors) {
  EXPECT_THROW(load_assemblage("/nonexistent/file.json"), ParseError);
  EXPECT_THROW(load_assemblage(write_temp("garbage.json", "{not json")), ParseError);
  EXPECT_THROW(load_assemblage(write_temp("missing.json", R"({"dim":2})")), ParseError);
  EXPECT_THROW(load_state(write_temp("ragged.json", R"({"dims":[2],"matrix":[[[1,0],[0,0]],[[0,0]]]})")),
               ParseError);
  EXPECT_THROW(load_catalog(write_temp("range.json",
                                       R"({"scenario":{"N":2,"n_x":2,"n_a":2},"coefficients":[{"x":[0,2],"a":[0,0],"c":1}]})")),
               ParseError);
}

TEST(Load, StateInvariantNamed) {
  try {
    load_state(write_temp("trace.json", R"({"dims":[2],"matrix":[[[1,0],[0,0]],[[0,0],[1,0]]]})"));
    FAIL();
  } catch (const InvariantViolation& e) {
    EXPECT_EQ(e.invariant(), "state-unit-trace");
  }
}

TEST(RoundTrip, AllDomainValues) {
  auto g = test::rng(101);
  const auto rho = random_density_matrix({2, 2}, g);
  EXPECT_EQ(state_from_json(json::parse(to_json(rho).dump())).matrix(), rho.matrix());
  const auto m = depolarize(trine(), 0.8);
  const auto m2 = assemblage_from_json(json::parse(dump17(to_json(m))));
  for (std::size_t i = 0; i < m.effects().size(); ++i) EXPECT_EQ(m2.effects()[i], m.effects()[i]);

  const auto cert = *jm_feasible(depolarize(pauli_pair(), 0.6));
  const auto c2 = certificate_from_json(json::parse(dump17(to_json(cert))));
  EXPECT_EQ(c2.n_x, 2u);
  EXPECT_EQ(c2.n_a, 2u);
  EXPECT_TRUE(verify_parent(depolarize(pauli_pair(), 0.6), c2));

  const auto b = behavior_from_state(rho, pauli_pair());
  const auto b2 = behavior_from_json(json::parse(dump17(to_json(b))));
  EXPECT_TRUE(std::equal(b.table().begin(), b.table().end(), b2.table().begin()));

  const auto phi = depolarizing_map(0.25);
  EXPECT_EQ(qubit_map_from_json(to_json(phi)).action(), phi.action());
  EXPECT_THROW(qubit_map_from_json(json{{"basis", "pauli"}, {"action", to_json(phi.action())}}), ParseError);
}

TEST(Dump17, SeventeenSignificantDigits) {
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(format_double(1.0), "1");
  EXPECT_EQ(dump17(json{{"a", 1.0 / 3.0}, {"n", 3}}), R"({"a":0.33333333333333331,"n":3})");
  EXPECT_EQ(std::stod(format_double(2.0 / 3.0)), 2.0 / 3.0);
}

TEST(Digest, Fnv1aReferenceValues) {
  // Published FNV-1a 64-bit test vectors.
  EXPECT_EQ(digest_hex(""), "cbf29ce484222325");
  EXPECT_EQ(digest_hex("a"), "af63dc4c8601ec8c");
  EXPECT_EQ(digest_hex("foobar"), "85944171f73967e8");
}
