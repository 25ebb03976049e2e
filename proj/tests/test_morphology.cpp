#include <doctest.h>

#include "csc/morphology.hpp"
#include "support.hpp"

using namespace csc;
using namespace csc::testing;

namespace {

const NominalizationTable& bundled_table() {
  static const auto t = NominalizationTable::from_file(data_dir() / "nominalizations.tsv");
  return t;
}

}  // namespace

TEST_CASE("attested adjective and noun-form pairs") {
  const auto& graph = *fixture_assets()->graph;
  for (const auto* g : {static_cast<const GraphBackend*>(nullptr), &graph}) {
    CHECK(nominalize("warm", bundled_table(), g) == "warmth");
    CHECK(nominalize("elegant", bundled_table(), g) == "elegance");
    CHECK(nominalize("beautiful", bundled_table(), g) == "beauty");
    CHECK(nominalize("tranquil", bundled_table(), g) == "tranquility");
  }
}

TEST_CASE("suffix rules without exceptions") {
  NominalizationTable bare;
  CHECK(nominalize("elegant", bare) == "elegance");
  CHECK(nominalize("silent", bare) == "silence");
  CHECK(nominalize("serious", bare) == "seriousness");
  CHECK(nominalize("agile", bare) == "agility");
  CHECK(nominalize("electric", bare) == "electricity");
  CHECK(nominalize("flexible", bare) == "flexibility");
  CHECK(nominalize("happy", bare) == "happiness");
  CHECK(nominalize("grey", bare) == "greyness");
  CHECK(nominalize("cold", bare) == "coldness");
}

TEST_CASE("exceptions override the suffix rules") {
  NominalizationTable t;
  t.exceptions["kinetic"] = "kineticism";
  CHECK(nominalize("kinetic", t) == "kineticism");
  CHECK(nominalize("kinetic", NominalizationTable{}) == "kineticity");
}

TEST_CASE("a derived noun in the graph is preferred over the suffix rules") {
  auto g = graph_of({edge(RelationKind::DerivedFrom, "coolth", Pos::noun, "cool", Pos::adjective, 1.0),
                     edge(RelationKind::DerivedFrom, "fabric", Pos::noun, "cool", Pos::adjective, 2.0)});
  NominalizationTable bare;
  CHECK(nominalize("cool", bare) == "coolness");
  CHECK(nominalize("cool", bare, &g) == "coolth");
}

TEST_CASE("nominalization table file format") {
  TempDir dir;
  write_file(dir / "n.tsv", "# comment\nwarm\twarmth\n\nBright\tBrightness  # trailing\n");
  auto t = NominalizationTable::from_file(dir / "n.tsv");
  CHECK(t.exceptions.size() == 2);
  CHECK(t.exceptions.at("bright") == "brightness");
  write_file(dir / "bad.tsv", "warm warmth\n");
  CHECK_THROWS_AS(NominalizationTable::from_file(dir / "bad.tsv"), Error);
}

TEST_CASE("stems under the documented rules") {
  CHECK(stem("elegant") == "eleg");
  CHECK(stem("elegance") == "eleg");
  CHECK(stem("warm") == "warm");
  CHECK(stem("warmth") == "warm");
  CHECK(stem("beautiful") == "beaut");
  CHECK(stem("beauty") == "beaut");
  CHECK(stem("tranquil") == "tranquil");
  CHECK(stem("tranquility") == "tranquil");
  CHECK(stem("flexible") == stem("flexibility"));
}

TEST_CASE("shares_stem") {
  CHECK(shares_stem("elegant", "elegance"));
  CHECK(shares_stem("warm", "warmth"));
  CHECK(shares_stem("beautiful", "beauty"));
  CHECK_FALSE(shares_stem("kinetic", "warm"));
  CHECK_FALSE(shares_stem("calm", "cold"));
  for (const char* w : {"kinetic", "warm", "cozy", "a"}) CHECK(shares_stem(w, w));
  CHECK(shares_stem("warmth", "warm") == shares_stem("warm", "warmth"));
}

TEST_CASE("is_adjective uses graph senses and the extra lexicon") {
  const auto& graph = *fixture_assets()->graph;
  CHECK(is_adjective("warm", graph));
  CHECK_FALSE(is_adjective("warmth", graph));
  CHECK_FALSE(is_adjective("car", graph));
  CHECK_FALSE(is_adjective("zebra", graph));
  TermSet extra{"zebra"};
  CHECK(is_adjective("zebra", graph, &extra));
}

TEST_CASE("nominalize is a pure function of its inputs") {
  const auto& graph = *fixture_assets()->graph;
  for (const auto& [adj, noun] : bundled_table().exceptions) {
    CAPTURE(adj);
    CHECK(nominalize(adj, bundled_table(), &graph) == noun);
    CHECK(nominalize(adj, bundled_table(), &graph) == nominalize(adj, bundled_table(), &graph));
  }
}
