#include <doctest.h>

#include <histovote/aggregate.hpp>
#include <histovote/errors.hpp>
#include <histovote/records.hpp>

using namespace histovote;

TEST_SUITE("records") {

TEST_CASE("image records round-trip through JSON") {
  ImageRecord rec;
  rec.image_id = "slides/b001.tif";
  rec.ok = true;
  rec.truth = ClassLabel::Benign;
  rec.selection.image_width = 2048;
  rec.selection.image_height = 1536;
  rec.selection.image_blue_metric = 0.0123456789;
  rec.selection.tier = Tier::KeepAll;
  rec.selection.candidates_total = 108;
  rec.selection.candidates_qualified = 2;
  rec.selection.fallback = false;
  const PatchSpec a{{149, 298, 299, 299}, 0.25, {2, 1}};
  const PatchSpec b{{0, 0, 299, 299}, 0.125, {0, 0}};
  rec.selection.selected = {a, b};
  rec.predictions.push_back({a, ClassProbabilities({0.1, 0.6, 0.2, 0.1}), ClassLabel::Benign});
  rec.predictions.push_back({b, ClassProbabilities({0.7, 0.1, 0.1, 0.1}), ClassLabel::Normal});
  const std::vector<ClassLabel> labels{ClassLabel::Benign, ClassLabel::Normal};
  rec.decision = majority_vote(labels);

  const nlohmann::json j = image_record_to_json(rec);
  CHECK(j.at("image") == "slides/b001.tif");
  CHECK(j.at("tier") == "keep_all");
  CHECK(j.at("decision") == "Benign");
  CHECK(j.at("tie_broken") == true);
  CHECK(j.at("patches").size() == 2);

  const ImageRecord back = image_record_from_json(nlohmann::json::parse(j.dump()));
  CHECK(back.image_id == rec.image_id);
  CHECK(back.ok);
  CHECK(back.truth == rec.truth);
  CHECK(back.selection.image_blue_metric == rec.selection.image_blue_metric);
  CHECK(back.selection.tier == Tier::KeepAll);
  CHECK(back.selection.selected == rec.selection.selected);
  REQUIRE(back.predictions.size() == 2);
  CHECK(back.predictions[0].probs == rec.predictions[0].probs);
  CHECK(back.decision == rec.decision);
  CHECK(image_record_to_json(back) == j);
}

TEST_CASE("failed records keep their error") {
  ImageRecord rec;
  rec.image_id = "missing.png";
  rec.error = "cannot open 'missing.png'";
  const nlohmann::json j = image_record_to_json(rec);
  CHECK(j.at("status") == "error");
  const ImageRecord back = image_record_from_json(j);
  CHECK_FALSE(back.ok);
  CHECK(back.error == rec.error);
  CHECK_FALSE(back.decision.has_value());
}

TEST_CASE("json lines") {
  const std::vector<nlohmann::json> docs{{{"a", 1}}, {{"b", "x"}}};
  const std::string text = to_json_lines(docs);
  CHECK(text == "{\"a\":1}\n{\"b\":\"x\"}\n");
  CHECK(parse_json_lines(text + "\n") == docs);
  CHECK_THROWS(parse_json_lines("{oops}\n"));
}

}
