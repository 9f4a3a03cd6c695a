#include <doctest.h>

#include <filesystem>
#include <future>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "reid/error.hpp"
#include "reid/http_server.hpp"
#include "reid/search_service.hpp"
#include "reid/synthetic.hpp"
#include "test_util.hpp"

using namespace reid;
using testutil::code_of;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Ten people, two per texture class, two views each.
struct Gallery {
  testutil::TempDir dir;
  std::string images = dir / "images";
  std::string masks = dir / "masks";
  std::vector<synth::PersonAppearance> people;
  std::unique_ptr<SearchService> service;

  Gallery() {
    fs::create_directories(images);
    fs::create_directories(masks);
    std::mt19937_64 rng(123);
    for (int p = 0; p < 10; ++p) {
      auto a = synth::random_appearance(rng);
      a.texture.kind = static_cast<TextureClass>(p % kNumTextureClasses);
      a.texture.period = 8;
      people.push_back(a);
      for (int v = 0; v < 2; ++v) {
        const auto crop = synth::render_person(a, rng);
        const std::string name = "p" + std::to_string(p) + "_" + std::to_string(v) + ".png";
        write_file(images + "/" + name, encode_png(crop.image));
        write_file(masks + "/" + name, encode_label_png(crop.labels));
      }
    }
    auto store = build_index(images, masks, resolve_preset("default"), LabelMapping::lip_default(),
                             EncoderModel::fallback())
                     .store;
    service = std::make_unique<SearchService>(std::move(store), LabelMapping::lip_default(), EncoderModel::fallback());
  }

  std::vector<std::uint8_t> image(const std::string& id) const { return read_file(images + "/" + id + ".png"); }
  std::vector<std::uint8_t> mask(const std::string& id) const { return read_file(masks + "/" + id + ".png"); }
};

const Gallery& gallery() {
  static const Gallery g;
  return g;
}


double class_weight_sum(const PersonFeatureVector& v, const ClassWeights& cw) {
  double s = 0.0;
  for (auto c : v.present_regions()) s += cw[c];
  return s;
}

}  // namespace

TEST_CASE("image search") {
  const auto& g = gallery();
  const auto& svc = *g.service;
  REQUIRE(svc.store().size() == 20);

  SUBCASE("every stored image finds itself first") {
    for (std::size_t i = 0; i < svc.store().size(); ++i) {
      const auto& id = svc.store().records()[i].image_id;
      const auto resp = svc.search_by_image(g.image(id), g.mask(id), 1);
      REQUIRE(resp.hits.size() == 1);
      CHECK(resp.hits[0].result.image_id == id);
      const double expected = class_weight_sum(svc.store().records()[i], svc.store().config().classes);
      CHECK(std::abs(resp.hits[0].result.score - expected) <= 1e-9);
      CHECK(resp.max_score == expected);
    }
  }
  SUBCASE("ranking matches direct scoring") {
    const auto& q = svc.store().records()[3];
    const auto resp = svc.search_by_features(q, 20);
    const auto direct = rank_gallery(q, svc.store().records(), svc.store().config().scoring(), 20);
    REQUIRE(resp.hits.size() == direct.size());
    for (std::size_t i = 0; i < direct.size(); ++i) {
      CHECK(resp.hits[i].rank == i + 1);
      CHECK(resp.hits[i].result.image_id == direct[i].image_id);
      CHECK(resp.hits[i].result.score == direct[i].score);
      CHECK(resp.hits[i].result.score <= resp.hits[i].max_score + 1e-9);
    }
  }
  SUBCASE("scoring-only presets are accepted") {
    const auto& id = svc.store().records()[0].image_id;
    const auto resp = svc.search_by_image(g.image(id), g.mask(id), 3, std::string("table3_1_row6"));
    CHECK(resp.preset == "table3_1_row6");
    CHECK(resp.hits[0].result.image_id == id);
    CHECK(code_of([&] { svc.search_by_image(g.image(id), g.mask(id), 3, std::string("table3_1_row1")); }) ==
          ErrorCode::FingerprintMismatch);
    CHECK(code_of([&] { svc.search_by_image(g.image(id), g.mask(id), 0); }) == ErrorCode::InvalidArgument);
  }
  SUBCASE("bad query inputs") {
    const auto& id = svc.store().records()[0].image_id;
    CHECK(code_of([&] { svc.search_by_image(testutil::bytes_of("junk"), g.mask(id), 3); }) == ErrorCode::DecodeError);
    CHECK(code_of([&] { svc.search_by_image(g.image(id), testutil::bytes_of("x"), 3); }) == ErrorCode::DecodeError);
    CHECK(code_of([&] { svc.search_by_image(g.image(id), g.mask(id), 3, std::string("nope")); }) ==
          ErrorCode::UnknownPreset);
  }
}

TEST_CASE("description search") {
  const auto& g = gallery();
  const auto& svc = *g.service;
  SUBCASE("texture query puts a matching shirt first") {
    for (int k = 1; k < kNumTextureClasses; ++k) {
      const auto kind = static_cast<TextureClass>(k);
      CAPTURE(texture_class_name(kind));
      DescriptionQuery dq{{RegionTerm{ParserClass::UpperClothes, std::nullopt, kind}}};
      const auto resp = svc.search_by_description(dq, 2);
      CHECK(resp.max_score == 8.0);
      for (const auto& hit : resp.hits) {
        const int person = std::stoi(hit.result.image_id.substr(1));
        CHECK(g.people[static_cast<std::size_t>(person)].texture.kind == kind);
      }
    }
  }
  SUBCASE("color and texture") {
    DescriptionQuery dq{{RegionTerm{ParserClass::UpperClothes, std::string("red"), TextureClass::Checkered},
                         RegionTerm{ParserClass::Pants, std::string("black"), std::nullopt}}};
    const auto resp = svc.search_by_description(dq, 20);
    CHECK(resp.query_kind == "description");
    CHECK(resp.max_score == 14.0);
    REQUIRE(resp.hits.size() == 20);
    for (const auto& h : resp.hits) {
      CHECK(h.result.score <= 14.0 + 1e-9);
      CHECK(h.max_score == 14.0);
    }
  }
  SUBCASE("errors") {
    CHECK(code_of([&] { svc.search_by_description(DescriptionQuery{}, 5); }) == ErrorCode::EmptyDescription);
    CHECK(code_of([&] {
            svc.search_by_description(
                DescriptionQuery{{RegionTerm{ParserClass::Pants, std::nullopt, TextureClass::Dots}}}, 5);
          }) == ErrorCode::InvalidDescription);
    CHECK(code_of([&] {
            svc.search_by_description(DescriptionQuery{{RegionTerm{ParserClass::Pants, std::string("plaid"), {}}}}, 5);
          }) == ErrorCode::UnknownColorName);
    CHECK(code_of([&] {
            svc.search_by_description(DescriptionQuery{{RegionTerm{ParserClass::Pants, std::string("red"), {}}}}, 5,
                                      std::string("nope"));
          }) == ErrorCode::UnknownPreset);
  }
}

TEST_CASE("description json") {
  const auto doc = json::parse(R"({
    "regions": [{"region": "upper_clothes", "color": "red", "texture": "checkered"},
                {"region": "pants", "color": {"L": 20, "a": 0, "b": -5}}],
    "channel_weights": {"L": 0.2, "a": 0.1, "b": 0.1, "d": 0.3, "t": 0.3}})");
  const auto dq = description_from_json(doc);
  REQUIRE(dq.regions.size() == 2);
  CHECK(std::get<std::string>(*dq.regions[0].color) == "red");
  CHECK(dq.regions[0].texture == TextureClass::Checkered);
  CHECK(std::get<Lab>(*dq.regions[1].color) == Lab{20, 0, -5});
  CHECK(dq.channel_weights == ChannelWeights{});
  CHECK(description_from_json(description_to_json(dq)).regions.size() == 2);
  CHECK(description_to_json(description_from_json(description_to_json(dq))) == description_to_json(dq));

  for (const char* bad : {R"([])", R"({"regions": 3})", R"({"regions": [{"color": "red"}]})",
                          R"({"regions": [{"region": "cape", "color": "red"}]})",
                          R"({"regions": [{"region": "pants", "texture": "paisley"}]})",
                          R"({"regions": [{"region": "pants", "colour": "red"}]})",
                          R"({"regions": [{"region": "pants", "color": {"L": 1}}]})",
                          R"({"regions": [], "channel_weights": {"L": "x"}})"}) {
    CAPTURE(bad);
    CHECK(code_of([&] { description_from_json(json::parse(bad)); }) == ErrorCode::InvalidDescription);
  }
}

TEST_CASE("status mapping") {
  CHECK(http_status_for(ErrorCode::InvalidDescription) == 422);
  CHECK(http_status_for(ErrorCode::EmptyDescription) == 422);
  CHECK(http_status_for(ErrorCode::UnknownColorName) == 422);
  CHECK(http_status_for(ErrorCode::UnknownItem) == 404);
  CHECK(http_status_for(ErrorCode::FingerprintMismatch) == 409);
  CHECK(http_status_for(ErrorCode::InvalidArgument) == 400);
  CHECK(http_status_for(ErrorCode::IoError) == 500);
}

TEST_CASE("http api") {
  const auto& g = gallery();
  HttpServer server(*g.service);
  const int port = server.bind("127.0.0.1", 0);
  REQUIRE(port > 0);
  std::thread runner([&] { server.run(); });
  server.wait_until_ready();
  httplib::Client client("127.0.0.1", port);
  client.set_read_timeout(30, 0);

  SUBCASE("health") {
    const auto res = client.Get("/health");
    REQUIRE(res);
    CHECK(res->status == 200);
    const auto body = json::parse(res->body);
    CHECK(body["status"] == "ok");
    CHECK(body["record_count"] == 20);
    CHECK(body["fingerprint"] == g.service->store().fingerprint());
  }
  SUBCASE("presets") {
    const auto body = json::parse(client.Get("/presets")->body);
    CHECK(body["default"] == "table3_2_row11");
    CHECK(body["presets"].size() == builtin_presets().size());
    for (const auto& p : body["presets"])
      if (p["name"] == "table3_1_row1") CHECK(p["image_search_compatible"] == false);
      else if (p["name"] == "table3_1_row6") CHECK(p["image_search_compatible"] == true);
  }
  SUBCASE("description search") {
    const auto res = client.Post("/search/description",
                                 R"({"regions": [{"region": "upper_clothes", "color": "red", "texture": "checkered"},
                                                 {"region": "pants", "color": "black"}], "top_k": 5})",
                                 "application/json");
    REQUIRE(res);
    CHECK(res->status == 200);
    const auto body = json::parse(res->body);
    CHECK(body["query_kind"] == "description");
    CHECK(body["max_score"] == 14.0);
    REQUIRE(body["results"].size() == 5);
    CHECK(body["results"][0]["rank"] == 1);
    CHECK(body["results"][0]["score"].get<double>() <= 14.0 + 1e-9);
    double sum = 0.0;
    for (const auto& r : body["results"][0]["regions"]) sum += r["contribution"].get<double>();
    CHECK(std::abs(sum - body["results"][0]["score"].get<double>()) <= 1e-9);
  }
  SUBCASE("client errors") {
    auto res = client.Post("/search/description", R"({"regions": [{"region": "pants", "texture": "checkered"}]})",
                           "application/json");
    REQUIRE(res);
    CHECK(res->status == 422);
    CHECK(json::parse(res->body)["error"]["code"] == "InvalidDescription");

    res = client.Post("/search/description", R"({"regions": []})", "application/json");
    CHECK(res->status == 422);
    CHECK(json::parse(res->body)["error"]["code"] == "EmptyDescription");

    res = client.Post("/search/description", R"({"regions": [{"region": "pants", "color": "plaid"}]})",
                      "application/json");
    CHECK(res->status == 422);
    CHECK(json::parse(res->body)["error"]["code"] == "UnknownColorName");

    res = client.Post("/search/description", "{not json", "application/json");
    CHECK(res->status == 400);

    res = client.Post("/search/description", R"({"regions": [{"region": "pants", "color": "red"}], "top_k": 0})",
                      "application/json");
    CHECK(res->status == 400);

    res = client.Post("/search/description", R"({"regions": [{"region": "pants", "color": "red"}], "preset": "/etc/passwd"})",
                      "application/json");
    CHECK(res->status == 404);
    CHECK(json::parse(res->body)["error"]["code"] == "UnknownPreset");

    res = client.Get("/nowhere");
    CHECK(res->status == 404);
    CHECK(json::parse(res->body)["error"]["code"] == "NotFound");
  }
  SUBCASE("items") {
    const auto& id = g.service->store().records()[0].image_id;
    auto res = client.Get("/items/" + id);
    REQUIRE(res);
    CHECK(res->status == 200);
    const auto body = json::parse(res->body);
    CHECK(body["image_id"] == id);
    CHECK(body["thumbnail"]["format"] == "jpeg");
    CHECK_FALSE(body["thumbnail"]["data"].get<std::string>().empty());
    CHECK(body["regions"][0]["histogram_bits"]["L"].get<std::string>().size() == 16);

    res = client.Get("/items/unknown");
    CHECK(res->status == 404);
    CHECK(json::parse(res->body)["error"]["code"] == "UnknownItem");
  }
  SUBCASE("image search") {
    const auto& id = g.service->store().records()[4].image_id;
    const auto img = g.image(id), msk = g.mask(id);
    httplib::MultipartFormDataItems form = {
        {"image", std::string(img.begin(), img.end()), "q.png", "image/png"},
        {"mask", std::string(msk.begin(), msk.end()), "m.png", "image/png"},
        {"top_k", "3", "", ""},
    };
    auto res = client.Post("/search/image", form);
    REQUIRE(res);
    CHECK(res->status == 200);
    const auto body = json::parse(res->body);
    CHECK(body["query_kind"] == "image");
    REQUIRE(body["results"].size() == 3);
    CHECK(body["results"][0]["image_id"] == id);

    httplib::MultipartFormDataItems no_mask = {{"image", std::string(img.begin(), img.end()), "q.png", "image/png"}};
    res = client.Post("/search/image", no_mask);
    CHECK(res->status == 400);
    CHECK(json::parse(res->body)["error"]["code"] == "MissingMask");

    httplib::MultipartFormDataItems incompatible = form;
    incompatible.push_back({"preset", "table3_1_row3", "", ""});
    res = client.Post("/search/image", incompatible);
    CHECK(res->status == 409);
  }
  SUBCASE("concurrent requests agree") {
    const std::string body = R"({"regions": [{"region": "upper_clothes", "color": "blue"}], "top_k": 20})";
    const auto reference = client.Post("/search/description", body, "application/json")->body;
    std::vector<std::future<std::string>> futures;
    for (int i = 0; i < 8; ++i)
      futures.push_back(std::async(std::launch::async, [&] {
        httplib::Client c("127.0.0.1", port);
        c.set_read_timeout(30, 0);
        const auto r = c.Post("/search/description", body, "application/json");
        return r ? r->body : std::string();
      }));
    for (auto& f : futures) CHECK(f.get() == reference);
  }

  server.stop();
  runner.join();
}

TEST_CASE("bind errors") {
  const auto& g = gallery();
  HttpServer a(*g.service);
  const int port = a.bind("127.0.0.1", 0);
  HttpServer b(*g.service);
  CHECK(code_of([&] { b.bind("127.0.0.1", port); }) == ErrorCode::BindError);
}
