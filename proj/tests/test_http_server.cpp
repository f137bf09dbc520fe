#include <gtest/gtest.h>

#include <httplib.h>
#include <json.hpp>

#include "ompmentor/service_api.hpp"
#include "support.hpp"

using namespace ompmentor::service;
using json = nlohmann::json;

namespace {

class HttpTest : public ::testing::Test {
 protected:
  void SetUp() override {
    ServiceConfig cfg;
    cfg.port = 0;
    cfg.fixed_seed = 7;
    cfg.cors_origin = "http://ui.example";
    service_ = std::make_unique<Service>(cfg);
    server_ = std::make_unique<HttpServer>(*service_);
    port_ = server_->start();
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
  }
  void TearDown() override { server_->stop(); }

  httplib::Result post(const std::string& path, const std::string& body) {
    return client_->Post(path, body, "application/json");
  }

  std::unique_ptr<Service> service_;
  std::unique_ptr<HttpServer> server_;
  std::unique_ptr<httplib::Client> client_;
  int port_ = 0;
};

}  // namespace

TEST_F(HttpTest, ConversationRoundTrip) {
  auto created = post("/v1/conversations", R"({"language":"EN"})");
  ASSERT_TRUE(created);
  EXPECT_EQ(created->status, 201);
  EXPECT_EQ(created->get_header_value("Content-Type"), "application/json");
  auto id = json::parse(created->body)["conversation_id"].get<std::string>();
  auto reply = post("/v1/conversations/" + id + "/messages",
                    R"({"text":"Can I change a variable inside a pragma omp loop?"})");
  ASSERT_TRUE(reply);
  EXPECT_EQ(reply->status, 200);
  auto j = json::parse(reply->body);
  EXPECT_EQ(j["kind"], "answer");
  EXPECT_EQ(j["node_id"], "redefine-num-threads");
}

TEST_F(HttpTest, SpanishWelcome) {
  auto created = post("/v1/conversations", R"({"language":"ES"})");
  ASSERT_TRUE(created);
  auto direct = service_->create_conversation(R"({"language":"ES"})");
  EXPECT_EQ(json::parse(created->body)["welcome"], json::parse(direct.body)["welcome"]);
}

TEST_F(HttpTest, ReadEndpoints) {
  auto health = client_->Get("/v1/health");
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 200);
  EXPECT_EQ(json::parse(health->body)["entry_count"], 15);
  auto kb = client_->Get("/v1/kb?lang=ES");
  ASSERT_TRUE(kb);
  EXPECT_EQ(json::parse(kb->body)["entries"].size(), 15u);
  auto bad = client_->Get("/v1/kb?lang=ZZ");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);
  auto unmatched = client_->Get("/v1/unmatched?limit=5");
  ASSERT_TRUE(unmatched);
  EXPECT_EQ(unmatched->status, 200);
}

TEST_F(HttpTest, AdviseAndLimits) {
  auto code = ompm_test::read_file(ompm_test::source_dir() / "corpus/advisor/mistakes/missing_omp.c");
  auto r = post("/v1/advise", json{{"code", code}}.dump());
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  EXPECT_EQ(r->body, service_->advise(json{{"code", code}}.dump()).body);
  auto big = post("/v1/advise", json{{"code", std::string(1 << 20, 'x')}}.dump());
  ASSERT_TRUE(big);
  EXPECT_EQ(big->status, 400);
  EXPECT_EQ(json::parse(big->body)["error"]["code"], "payload_too_large");
}

TEST_F(HttpTest, ErrorsAlwaysHaveJsonBodies) {
  auto missing = client_->Get("/v1/nothing-here");
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 404);
  EXPECT_EQ(json::parse(missing->body)["error"]["code"], "not_found");
  auto unknown = post("/v1/conversations/nope/messages", R"({"text":"x"})");
  ASSERT_TRUE(unknown);
  EXPECT_EQ(unknown->status, 404);
  EXPECT_TRUE(json::parse(unknown->body).contains("error"));
  auto malformed = post("/v1/conversations", "{");
  ASSERT_TRUE(malformed);
  EXPECT_EQ(malformed->status, 400);
  EXPECT_FALSE(malformed->body.empty());
}

TEST_F(HttpTest, CorsHeaders) {
  auto pre = client_->Options("/v1/advise");
  ASSERT_TRUE(pre);
  EXPECT_EQ(pre->status, 204);
  EXPECT_EQ(pre->get_header_value("Access-Control-Allow-Origin"), "http://ui.example");
  auto get = client_->Get("/v1/health");
  ASSERT_TRUE(get);
  EXPECT_EQ(get->get_header_value("Access-Control-Allow-Origin"), "http://ui.example");
}

TEST_F(HttpTest, Reload) {
  auto r = post("/v1/reload", "");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
}
