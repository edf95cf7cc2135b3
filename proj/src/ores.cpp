#include "editgauge/ores.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "editgauge/errors.hpp"
#include "httplib.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace editgauge {

namespace {

class HttplibTransport : public HttpTransport {
 public:
  std::optional<Response> get(const std::string& url) override {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) return std::nullopt;
    const auto path_start = url.find('/', scheme_end + 3);
    const std::string origin =
        path_start == std::string::npos ? url : url.substr(0, path_start);
    const std::string path =
        path_start == std::string::npos ? "/" : url.substr(path_start);

    httplib::Client client(origin);
    client.set_connection_timeout(10);
    client.set_read_timeout(30);
    auto res = client.Get(path);
    if (!res) return std::nullopt;
    return Response{res->status, res->body};
  }
};

}  // namespace

std::unique_ptr<HttpTransport> make_default_transport() {
  return std::make_unique<HttplibTransport>();
}

QualityDistribution parse_ores_body(const std::string& body,
                                    const OresConfig& cfg,
                                    std::int64_t rev_id) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::exception& e) {
    throw DataError("ORES response for rev " + std::to_string(rev_id) +
                    " is not JSON: " + e.what());
  }

  // Either the full v3 envelope or a flat class->prob object.
  json probs;
  const json* node = &doc;
  if (node->contains(cfg.wiki)) node = &(*node)[cfg.wiki];
  if (node->contains("scores")) {
    node = &(*node)["scores"];
    const std::string key = std::to_string(rev_id);
    if (!node->contains(key))
      throw DataError("ORES response missing scores for rev " + key);
    node = &(*node)[key];
    if (!node->contains(cfg.model))
      throw DataError("ORES response missing model " + cfg.model);
    node = &(*node)[cfg.model];
    if (node->contains("error"))
      throw DataError("ORES error for rev " + std::to_string(rev_id) + ": " +
                      (*node)["error"].value("message", "unknown"));
    if (!node->contains("score") || !(*node)["score"].contains("probability"))
      throw DataError("ORES response missing score.probability");
    probs = (*node)["score"]["probability"];
  } else {
    probs = *node;
  }
  if (!probs.is_object())
    throw DataError("ORES probability is not an object for rev " +
                    std::to_string(rev_id));

  QualityDistribution q;
  q.class_names = cfg.class_names;
  q.probs.assign(q.class_names.size(), 0.0);
  std::size_t seen = 0;
  for (auto it = probs.begin(); it != probs.end(); ++it) {
    const auto pos = std::find(q.class_names.begin(), q.class_names.end(), it.key());
    if (pos == q.class_names.end())
      throw DataError("ORES response has unknown class '" + it.key() +
                      "' for rev " + std::to_string(rev_id));
    q.probs[static_cast<std::size_t>(pos - q.class_names.begin())] =
        it.value().get<double>();
    ++seen;
  }
  if (seen != q.class_names.size())
    throw DataError("ORES response covers " + std::to_string(seen) + " of " +
                    std::to_string(q.class_names.size()) + " classes for rev " +
                    std::to_string(rev_id));

  const double sum = q.sum();
  if (std::abs(sum - 1.0) > 1e-2)
    throw DataError("ORES probabilities sum to " + std::to_string(sum) +
                    " for rev " + std::to_string(rev_id));
  if (std::abs(sum - 1.0) > 1e-6) {
    for (double& p : q.probs) p /= sum;
    q.renormalized = true;
  }
  return q;
}

OresClient::OresClient(OresConfig cfg, std::unique_ptr<HttpTransport> transport)
    : cfg_(std::move(cfg)),
      transport_(transport ? std::move(transport) : make_default_transport()) {
  if (cfg_.cache_dir.empty())
    throw UsageError("ORES cache directory is required");
  fs::create_directories(cfg_.cache_dir);
}

std::string OresClient::cache_path(std::int64_t rev_id) const {
  return (fs::path(cfg_.cache_dir) /
          (cfg_.wiki + "_" + std::to_string(rev_id) + ".json"))
      .string();
}

std::string OresClient::score_url(std::int64_t rev_id) const {
  return cfg_.endpoint + "/v3/scores/" + cfg_.wiki + "/" +
         std::to_string(rev_id) + "/" + cfg_.model;
}

QualityDistribution OresClient::fetch_quality(std::int64_t rev_id) {
  const std::string path = cache_path(rev_id);
  {
    std::ifstream f(path, std::ios::binary);
    if (f) {
      std::stringstream body;
      body << f.rdbuf();
      return parse_ores_body(body.str(), cfg_, rev_id);
    }
  }

  std::string last_error;
  for (int attempt = 0; attempt < cfg_.max_retries; ++attempt) {
    auto res = transport_->get(score_url(rev_id));
    if (!res) {
      last_error = "connection failure";
      continue;
    }
    if (res->status != 200) {
      last_error = "HTTP " + std::to_string(res->status);
      if (res->status >= 400 && res->status < 500 && res->status != 429) break;
      continue;
    }
    const QualityDistribution q = parse_ores_body(res->body, cfg_, rev_id);
    // Parse before persisting so a bad body never poisons the cache.
    static std::atomic<unsigned> tmp_seq{0};
    const std::string tmp = path + ".tmp." + std::to_string(tmp_seq++);
    {
      std::ofstream out(tmp, std::ios::binary);
      out << res->body;
    }
    fs::rename(tmp, path);
    return q;
  }
  throw DataError("ORES fetch failed for rev " + std::to_string(rev_id) +
                  " after " + std::to_string(cfg_.max_retries) +
                  " attempts: " + last_error);
}

}  // namespace editgauge
