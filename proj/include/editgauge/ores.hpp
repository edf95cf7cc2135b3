#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "editgauge/revision.hpp"

namespace editgauge {

// Transport abstraction so tests can inject failures and prove the warm
// cache never touches the network.
class HttpTransport {
 public:
  struct Response {
    int status = 0;
    std::string body;
  };
  virtual ~HttpTransport() = default;
  // Empty optional means a connection-level failure (retryable).
  virtual std::optional<Response> get(const std::string& url) = 0;
};

std::unique_ptr<HttpTransport> make_default_transport();

struct OresConfig {
  std::string endpoint;  // e.g. "https://ores.wikimedia.org"
  std::string wiki = "enwiki";
  std::string model = "articlequality";
  std::string cache_dir;  // required; the reproducibility boundary
  std::vector<std::string> class_names = default_quality_classes();
  int max_retries = 3;
};

// Environment override for the endpoint, checked by the CLI.
constexpr const char* kOresEndpointEnv = "EDITGAUGE_ORES_ENDPOINT";

// Parses an ORES v3 response body (or a flat {"class": prob} object) into a
// distribution in cfg class order. Throws DataError on unknown class names
// or |sum-1| > 1e-2; distributions off by at most 1e-2 are renormalized and
// flagged.
QualityDistribution parse_ores_body(const std::string& body,
                                    const OresConfig& cfg,
                                    std::int64_t rev_id);

class OresClient {
 public:
  OresClient(OresConfig cfg, std::unique_ptr<HttpTransport> transport = nullptr);

  // Cache-first fetch; a miss performs a GET with bounded retries and
  // persists the raw body (write-temp-then-rename, safe under concurrent
  // writers).
  QualityDistribution fetch_quality(std::int64_t rev_id);

  std::string cache_path(std::int64_t rev_id) const;
  std::string score_url(std::int64_t rev_id) const;
  const OresConfig& config() const { return cfg_; }

 private:
  OresConfig cfg_;
  std::unique_ptr<HttpTransport> transport_;
};

}  // namespace editgauge
