#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

namespace molex::service {

struct TransportResponse {
  int status = 0;
  std::string body;
};

/// The transport signals a timeout by throwing TransportTimeout; any other
/// exception is treated as an upstream failure.
class TransportTimeout : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Transport = std::function<TransportResponse(const std::string& url, std::chrono::milliseconds timeout)>;

/// HTTPS GET through cpp-httplib.
Transport https_transport();

class PubchemDisabled : public std::runtime_error {
 public:
  PubchemDisabled() : std::runtime_error("PubChem similarity search is disabled") {}
};

class PubchemTimeout : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PubchemUpstreamError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PubchemResult {
  std::vector<long long> cids;
  int threshold = 0;
  bool cached = false;
  bool stale = false;  // served from an expired cache entry after a timeout
};

struct PubchemSettings {
  bool enabled = false;
  std::string base_url = "https://pubchem.ncbi.nlm.nih.gov";
  std::chrono::milliseconds timeout{10000};
  std::chrono::seconds cache_ttl{24 * 3600};
};

/// Client for PubChem's 2D similarity REST search. The threshold is passed
/// through unchanged as the upstream `Threshold` parameter.
class PubchemClient {
 public:
  PubchemClient(PubchemSettings settings, Transport transport);

  PubchemResult similar(const std::string& smiles, int threshold);

  std::string request_url(const std::string& smiles, int threshold) const;

 private:
  struct Entry {
    std::vector<long long> cids;
    std::chrono::steady_clock::time_point fetched;
  };

  PubchemSettings settings_;
  Transport transport_;
  std::mutex mu_;
  std::map<std::pair<std::string, int>, Entry> cache_;
};

}  // namespace molex::service
