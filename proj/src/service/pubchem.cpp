#include <httplib.h>
#include <json.hpp>

#include "molex/service/pubchem.hpp"

namespace molex::service {
namespace {

std::string url_encode(const std::string& s) {
  static const char* hex = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out += static_cast<char>(c);
    } else {
      out += '%';
      out += hex[c >> 4];
      out += hex[c & 15];
    }
  }
  return out;
}

}  // namespace

Transport https_transport() {
  return [](const std::string& url, std::chrono::milliseconds timeout) {
    const auto scheme_end = url.find("://");
    const auto path_start = url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    const std::string origin = url.substr(0, path_start);
    const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);
    httplib::Client client(origin);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    auto res = client.Get(path);
    if (!res) {
      if (res.error() == httplib::Error::Read || res.error() == httplib::Error::ConnectionTimeout)
        throw TransportTimeout("PubChem request failed: " + httplib::to_string(res.error()));
      throw std::runtime_error("PubChem request failed: " + httplib::to_string(res.error()));
    }
    return TransportResponse{res->status, res->body};
  };
}

PubchemClient::PubchemClient(PubchemSettings settings, Transport transport)
    : settings_(std::move(settings)), transport_(std::move(transport)) {}

std::string PubchemClient::request_url(const std::string& smiles, int threshold) const {
  return settings_.base_url + "/rest/pug/compound/fastsimilarity_2d/smiles/" + url_encode(smiles) +
         "/cids/JSON?Threshold=" + std::to_string(threshold);
}

PubchemResult PubchemClient::similar(const std::string& smiles, int threshold) {
  if (!settings_.enabled) throw PubchemDisabled();
  const auto key = std::make_pair(smiles, threshold);
  const auto now = std::chrono::steady_clock::now();
  {
    std::lock_guard lock(mu_);
    if (auto it = cache_.find(key); it != cache_.end() && now - it->second.fetched < settings_.cache_ttl)
      return {it->second.cids, threshold, true, false};
  }

  TransportResponse res;
  try {
    res = transport_(request_url(smiles, threshold), settings_.timeout);
  } catch (const TransportTimeout& e) {
    std::lock_guard lock(mu_);
    if (auto it = cache_.find(key); it != cache_.end()) return {it->second.cids, threshold, true, true};
    throw PubchemTimeout(e.what());
  } catch (const std::exception& e) {
    throw PubchemUpstreamError(e.what());
  }
  PubchemResult out;
  out.threshold = threshold;
  if (res.status == 404) {
    // PubChem answers 404 when nothing reaches the threshold.
  } else if (res.status != 200) {
    throw PubchemUpstreamError("PubChem returned HTTP " + std::to_string(res.status));
  } else {
    try {
      const auto j = nlohmann::json::parse(res.body);
      for (const auto& cid : j.at("IdentifierList").at("CID")) out.cids.push_back(cid.get<long long>());
    } catch (const std::exception& e) {
      throw PubchemUpstreamError(std::string("unexpected PubChem response: ") + e.what());
    }
  }
  std::lock_guard lock(mu_);
  cache_[key] = {out.cids, now};
  return out;
}

}  // namespace molex::service
