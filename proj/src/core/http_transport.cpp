#include <chrono>
#include <memory>

#include "core/serp.hpp"
#include "httplib.h"

namespace webprf::serp {
namespace {

class HttplibTransport final : public HttpTransport {
 public:
  explicit HttplibTransport(std::chrono::seconds timeout) : timeout_(timeout) {}

  HttpResponse get(const std::string& url, const HttpHeaders& headers) override {
    std::size_t scheme = url.find("://");
    if (scheme == std::string::npos) throw FetchError("not an absolute URL: " + url, "");
    std::size_t path_start = url.find('/', scheme + 3);
    std::string origin = url.substr(0, path_start);
    std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

    httplib::Client client(origin);
    if (!client.is_valid()) throw FetchError("unsupported URL (is TLS enabled?): " + url, "");
    client.set_follow_location(true);
    client.set_connection_timeout(timeout_.count(), 0);
    client.set_read_timeout(timeout_.count(), 0);
    httplib::Headers h;
    for (const auto& [k, v] : headers) h.emplace(k, v);

    auto result = client.Get(path, h);
    if (!result) throw FetchError(url + ": " + httplib::to_string(result.error()), "");
    HttpResponse resp;
    resp.status = result->status;
    resp.content_type = result->get_header_value("Content-Type");
    resp.body = std::move(result->body);
    return resp;
  }

 private:
  std::chrono::seconds timeout_;
};

}  // namespace

std::unique_ptr<HttpTransport> make_http_transport(std::chrono::seconds timeout) {
  return std::make_unique<HttplibTransport>(timeout);
}

}  // namespace webprf::serp
