#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace meteo::net {

using Headers = std::vector<std::pair<std::string, std::string>>;

struct HttpResponse {
    int status = 0;
    std::string body;
};

// Transport seam. Production code uses LiveHttpClient; tests substitute
// loopback servers or clients that refuse to be called at all.
class HttpClient {
public:
    virtual ~HttpClient() = default;

    // Throws ErrorKind::network on transport failure. Non-2xx statuses are
    // returned, not thrown.
    virtual HttpResponse get(const std::string& url, const Headers& headers) = 0;
    virtual HttpResponse post(const std::string& url, const std::string& body,
                              const std::string& content_type, const Headers& headers) = 0;
};

class LiveHttpClient final : public HttpClient {
public:
    explicit LiveHttpClient(int timeout_seconds = 30) : timeout_seconds_(timeout_seconds) {}

    HttpResponse get(const std::string& url, const Headers& headers) override;
    HttpResponse post(const std::string& url, const std::string& body,
                      const std::string& content_type, const Headers& headers) override;

private:
    int timeout_seconds_;
};

// Process-wide LiveHttpClient.
HttpClient& default_client();

// Number of requests LiveHttpClient has attempted in this process. Offline
// runs are expected to leave it at zero.
std::uint64_t live_request_count() noexcept;

std::string url_encode(std::string_view text);

struct UrlParts {
    std::string scheme_host_port; // "https://api.example.com:443"
    std::string path_and_query;   // "/v1/x?y=1"
};

// Throws ErrorKind::config for URLs without an http(s) scheme.
UrlParts split_url(std::string_view url);

} // namespace meteo::net
