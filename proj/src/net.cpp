#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "meteo/net.hpp"

#include "meteo/error.hpp"

#include <fmt/format.h>

#include <atomic>
#include <cctype>

namespace meteo::net {

namespace {

std::atomic<std::uint64_t> g_live_requests{0};

httplib::Headers to_httplib(const Headers& headers)
{
    httplib::Headers out;
    for (const auto& [k, v] : headers)
        out.emplace(k, v);
    return out;
}

httplib::Client make_client(const UrlParts& parts, int timeout_seconds)
{
    httplib::Client cli(parts.scheme_host_port);
    cli.set_connection_timeout(timeout_seconds, 0);
    cli.set_read_timeout(timeout_seconds, 0);
    cli.set_write_timeout(timeout_seconds, 0);
    cli.set_follow_location(true);
    return cli;
}

HttpResponse unwrap(const httplib::Result& res, std::string_view url)
{
    if (!res)
        throw Error(ErrorKind::network, fmt::format("request to {} failed: {}", url, httplib::to_string(res.error())));
    return HttpResponse{res->status, res->body};
}

} // namespace

HttpResponse LiveHttpClient::get(const std::string& url, const Headers& headers)
{
    const auto parts = split_url(url);
    ++g_live_requests;
    auto cli = make_client(parts, timeout_seconds_);
    return unwrap(cli.Get(parts.path_and_query, to_httplib(headers)), url);
}

HttpResponse LiveHttpClient::post(const std::string& url, const std::string& body, const std::string& content_type,
                                  const Headers& headers)
{
    const auto parts = split_url(url);
    ++g_live_requests;
    auto cli = make_client(parts, timeout_seconds_);
    return unwrap(cli.Post(parts.path_and_query, to_httplib(headers), body, content_type), url);
}

HttpClient& default_client()
{
    static LiveHttpClient client;
    return client;
}

std::uint64_t live_request_count() noexcept
{
    return g_live_requests.load();
}

std::string url_encode(std::string_view text)
{
    std::string out;
    for (const unsigned char c : text) {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~')
            out += static_cast<char>(c);
        else
            out += fmt::format("%{:02X}", c);
    }
    return out;
}

UrlParts split_url(std::string_view url)
{
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string_view::npos)
        throw Error(ErrorKind::config, fmt::format("URL '{}' has no scheme", url));
    const auto scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https")
        throw Error(ErrorKind::config, fmt::format("URL '{}' must use http or https", url));
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string_view::npos)
        return UrlParts{std::string(url), "/"};
    return UrlParts{std::string(url.substr(0, path_start)), std::string(url.substr(path_start))};
}

} // namespace meteo::net
