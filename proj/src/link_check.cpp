#include <algorithm>
#include <atomic>
#include <chrono>
#include <iostream>
#include <mutex>
#include <optional>
#include <thread>
#include <unordered_map>

#include <httplib.h>

#include "editex/features.hpp"

namespace editex {
namespace {

constexpr int kMaxRedirects = 5;

struct LinkCache {
    std::mutex mu;
    std::unordered_map<std::string, bool> inactive;
};

LinkCache& cache() {
    static LinkCache c;
    return c;
}

struct Url {
    std::string origin;  // scheme://host[:port]
    std::string path;    // starts with '/'
};

std::optional<Url> split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) return std::nullopt;
    const std::string scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") return std::nullopt;
    const auto path_at = url.find_first_of("/?#", scheme_end + 3);
    Url out;
    out.origin = url.substr(0, path_at);
    out.path = path_at == std::string::npos ? "/" : url.substr(path_at);
    if (const auto hash = out.path.find('#'); hash != std::string::npos) out.path.erase(hash);
    if (out.path.empty() || out.path.front() != '/') out.path.insert(out.path.begin(), '/');
    if (out.origin.size() <= scheme_end + 3) return std::nullopt;
    return out;
}

std::string resolve(const Url& base, const std::string& location) {
    if (location.find("://") != std::string::npos) return location;
    if (location.starts_with("//")) return base.origin.substr(0, base.origin.find("://") + 1) + location;
    if (location.starts_with("/")) return base.origin + location;
    const auto slash = base.path.rfind('/');
    return base.origin + base.path.substr(0, slash + 1) + location;
}

// Returns true when the link is inactive.
bool probe(std::string url, double timeout_seconds) {
    const auto secs = std::chrono::duration<double>(std::max(timeout_seconds, 0.001));
    const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(secs);

    for (int hop = 0; hop <= kMaxRedirects; ++hop) {
        const auto parts = split_url(url);
        if (!parts) {
            std::clog << "editex: link check: unsupported url " << url << '\n';
            return true;
        }
        httplib::Client client(parts->origin);
        if (!client.is_valid()) {
            std::clog << "editex: link check: cannot open " << url << '\n';
            return true;
        }
        client.set_connection_timeout(timeout);
        client.set_read_timeout(timeout);
        client.set_write_timeout(timeout);
        client.set_follow_location(false);
#ifdef CPPHTTPLIB_OPENSSL_SUPPORT
        // Liveness only; a certificate problem is not a dead link.
        client.enable_server_certificate_verification(false);
#endif
        auto res = client.Head(parts->path);
        if (res && res->status == 405) res = client.Get(parts->path);
        if (!res) {
            std::clog << "editex: link check: " << url << ": " << httplib::to_string(res.error()) << '\n';
            return true;
        }
        const int status = res->status;
        if (status >= 300 && status < 400 && res->has_header("Location") && hop < kMaxRedirects) {
            url = resolve(*parts, res->get_header_value("Location"));
            continue;
        }
        if (status >= 400) {
            std::clog << "editex: link check: " << url << " returned " << status << '\n';
            return true;
        }
        return false;
    }
    return false;
}

}  // namespace

void clear_link_cache() {
    auto& c = cache();
    std::lock_guard lock(c.mu);
    c.inactive.clear();
}

bool check_inactive_hyperlinks(std::span<const std::string> links_after, const LinkCheckPolicy& policy) {
    const auto* net = std::get_if<LinkCheckNetwork>(&policy);
    if (!net || links_after.empty()) return false;

    using clock = std::chrono::steady_clock;
    const auto start = clock::now();
    const bool budgeted = net->budget_seconds > 0.0;
    const auto deadline =
        start + std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(net->budget_seconds));

    std::vector<std::string> links(links_after.begin(), links_after.end());
    std::sort(links.begin(), links.end());
    links.erase(std::unique(links.begin(), links.end()), links.end());

    std::atomic<std::size_t> next{0};
    std::atomic<bool> found{false};
    auto worker = [&] {
        while (!found.load()) {
            const std::size_t i = next.fetch_add(1);
            if (i >= links.size()) return;
            const std::string& url = links[i];
            {
                auto& c = cache();
                std::lock_guard lock(c.mu);
                if (auto it = c.inactive.find(url); it != c.inactive.end()) {
                    if (it->second) found = true;
                    continue;
                }
            }
            double timeout = net->timeout_seconds;
            if (budgeted) {
                const double remaining = std::chrono::duration<double>(deadline - clock::now()).count();
                if (remaining <= 0.0) return;
                timeout = std::min(timeout, remaining);
            }
            const bool dead = probe(url, timeout);
            // Results cut short by the budget are not cached.
            if (!budgeted || clock::now() < deadline || !dead) {
                auto& c = cache();
                std::lock_guard lock(c.mu);
                c.inactive.emplace(url, dead);
            }
            if (dead && (!budgeted || clock::now() < deadline)) found = true;
        }
    };

    const std::size_t n_threads =
        std::min<std::size_t>(links.size(), static_cast<std::size_t>(std::max(net->max_parallel, 1)));
    std::vector<std::thread> threads;
    threads.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    return found.load();
}

}  // namespace editex
