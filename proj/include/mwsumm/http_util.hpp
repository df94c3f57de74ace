#pragma once

#include <chrono>
#include <cstdint>
#include <random>
#include <string>
#include <thread>

#include "mwsumm/errors.hpp"

namespace mwsumm {

// "http://host:port/some/path" -> {"http://host:port", "/some/path"}
struct SplitUrl {
    std::string origin;
    std::string path;
};

inline SplitUrl split_url(const std::string& url) {
    std::size_t scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw ConfigError("URL must include a scheme: " + url);
    std::size_t path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

// Exponential backoff with full jitter. Delays are not part of any
// reproducibility contract, so a thread-local nondeterministic engine is fine.
struct BackoffPolicy {
    std::chrono::milliseconds initial{250};
    double factor = 2.0;
    std::chrono::milliseconds max_delay{20000};
    std::size_t max_attempts = 5;

    std::chrono::milliseconds delay(std::size_t attempt) const {
        double d = static_cast<double>(initial.count());
        for (std::size_t i = 0; i < attempt; ++i) d *= factor;
        d = std::min(d, static_cast<double>(max_delay.count()));
        thread_local std::mt19937_64 engine{std::random_device{}()};
        double jitter =
            static_cast<double>(engine() >> 11) * 0x1.0p-53;  // [0,1)
        return std::chrono::milliseconds(static_cast<std::int64_t>(d * jitter));
    }

    void sleep(std::size_t attempt) const {
        std::this_thread::sleep_for(delay(attempt));
    }
};

}  // namespace mwsumm
