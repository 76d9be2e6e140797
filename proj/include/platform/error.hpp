#pragma once
#include <stdexcept>
#include <string>

namespace platform {

/* Base class for every error raised by the library. */
struct platform_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/* A design, policy or scenario violates its preconditions. */
struct invalid_argument : platform_error {
    using platform_error::platform_error;
};

/* An iterative numerical routine failed to converge. */
struct convergence_error : platform_error {
    using platform_error::platform_error;
};

/* Configuration input failed validation; `path` names the offending field. */
struct config_error : platform_error {
    config_error(std::string path, const std::string& msg)
        : platform_error(path.empty() ? msg : path + ": " + msg),
          path_(std::move(path)) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

}  // namespace platform
