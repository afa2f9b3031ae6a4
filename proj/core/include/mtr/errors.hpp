#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mtr {

// Error class partition used for CLI exit codes.
enum class ErrorKind {
    config,     // bad configuration, unknown dataset/style, invalid arguments
    io,         // missing files, unreadable directories, write failures
    format,     // malformed or unsupported on-disk data
    threshold,  // per-utterance error rate exceeded the configured limit
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string code, const std::string& message)
        : std::runtime_error(code + ": " + message),
          kind_(kind),
          code_(std::move(code)) {}

    ErrorKind kind() const noexcept { return kind_; }

    // Machine-readable error class, e.g. "MalformedRiff".
    const std::string& code() const noexcept { return code_; }

private:
    ErrorKind kind_;
    std::string code_;
};

[[noreturn]] inline void throw_config(std::string_view code, const std::string& msg) {
    throw Error(ErrorKind::config, std::string(code), msg);
}
[[noreturn]] inline void throw_io(std::string_view code, const std::string& msg) {
    throw Error(ErrorKind::io, std::string(code), msg);
}
[[noreturn]] inline void throw_format(std::string_view code, const std::string& msg) {
    throw Error(ErrorKind::format, std::string(code), msg);
}

}  // namespace mtr
