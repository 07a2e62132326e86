#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace agora {

enum class Errc {
    empty_message,
    too_long,
    unknown_session,
    bad_session,
    bad_name,
    duplicate_join,
    not_joined,
    malformed_update,
    bad_frame,
    unknown_type,
    log_write_failure,
    corrupt_line,
    invalid_proposal,
    invalid_plan,
};

// Wire spelling used in `error` frames, e.g. "EMPTY_MESSAGE".
std::string_view wire_code(Errc code) noexcept;

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& detail)
        : std::runtime_error(detail), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

} // namespace agora
