#include "agora/error.hpp"

namespace agora {

std::string_view wire_code(Errc code) noexcept
{
    switch (code) {
    case Errc::empty_message: return "EMPTY_MESSAGE";
    case Errc::too_long: return "TOO_LONG";
    case Errc::unknown_session: return "UNKNOWN_SESSION";
    case Errc::bad_session: return "BAD_SESSION";
    case Errc::bad_name: return "BAD_NAME";
    case Errc::duplicate_join: return "DUPLICATE_JOIN";
    case Errc::not_joined: return "NOT_JOINED";
    case Errc::malformed_update: return "MALFORMED_UPDATE";
    case Errc::bad_frame: return "BAD_FRAME";
    case Errc::unknown_type: return "UNKNOWN_TYPE";
    case Errc::log_write_failure: return "LOG_WRITE_FAILURE";
    case Errc::corrupt_line: return "CORRUPT_LINE";
    case Errc::invalid_proposal: return "INVALID_PROPOSAL";
    case Errc::invalid_plan: return "INVALID_PLAN";
    }
    return "INTERNAL";
}

} // namespace agora
