#pragma once

#include <stdexcept>
#include <string>

namespace cegsr {

/* Single exception type for all library failures; the message starts with the
 * operation name and a stable keyword (e.g. "file missing", "ragged rows") that
 * callers and tests can match on. */
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what_arg) : std::runtime_error(what_arg) {}
};

} // namespace cegsr
