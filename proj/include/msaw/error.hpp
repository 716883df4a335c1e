#pragma once

#include <stdexcept>
#include <string>

namespace msaw {

// Base for every error raised by the library. Callers that only need to
// report a failure can catch this; the subclasses exist for tests and for
// the CLI's exit-code mapping.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class schema_error : public error {
public:
    using error::error;
};

class data_error : public error {
public:
    using error::error;
};

class config_error : public error {
public:
    using error::error;
};

}  // namespace msaw
