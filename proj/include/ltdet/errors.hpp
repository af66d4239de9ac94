#pragma once

#include <stdexcept>
#include <string>

namespace ltdet {

/// Invalid configuration or command-line input (CLI exit code 2).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Missing, unreadable or corrupt data files (CLI exit code 3).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ltdet
