#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace meanrank {

// Problems caused by inputs (bad files, bad flags). The CLI maps these to
// exit code 1; anything else escaping a command is an internal error.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class LoadError : public InputError {
public:
    LoadError(const std::string& file, std::size_t line, const std::string& what)
        : InputError(file + ":" + std::to_string(line) + ": " + what), file_(file), line_(line) {}

    const std::string& file() const noexcept { return file_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string file_;
    std::size_t line_;
};

// Binary logit-table decoding failure, located by byte offset.
class FormatError : public InputError {
public:
    FormatError(std::uint64_t offset, const std::string& what)
        : InputError("at byte " + std::to_string(offset) + ": " + what), offset_(offset) {}

    std::uint64_t offset() const noexcept { return offset_; }

private:
    std::uint64_t offset_;
};

class DimensionError : public InputError {
public:
    using InputError::InputError;
};

}  // namespace meanrank
