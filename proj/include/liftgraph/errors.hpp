#pragma once

#include <stdexcept>
#include <string>

namespace liftgraph {

/// Raised when operand shapes do not conform. The message names the shapes.
class ShapeError : public std::invalid_argument {
   public:
    using std::invalid_argument::invalid_argument;
};

/// Raised for out-of-range, duplicate or overlapping index lists.
class IndexError : public std::out_of_range {
   public:
    using std::out_of_range::out_of_range;
};

class ConfigError : public std::invalid_argument {
   public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed dataset or parameter file. Carries file and line when known.
class ParseError : public std::runtime_error {
   public:
    ParseError(const std::string& file, std::size_t line, const std::string& what)
        : std::runtime_error(file + ":" + std::to_string(line) + ": " + what), file_(file), line_(line) {}
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}

    const std::string& file() const { return file_; }
    std::size_t line() const { return line_; }

   private:
    std::string file_;
    std::size_t line_ = 0;
};

/// Non-finite loss during training.
class DivergenceError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

}  // namespace liftgraph
