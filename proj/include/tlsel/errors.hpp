#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tlsel {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad user-supplied data: missing files, malformed cells, invalid subset files.
struct DataError : Error {
    using Error::Error;
};

// Dimension/shape violations and empty inputs on library calls.
struct ShapeError : Error {
    using Error::Error;
};

// Numeric failures: diverged training, singular solves, non-finite values.
struct NumericError : Error {
    using Error::Error;
};

// Invalid task or CLI configuration.
struct ConfigError : Error {
    using Error::Error;
};

struct NonNumericCellError : DataError {
    NonNumericCellError(std::size_t row, std::size_t col, const std::string& cell)
        : DataError("non-numeric cell '" + cell + "' at row " + std::to_string(row) +
                    ", column " + std::to_string(col)),
          row(row),
          col(col) {}
    std::size_t row;
    std::size_t col;
};

}  // namespace tlsel
