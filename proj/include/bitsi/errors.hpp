#pragma once

#include <stdexcept>
#include <string>

namespace bitsi {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
public:
	explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// core / codec
class PeriodTooLong : public Error { using Error::Error; };
class NotDivisible : public Error { using Error::Error; };
class CapacityViolation : public Error { using Error::Error; };
class IndexOutOfRange : public Error { using Error::Error; };
class MetaMismatch : public Error { using Error::Error; };
class InvalidMask : public Error { using Error::Error; };

// qa
class NoDistinctPair : public Error { using Error::Error; };

// eval
class LengthMismatch : public Error { using Error::Error; };
class EmptyIntersection : public Error { using Error::Error; };
class AllMissing : public Error { using Error::Error; };
class AllMasked : public Error { using Error::Error; };

// io
class IoError : public Error { using Error::Error; };
class EmptyFile : public Error { using Error::Error; };
class SchemaMismatch : public Error { using Error::Error; };

/// CSV ingestion failure carrying the 1-based file location.
class ParseError : public Error {
public:
	ParseError(int row, int col, const std::string& what_failed)
	    : Error("parse error at row " + std::to_string(row) + ", col " + std::to_string(col) + ": " + what_failed),
	      row(row), col(col) {}
	int row;
	int col;
};

} // namespace bitsi
