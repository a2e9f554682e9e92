#pragma once

#include <stdexcept>
#include <string>

namespace backtrack {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Target box has no area (or does not overlap the frame at all).
class ZeroAreaTarget : public Error {
public:
    using Error::Error;
};

class InvalidConfig : public Error {
public:
    using Error::Error;
};

class InvalidScenario : public Error {
public:
    using Error::Error;
};

class MissingFrame : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class LengthMismatch : public Error {
public:
    using Error::Error;
};

class EmptyEvaluation : public Error {
public:
    using Error::Error;
};

}  // namespace backtrack
