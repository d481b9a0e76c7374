#pragma once

#include <stdexcept>
#include <string>

namespace nearzero {

// Thrown when an iterative numeric routine stops short of the requested
// tolerance. Carries how far it actually got so callers can decide whether
// the partial answer is still usable.
class numeric_error : public std::runtime_error {
public:
    numeric_error(const std::string& what, double achieved_tolerance)
        : std::runtime_error(what), achieved_(achieved_tolerance) {}

    double achieved_tolerance() const noexcept { return achieved_; }

private:
    double achieved_;
};

// Thrown when a simulation exceeds an explicit resource budget (sample count,
// jump count). The budget is always a documented parameter, never implicit.
class resource_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace nearzero
