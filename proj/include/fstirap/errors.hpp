#pragma once

#include <stdexcept>
#include <string>

namespace fstirap {

/// Invalid physical or structural parameters (bad PulseSpec, bad J/J' pair, ...).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An operation was asked of a pulse family that does not support it.
class UnsupportedShape : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Both fields vanish, so the trapped state has no defined direction.
class UndefinedDarkState : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A Stokes-side Clebsch-Gordan coefficient in the chain recurrence is zero.
class RecurrenceBreakdown : public std::domain_error {
public:
    RecurrenceBreakdown(int m, const std::string& what)
        : std::domain_error(what), m_(m) {}

    /// Lower-sublevel magnetic number whose successor cannot be reached.
    int m() const noexcept { return m_; }

private:
    int m_;
};

/// The upper bound on the pulse delay falls below the lower bound.
class NoAdiabaticWindow : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

} // namespace fstirap
