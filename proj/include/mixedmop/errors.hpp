#pragma once

#include <stdexcept>
#include <string>

namespace mixedmop {

class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define MIXEDMOP_ERROR(Name)                                                   \
    class Name : public Error {                                                \
    public:                                                                    \
        explicit Name(const std::string& what) : Error(#Name, what) {}         \
    }

MIXEDMOP_ERROR(PerfectnessViolation);
MIXEDMOP_ERROR(SingularMinor);
MIXEDMOP_ERROR(WindowExceeded);
MIXEDMOP_ERROR(MinusNotFound);
MIXEDMOP_ERROR(NonFinite);
MIXEDMOP_ERROR(PoleOnSupport);
MIXEDMOP_ERROR(TooCloseToSupport);
MIXEDMOP_ERROR(SignFlip);
MIXEDMOP_ERROR(IncompatibleSystem);
MIXEDMOP_ERROR(ConstraintViolated);
MIXEDMOP_ERROR(FactorizationMismatch);
MIXEDMOP_ERROR(SingularTau);
MIXEDMOP_ERROR(SeriesUnderresolved);
MIXEDMOP_ERROR(NotConverged);
MIXEDMOP_ERROR(ConfigError);

#undef MIXEDMOP_ERROR

}  // namespace mixedmop
