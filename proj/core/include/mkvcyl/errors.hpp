#pragma once

#include <stdexcept>
#include <string>

namespace mkvcyl {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual const char* kind() const noexcept { return "Error"; }
};

#define MKVCYL_ERROR(Name)                                              \
    class Name : public Error {                                         \
    public:                                                             \
        using Error::Error;                                             \
        const char* kind() const noexcept override { return #Name; }    \
    };

MKVCYL_ERROR(DomainError)
MKVCYL_ERROR(NumericalError)
MKVCYL_ERROR(CapacityError)
MKVCYL_ERROR(SolverError)
MKVCYL_ERROR(CertificateError)
MKVCYL_ERROR(ConfigError)

#undef MKVCYL_ERROR

} // namespace mkvcyl
