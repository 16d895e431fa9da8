#pragma once

#include <stdexcept>
#include <string>

namespace gmtbench {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define GMTBENCH_DEFINE_ERROR(NAME)            \
    class NAME : public Error {                \
    public:                                    \
        using Error::Error;                    \
    }

GMTBENCH_DEFINE_ERROR(MissingColumn);
GMTBENCH_DEFINE_ERROR(EmptySeries);
GMTBENCH_DEFINE_ERROR(NonConsecutiveYears);
GMTBENCH_DEFINE_ERROR(TooShort);
GMTBENCH_DEFINE_ERROR(NonPositiveInput);
GMTBENCH_DEFINE_ERROR(DegenerateData);
GMTBENCH_DEFINE_ERROR(InverseDomain);
GMTBENCH_DEFINE_ERROR(SingularRegression);
GMTBENCH_DEFINE_ERROR(WindowTooLarge);
GMTBENCH_DEFINE_ERROR(KTooLarge);
GMTBENCH_DEFINE_ERROR(NotDivisible);
GMTBENCH_DEFINE_ERROR(LengthMismatch);
GMTBENCH_DEFINE_ERROR(InsufficientData);
GMTBENCH_DEFINE_ERROR(AllCandidatesFailed);
GMTBENCH_DEFINE_ERROR(IoFailure);
GMTBENCH_DEFINE_ERROR(ConfigError);

#undef GMTBENCH_DEFINE_ERROR

}  // namespace gmtbench
