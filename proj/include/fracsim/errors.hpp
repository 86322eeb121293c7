#pragma once

#include <stdexcept>
#include <string>

namespace fracsim {

struct RegularityViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DomainTooCoarse : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParamOutOfRange : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EndpointNotOnEdge : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CrackThroughVertex : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SingularSystem : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InstanceTooLarge : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonConvergence : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace fracsim
