// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace openti
{

enum class Errc
{
    InvalidArgument,
    NetworkError,
    AuthError,
    ScriptMiss,
    DuplicateName,
    MissingParams,
    TypeMismatch,
    NotFound,
    ServiceError,
    AreaTooLarge,
    NoFixture,
    EmptyNetwork,
    MalformedXml,
    IoError,
    EmptyResult,
    AllZonesEmpty,
    SimFailure,
    UnreachablePair,
    ControllerError,
    BackendError,
    SchemaError,
    InvalidSpec,
    UnreadableLog,
    EmptyCurve,
    ExtractionFailure,
    UnevenTrials,
    BindError,
};

std::string_view to_string(Errc code) noexcept;

/// Every failure in the library surfaces as this exception. `details` carries
/// structured payload where the code calls for one (missing parameter names,
/// the offending field of a schema check).
class Error : public std::runtime_error
{
public:
    Error(Errc code, const std::string& message, std::vector<std::string> details = {});

    [[nodiscard]] Errc code() const noexcept { return _code; }
    [[nodiscard]] const std::vector<std::string>& details() const noexcept { return _details; }

private:
    Errc _code;
    std::vector<std::string> _details;
};

[[noreturn]] inline void fail(Errc code, const std::string& message, std::vector<std::string> details = {})
{
    throw Error(code, message, std::move(details));
}

inline void require(bool condition, const std::string& message)
{
    if (!condition)
        fail(Errc::InvalidArgument, message);
}

} // namespace openti
