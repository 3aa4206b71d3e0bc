// SPDX-License-Identifier: Apache-2.0
#include <openti/core/error.hpp>

namespace openti
{

std::string_view to_string(Errc code) noexcept
{
    switch (code)
    {
        case Errc::InvalidArgument: return "InvalidArgument";
        case Errc::NetworkError: return "NetworkError";
        case Errc::AuthError: return "AuthError";
        case Errc::ScriptMiss: return "ScriptMiss";
        case Errc::DuplicateName: return "DuplicateName";
        case Errc::MissingParams: return "MissingParams";
        case Errc::TypeMismatch: return "TypeMismatch";
        case Errc::NotFound: return "NotFound";
        case Errc::ServiceError: return "ServiceError";
        case Errc::AreaTooLarge: return "AreaTooLarge";
        case Errc::NoFixture: return "NoFixture";
        case Errc::EmptyNetwork: return "EmptyNetwork";
        case Errc::MalformedXml: return "MalformedXML";
        case Errc::IoError: return "IoError";
        case Errc::EmptyResult: return "EmptyResult";
        case Errc::AllZonesEmpty: return "AllZonesEmpty";
        case Errc::SimFailure: return "SimFailure";
        case Errc::UnreachablePair: return "UnreachablePair";
        case Errc::ControllerError: return "ControllerError";
        case Errc::BackendError: return "BackendError";
        case Errc::SchemaError: return "SchemaError";
        case Errc::InvalidSpec: return "InvalidSpec";
        case Errc::UnreadableLog: return "UnreadableLog";
        case Errc::EmptyCurve: return "EmptyCurve";
        case Errc::ExtractionFailure: return "ExtractionFailure";
        case Errc::UnevenTrials: return "UnevenTrials";
        case Errc::BindError: return "BindError";
    }
    return "Unknown";
}

Error::Error(Errc code, const std::string& message, std::vector<std::string> details):
    std::runtime_error(std::string(to_string(code)) + ": " + message), _code(code), _details(std::move(details))
{
}

} // namespace openti
