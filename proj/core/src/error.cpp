#include "dgmm/error.hpp"

namespace dgmm {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_name: return "invalid-name";
    case ErrorKind::invalid_time: return "invalid-time";
    case ErrorKind::schema_violation: return "schema-violation";
    case ErrorKind::out_of_range: return "out-of-range";
    case ErrorKind::corruption: return "corruption";
    case ErrorKind::invalid_cue: return "invalid-cue";
    case ErrorKind::incomparable: return "incomparable";
    case ErrorKind::not_recalled: return "not-recalled";
    case ErrorKind::domain_restriction: return "domain-restriction";
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::invalid_parameters: return "invalid-parameters";
    case ErrorKind::ordering: return "ordering";
    case ErrorKind::busy: return "busy";
    case ErrorKind::io: return "io";
    case ErrorKind::parse: return "parse";
  }
  return "unknown";
}

}  // namespace dgmm
