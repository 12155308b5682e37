#include "thermo/error.hpp"

namespace thermo {

const char* to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::domain: return "domain error";
    case ErrorKind::insufficient_data: return "insufficient data";
    case ErrorKind::partial_result: return "partial result";
    case ErrorKind::unresolved: return "unresolved";
    case ErrorKind::horizon: return "horizon insufficient";
    case ErrorKind::config: return "rejected configuration";
    case ErrorKind::io: return "io error";
    }
    return "error";
}

}  // namespace thermo
