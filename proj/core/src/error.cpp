#include "vnoc/error.hpp"

namespace vnoc {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::PayloadTooLarge: return "PayloadTooLarge";
    case ErrorCode::MalformedPacket: return "MalformedPacket";
    case ErrorCode::AddressOutOfRange: return "AddressOutOfRange";
    case ErrorCode::IllegalTransition: return "IllegalTransition";
    case ErrorCode::SimulationFault: return "SimulationFault";
    case ErrorCode::QueueFull: return "QueueFull";
    case ErrorCode::SendQueueFull: return "SendQueueFull";
    case ErrorCode::RegionBusy: return "RegionBusy";
    case ErrorCode::UnknownPEType: return "UnknownPEType";
    case ErrorCode::UnknownTask: return "UnknownTask";
    case ErrorCode::UnexpectedMessage: return "UnexpectedMessage";
    case ErrorCode::ArityMismatch: return "ArityMismatch";
    case ErrorCode::ResultMismatch: return "ResultMismatch";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::SemanticError: return "SemanticError";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::ConfigMismatch: return "ConfigMismatch";
    case ErrorCode::WatchdogTimeout: return "WatchdogTimeout";
  }
  return "UnknownError";
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::SchemaError:
    case ErrorCode::SemanticError:
    case ErrorCode::InvalidConfig:
    case ErrorCode::ConfigMismatch:
      return 2;
    case ErrorCode::WatchdogTimeout:
      return 4;
    default:
      return 3;
  }
}

}  // namespace vnoc
