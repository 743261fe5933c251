#pragma once

#include <stdexcept>
#include <string>

namespace vnoc {

enum class ErrorCode {
  // codec / addressing
  PayloadTooLarge,
  MalformedPacket,
  AddressOutOfRange,
  // state machines
  IllegalTransition,
  SimulationFault,
  QueueFull,
  SendQueueFull,
  RegionBusy,
  // lookups / protocol
  UnknownPEType,
  UnknownTask,
  UnexpectedMessage,
  ArityMismatch,
  ResultMismatch,
  // configuration
  SchemaError,
  SemanticError,
  InvalidConfig,
  ConfigMismatch,
  // run control
  WatchdogTimeout,
};

const char* error_code_name(ErrorCode code);

// All runtime failures carry a code so the CLI can map them onto stable
// process exit codes without string matching.
class SimError : public std::runtime_error {
public:
  SimError(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

// Exit code contract: 0 success, 1 usage, 2 configuration, 3 simulation
// fault, 4 watchdog. Usage errors never reach SimError.
int exit_code_for(ErrorCode code);

}  // namespace vnoc
