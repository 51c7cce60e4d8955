#include "stosqp/trace.hpp"

namespace stosqp {

const char* to_string(RunStatus status) {
  switch (status) {
    case RunStatus::Converged:
      return "Converged";
    case RunStatus::MaxIters:
      return "MaxIters";
    case RunStatus::Divergent:
      return "Divergent";
    case RunStatus::ConvergedByBatchCap:
      return "ConvergedByBatchCap";
  }
  return "?";
}

const char* to_string(StepType type) {
  switch (type) {
    case StepType::Reliable:
      return "Reliable";
    case StepType::Unreliable:
      return "Unreliable";
    case StepType::Unsuccessful:
      return "Unsuccessful";
    case StepType::NuIncrease:
      return "NuIncrease";
    case StepType::Prescribed:
      return "Prescribed";
  }
  return "?";
}

}  // namespace stosqp
