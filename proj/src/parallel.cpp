#include "mlc/parallel.hpp"

namespace mlc {

ExecMode& exec_mode() {
#ifdef _OPENMP
  static ExecMode mode = ExecMode::OpenMP;
#else
  static ExecMode mode = ExecMode::Serial;
#endif
  return mode;
}

}  // namespace mlc
