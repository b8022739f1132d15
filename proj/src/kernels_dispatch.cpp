#include "fsm/kernels.hpp"

#include <cstdlib>

namespace fsm::kernels {

namespace {

const Table& pick() {
  if (const char* force = std::getenv("FSM_FORCE_SCALAR"); force && force[0] == '1')
    return scalar_table();
#ifdef FSM_BUILD_AVX2
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
    return avx2_table();
#endif
  return scalar_table();
}

}  // namespace

const Table& active() {
  static const Table& t = pick();
  return t;
}

}  // namespace fsm::kernels
