#pragma once

namespace sadiv::parallel {

// Process-wide thread cap for the OpenMP kernels. 0 means "hardware default".
// Timed benchmark paths call scoped_serial() to force single-threaded runs.
void set_max_threads(int n);
int max_threads();

// Effective thread count for a parallel region (respects the cap and OpenMP).
int effective_threads();

class ScopedSerial {
 public:
  ScopedSerial();
  ~ScopedSerial();
  ScopedSerial(const ScopedSerial&) = delete;
  ScopedSerial& operator=(const ScopedSerial&) = delete;

 private:
  int saved_;
};

}  // namespace sadiv::parallel
