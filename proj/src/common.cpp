#include "bli/common.hpp"

#include <omp.h>

#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>

namespace bli {
namespace {

std::mutex g_log_mutex;
LogSink g_sink;
int g_threads = 0;

int default_threads() {
  if (const char* env = std::getenv("BLI_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return omp_get_num_procs();
}

void emit(std::string_view prefix, std::string_view message) {
  std::lock_guard<std::mutex> lock(g_log_mutex);
  if (g_sink) {
    g_sink(std::string(prefix) + std::string(message));
  } else {
    std::cerr << prefix << message << '\n';
  }
}

}  // namespace

void set_log_sink(LogSink sink) {
  std::lock_guard<std::mutex> lock(g_log_mutex);
  g_sink = std::move(sink);
}

void log_warning(std::string_view message) { emit("warning: ", message); }
void log_info(std::string_view message) { emit("", message); }

int thread_count() {
  if (g_threads <= 0) g_threads = default_threads();
  return g_threads;
}

void set_thread_count(int n) { g_threads = n > 0 ? n : default_threads(); }

}  // namespace bli
