#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace bli {

/// Dense row-major matrix; one row per word vector.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

/// Index of a word inside a vocabulary.
using Index = std::int64_t;

/// All library failures surface as bli::Error (or a subclass).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

/// Training diverged (NaN/Inf loss).
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, int epoch) : Error(what), epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

// Warnings go through a replaceable sink (stderr by default).
using LogSink = std::function<void(std::string_view)>;
void set_log_sink(LogSink sink);
void log_warning(std::string_view message);
void log_info(std::string_view message);

/// Number of worker threads used by the OpenMP kernels.
int thread_count();
/// n <= 0 restores the default (BLI_THREADS, else all logical cores).
void set_thread_count(int n);

}  // namespace bli
