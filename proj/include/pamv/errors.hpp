#pragma once

#include <stdexcept>
#include <string>

namespace pamv {

// All library failures derive from Error; kind() is a stable machine-readable
// tag used by the CLI when reporting to scripted harnesses.
class Error : public std::runtime_error {
public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}

  [[nodiscard]] const std::string& kind() const noexcept { return kind_; }

private:
  std::string kind_;
};

#define PAMV_DEFINE_ERROR(Name)                                                \
  class Name : public Error {                                                  \
  public:                                                                      \
    explicit Name(const std::string& what) : Error(#Name, what) {}             \
  };

PAMV_DEFINE_ERROR(NotPositiveDefinite)
PAMV_DEFINE_ERROR(DimensionMismatch)
PAMV_DEFINE_ERROR(InvalidGeometry)
PAMV_DEFINE_ERROR(InvalidBandwidth)
PAMV_DEFINE_ERROR(TargetOutOfRange)
PAMV_DEFINE_ERROR(ZeroSignal)
PAMV_DEFINE_ERROR(InvalidSubarrayLength)
PAMV_DEFINE_ERROR(DegenerateImage)
PAMV_DEFINE_ERROR(DepthOutOfGrid)
PAMV_DEFINE_ERROR(NoPeakFound)
PAMV_DEFINE_ERROR(WidthUnbounded)
PAMV_DEFINE_ERROR(ConfigError)
PAMV_DEFINE_ERROR(FormatError)

#undef PAMV_DEFINE_ERROR

} // namespace pamv
