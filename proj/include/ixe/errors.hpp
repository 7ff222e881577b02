#pragma once

#include <stdexcept>
#include <string>

namespace ixe {

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define IXE_DEFINE_ERROR(name)                                 \
  struct name : Error {                                        \
    explicit name(const std::string& what) : Error(what) {}    \
  }

IXE_DEFINE_ERROR(DegenerateProjection);
IXE_DEFINE_ERROR(DegenerateConfiguration);
IXE_DEFINE_ERROR(SpecOutOfBounds);
IXE_DEFINE_ERROR(InvalidConfig);
IXE_DEFINE_ERROR(IncompleteRoute);
IXE_DEFINE_ERROR(EmptyTruth);
IXE_DEFINE_ERROR(SingularInnovation);
IXE_DEFINE_ERROR(OutOfOrderFrame);
IXE_DEFINE_ERROR(InsufficientOverlap);
IXE_DEFINE_ERROR(TooManyObjects);
IXE_DEFINE_ERROR(BadMagic);
IXE_DEFINE_ERROR(TruncatedMessage);
IXE_DEFINE_ERROR(UnsupportedVersion);
IXE_DEFINE_ERROR(NonzeroReserved);
IXE_DEFINE_ERROR(SinkFailure);
IXE_DEFINE_ERROR(EmptyTraces);
IXE_DEFINE_ERROR(MissingLog);

#undef IXE_DEFINE_ERROR

}  // namespace ixe
