#pragma once

#include <stdexcept>
#include <string>

namespace rdpscope {

// Base class for every error raised by the toolkit. Subclass names double as
// the stable error identifiers surfaced by the CLI.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// capture
struct MalformedCapture : Error { using Error::Error; };
struct TruncatedRecord : Error { using Error::Error; };
struct UnknownEndpoint : Error { using Error::Error; };

// windowing
struct MissingLabel : Error { using Error::Error; };
struct LabelSchemaError : Error { using Error::Error; };

// flowstats
struct EmptyWindow : Error { using Error::Error; };
struct SchemaMismatch : Error { using Error::Error; };

// transforms
struct IndexOutOfRange : Error { using Error::Error; };
struct DegenerateMatrix : Error { using Error::Error; };
struct ArityMismatch : Error { using Error::Error; };

// selection
struct EmptyBackground : Error { using Error::Error; };

// learners
struct SingleClassData : Error { using Error::Error; };
struct EmptyData : Error { using Error::Error; };
struct StratificationError : Error { using Error::Error; };
struct EmptyConfusion : Error { using Error::Error; };

// ensemble
struct InsufficientModels : Error { using Error::Error; };
struct NoPositives : Error { using Error::Error; };

// sidechannel
struct NoTcpConversation : Error { using Error::Error; };

// synthgen
struct InvalidProfile : Error { using Error::Error; };

// cli
struct ConfigError : Error { using Error::Error; };

}  // namespace rdpscope
