#pragma once

#include <stdexcept>
#include <string>

namespace stego {

// Base type for all library errors. The CLI maps each concrete class to a
// distinct exit code (see tools/stegotok.cpp).
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Distribution construction saw no strictly positive probability.
struct EmptySupport : Error { using Error::Error; };

// KL divergence requested where Q has mass outside P's support.
struct SupportMismatch : Error { using Error::Error; };

// Quantization total 2^k cannot give every retained token one count.
struct PrecisionTooLow : Error { using Error::Error; };

// Bisection did not reach the KL tolerance within the iteration cap.
struct ConvergenceFailure : Error { using Error::Error; };

// Payload bit string was empty.
struct EmptyMessage : Error { using Error::Error; };

// extract step saw a token absent from the quantized distribution.
struct TokenNotInDistribution : Error { using Error::Error; };

// Token id outside the vocabulary, or text the tokenizer cannot parse.
struct InvalidToken : Error { using Error::Error; };

// Remote probability source failed or broke its contract mid-session.
struct SourceUnavailable : Error { using Error::Error; };

// Encoder/decoder distribution divergence: configuration or model drift.
struct DesyncError : Error { using Error::Error; };

// Every retry-prefix candidate failed verification.
struct UnembeddableMessage : Error { using Error::Error; };

// Prefix sizing cannot reach the success target at the given error rate.
struct TargetUnreachable : Error { using Error::Error; };

// Sidecar metadata does not match the local session configuration.
struct MetadataMismatch : Error { using Error::Error; };

// Malformed JSON input (metrics file, sweep spec, sidecar).
struct ParseError : Error { using Error::Error; };

}  // namespace stego
