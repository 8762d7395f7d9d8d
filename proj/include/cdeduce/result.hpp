// cdeduce/result.hpp — error taxonomy and a small expected-style result type.

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "cdeduce/event.hpp"

namespace cdeduce {

enum class ErrorKind {
  AlreadyDetermined,  // an initial judgement already exists for the pair
  M4Violation,        // evolution would leave a correspondence chain-connected
  ChainViolation,     // internal placement would break the internal chain
  NotInWorld,         // the enclosing world does not model the correspondence
  WorldDisagrees,     // the world orders the pair the other way
  NoSuchCR,           // update needs a stored causally-related correspondence
  NotPresent,         // removal target is not stored
  NotInvertible,      // removal would not be the exact inverse of an addition
  VerdictExists,      // hypothesis requires a pair with no verdict at all
  HypothesisUndefined,  // refutation probe's hypothetical microcosm is undefined
  DomainError,          // reflexive query, unknown event, malformed input
  Syntax,               // scenario text could not be parsed
};

inline std::string_view error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::AlreadyDetermined: return "AlreadyDetermined";
    case ErrorKind::M4Violation: return "M4Violation";
    case ErrorKind::ChainViolation: return "ChainViolation";
    case ErrorKind::NotInWorld: return "NotInWorld";
    case ErrorKind::WorldDisagrees: return "WorldDisagrees";
    case ErrorKind::NoSuchCR: return "NoSuchCR";
    case ErrorKind::NotPresent: return "NotPresent";
    case ErrorKind::NotInvertible: return "NotInvertible";
    case ErrorKind::VerdictExists: return "VerdictExists";
    case ErrorKind::HypothesisUndefined: return "HypothesisUndefined";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::Syntax: return "Syntax";
  }
  return "Error";
}

struct Error {
  ErrorKind kind = ErrorKind::DomainError;
  std::string message;
  // For M4Violation: the offended correspondence and the connecting chain.
  std::optional<Correspondence> witness_corr;
  std::vector<EventId> witness_chain;

  std::string to_string() const {
    std::string s{error_kind_name(kind)};
    if (!message.empty()) s += ": " + message;
    if (witness_corr) {
      s += " [correspondence " + witness_corr->text();
      if (!witness_chain.empty()) {
        s += ", chain";
        for (const auto& e : witness_chain) s += " " + e.token;
      }
      s += "]";
    }
    return s;
  }
};

inline Error make_error(ErrorKind k, std::string msg) {
  return Error{k, std::move(msg), std::nullopt, {}};
}

template <class T>
class [[nodiscard]] Result {
 public:
  Result(T value) : v_(std::move(value)) {}
  Result(Error err) : v_(std::move(err)) {}

  bool ok() const { return std::holds_alternative<T>(v_); }
  explicit operator bool() const { return ok(); }

  T& value() & { return std::get<T>(v_); }
  const T& value() const& { return std::get<T>(v_); }
  T&& value() && { return std::get<T>(std::move(v_)); }

  const Error& error() const { return std::get<Error>(v_); }

  const T& operator*() const& { return value(); }
  const T* operator->() const { return &value(); }

 private:
  std::variant<T, Error> v_;
};

}  // namespace cdeduce
