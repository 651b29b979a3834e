#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace adoptminer {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raw log stream could not be read past `offset`.
class StreamError : public Error {
 public:
  StreamError(std::size_t offset, const std::string& what)
      : Error("stream error at byte " + std::to_string(offset) + ": " + what), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class DuplicateCommitError : public Error {
 public:
  explicit DuplicateCommitError(const std::string& hash)
      : Error("duplicate commit " + hash), hash_(hash) {}
  const std::string& hash() const noexcept { return hash_; }

 private:
  std::string hash_;
};

class CycleError : public Error {
 public:
  explicit CycleError(const std::string& hash)
      : Error("parent cycle through commit " + hash), hash_(hash) {}
  const std::string& hash() const noexcept { return hash_; }

 private:
  std::string hash_;
};

class SequencingError : public Error {
 public:
  using Error::Error;
};

class StoreError : public Error {
 public:
  using Error::Error;
};

class DuplicateRepoError : public StoreError {
 public:
  explicit DuplicateRepoError(const std::string& repo)
      : StoreError("repository already stored: " + repo) {}
};

class FormatVersionError : public StoreError {
 public:
  using StoreError::StoreError;
};

class InvalidAdoptionError : public Error {
 public:
  using Error::Error;
};

class MissingParticipantError : public Error {
 public:
  explicit MissingParticipantError(const std::string& author)
      : Error("author missing from experience table: " + author), author_(author) {}
  const std::string& author() const noexcept { return author_; }

 private:
  std::string author_;
};

class SpecError : public Error {
 public:
  using Error::Error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace adoptminer
