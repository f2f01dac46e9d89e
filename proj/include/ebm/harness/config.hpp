// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace ebm::harness {

inline constexpr const char* kToolVersion = "0.1.0";
// Overrides the configured output directory when set.
inline constexpr const char* kOutputDirEnv = "EBMLAB_OUTPUT_DIR";

// Bad input: unknown keys, wrong types, missing required values. Exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Config files are JSON objects. A schema is a JSON object of defaults: every
// key the user may set appears in it, and the default fixes the type. Integer
// defaults accept only non-negative integers; floating defaults accept any number; arrays
// are checked element-wise against the first default element; objects
// recurse. A null default marks a required string.
struct ExperimentConfig {
  std::string command;
  nlohmann::json values;  // schema defaults merged with the file
  std::string hash;       // 16 hex digits over everything except output_dir
  std::uint64_t seed = 0;
  std::filesystem::path output_dir;

  const nlohmann::json& at(const std::string& dotted) const;
};

// Validates `user` against `schema` and fills defaults. `where` prefixes
// error messages.
nlohmann::json merge_with_schema(const nlohmann::json& schema, const nlohmann::json& user,
                                 const std::string& where = "");

ExperimentConfig make_config(const std::string& command, const nlohmann::json& schema,
                             const nlohmann::json& user);
ExperimentConfig load_config(const std::string& command, const nlohmann::json& schema,
                             const std::filesystem::path& file);

// Hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

// "# ebmlab <version> config=<hash> seed=<seed>"
std::string header_line(const ExperimentConfig& cfg);

// Files written by one run, each stamped with the header, plus manifest.json
// listing every file with its size and SHA-256.
class OutputDir {
 public:
  explicit OutputDir(const ExperimentConfig& cfg);

  const std::filesystem::path& path() const { return dir_; }
  // Text output (CSV, reports): the header line, then `body`.
  void write_text(const std::string& name, const std::string& body);
  // Plain PGM: the header goes in a comment line after the magic number.
  void write_pgm(const std::string& name, const std::string& pgm);
  // JSON output: the header is stored under "header".
  void write_json(const std::string& name, nlohmann::json doc);
  // Writes manifest.json (config echo plus file list) and returns its path.
  std::filesystem::path write_manifest();

  const std::vector<std::string>& files() const { return files_; }

 private:
  void store(const std::string& name, const std::string& bytes);

  const ExperimentConfig& cfg_;
  std::filesystem::path dir_;
  std::vector<std::string> files_;
  std::vector<std::string> hashes_;
  std::vector<std::size_t> sizes_;
};

}  // namespace ebm::harness
