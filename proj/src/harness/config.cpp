// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ebm/harness/config.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace ebm::harness {

using nlohmann::json;

namespace {

std::string join(const std::string& where, const std::string& key) {
  return where.empty() ? key : where + "." + key;
}

const char* type_name(const json& v) {
  if (v.is_number_integer()) return "integer";
  if (v.is_number()) return "number";
  return v.type_name();
}

json check_value(const json& def, const json& val, const std::string& where) {
  if (def.is_null()) {
    if (!val.is_string()) throw ConfigError(where + ": expected a string");
    return val;
  }
  if (def.is_object()) {
    if (!val.is_object()) throw ConfigError(where + ": expected an object");
    return merge_with_schema(def, val, where);
  }
  if (def.is_array()) {
    if (!val.is_array()) throw ConfigError(where + ": expected an array");
    if (!def.empty())
      for (std::size_t i = 0; i < val.size(); ++i)
        check_value(def[0], val[i], where + "[" + std::to_string(i) + "]");
    return val;
  }
  if (def.is_number_integer()) {
    if (!val.is_number_integer()) throw ConfigError(where + ": expected an integer, got " + type_name(val));
    if (val.get<std::int64_t>() < 0) throw ConfigError(where + ": expected a non-negative integer");
    return val;
  }
  if (def.is_number()) {
    if (!val.is_number()) throw ConfigError(where + ": expected a number, got " + type_name(val));
    return json(val.get<double>());
  }
  if (def.type() != val.type())
    throw ConfigError(where + ": expected " + std::string(type_name(def)) + ", got " + type_name(val));
  return val;
}

}  // namespace

json merge_with_schema(const json& schema, const json& user, const std::string& where) {
  if (!user.is_object()) throw ConfigError((where.empty() ? "config" : where) + ": expected an object");
  json out = schema;
  for (const auto& [key, val] : user.items()) {
    if (!schema.contains(key)) throw ConfigError("unknown key '" + join(where, key) + "'");
    out[key] = check_value(schema[key], val, join(where, key));
  }
  for (const auto& [key, def] : schema.items())
    if (def.is_null() && !user.contains(key)) throw ConfigError("missing required key '" + join(where, key) + "'");
  return out;
}

const json& ExperimentConfig::at(const std::string& dotted) const {
  const json* node = &values;
  std::size_t start = 0;
  while (true) {
    const auto dot = dotted.find('.', start);
    const auto key = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    node = &node->at(key);
    if (dot == std::string::npos) return *node;
    start = dot + 1;
  }
}

ExperimentConfig make_config(const std::string& command, const json& schema, const json& user) {
  ExperimentConfig cfg;
  cfg.command = command;
  cfg.values = merge_with_schema(schema, user);
  json hashed = cfg.values;
  hashed.erase("output_dir");
  hashed["command"] = command;
  cfg.hash = sha256_hex(hashed.dump()).substr(0, 16);
  cfg.seed = cfg.values.at("seed").get<std::uint64_t>();
  if (const char* env = std::getenv(kOutputDirEnv); env && *env)
    cfg.output_dir = env;
  else
    cfg.output_dir = cfg.values.at("output_dir").get<std::string>();
  return cfg;
}

ExperimentConfig load_config(const std::string& command, const json& schema,
                             const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config file " + file.string());
  json user;
  try {
    user = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(file.string() + ": " + e.what());
  }
  return make_config(command, schema, user);
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

std::string header_line(const ExperimentConfig& cfg) {
  return "# ebmlab " + std::string(kToolVersion) + " config=" + cfg.hash + " seed=" + std::to_string(cfg.seed);
}

OutputDir::OutputDir(const ExperimentConfig& cfg) : cfg_(cfg), dir_(cfg.output_dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir_.string() + ": " + ec.message());
}

void OutputDir::store(const std::string& name, const std::string& bytes) {
  const auto path = dir_ / name;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << bytes;
  if (!out) throw std::runtime_error("cannot write " + path.string());
  files_.push_back(name);
  hashes_.push_back(sha256_hex(bytes));
  sizes_.push_back(bytes.size());
}

void OutputDir::write_text(const std::string& name, const std::string& body) {
  store(name, header_line(cfg_) + "\n" + body);
}

void OutputDir::write_pgm(const std::string& name, const std::string& pgm) {
  const auto nl = pgm.find('\n');
  if (pgm.rfind("P2", 0) != 0 || nl == std::string::npos) throw std::runtime_error("write_pgm: not a plain PGM");
  store(name, pgm.substr(0, nl + 1) + header_line(cfg_) + "\n" + pgm.substr(nl + 1));
}

void OutputDir::write_json(const std::string& name, json doc) {
  doc["header"] = {{"tool", "ebmlab"}, {"version", kToolVersion}, {"config", cfg_.hash}, {"seed", cfg_.seed}};
  store(name, doc.dump(2) + "\n");
}

std::filesystem::path OutputDir::write_manifest() {
  json files = json::array();
  for (std::size_t i = 0; i < files_.size(); ++i)
    files.push_back({{"path", files_[i]}, {"bytes", sizes_[i]}, {"sha256", hashes_[i]}});
  json echo = cfg_.values;
  echo.erase("output_dir");
  json doc = {{"command", cfg_.command}, {"config", echo}, {"files", files}};
  doc["header"] = {{"tool", "ebmlab"}, {"version", kToolVersion}, {"config", cfg_.hash}, {"seed", cfg_.seed}};
  const auto path = dir_ / "manifest.json";
  std::ofstream out(path, std::ios::binary);
  out << doc.dump(2) << "\n";
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return path;
}

}  // namespace ebm::harness
