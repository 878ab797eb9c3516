#pragma once

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <map>
#include <optional>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "scuba/analyzer.hpp"
#include "scuba/lowering.hpp"
#include "scuba/parser.hpp"

namespace scuba::test {

inline std::string corpus_path(const std::string& rel) {
  return std::string(SCUBA_CORPUS_DIR) + "/" + rel;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::vector<std::string> corpus_files() {
  std::vector<std::string> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(SCUBA_CORPUS_DIR))
    if (e.path().extension() == ".mcu")
      out.push_back(e.path().string());
  std::sort(out.begin(), out.end());
  return out;
}

inline std::string param_name(const ::testing::TestParamInfo<std::string>& info) {
  std::string rel = info.param.substr(std::string(SCUBA_CORPUS_DIR).size() + 1);
  for (auto& c : rel)
    if (!std::isalnum(static_cast<unsigned char>(c)))
      c = '_';
  return rel;
}

struct Program {
  Ast ast;
  IrModule module;

  explicit Program(const std::string& source, const std::string& file = "t.mcu")
      : ast(parse_source(source, file)), module(lower(ast)) {}
};

inline AnalysisResult analyze_text(const std::string& source, AnalysisOptions options = {}) {
  return analyze_source(source, "t.mcu", options);
}

inline std::vector<std::string> kinds(const AnalysisResult& r) {
  std::vector<std::string> out;
  for (const auto& d : r.diagnostics)
    out.push_back(diagnostic_kind_name(d.kind));
  return out;
}

/// Evaluates a tree with Unknowns and loop variables looked up by source name
/// and builtins by short name (TidX, ...). Empty on a missing name or a divisor below 1.
inline std::optional<std::int64_t> eval_named(const Et& e, const std::map<std::string, std::int64_t>& env) {
  auto lookup = [&](const std::string& n) -> std::optional<std::int64_t> {
    auto it = env.find(n);
    if (it == env.end())
      return std::nullopt;
    return it->second;
  };
  switch (e.kind) {
  case EtKind::Const: return e.value;
  case EtKind::Unknown:
  case EtKind::LoopVar: return lookup(e.name);
  case EtKind::Builtin: return lookup(builtin_short_name(e.builtin));
  case EtKind::BinOp: {
    auto l = eval_named(*e.lhs, env), r = eval_named(*e.rhs, env);
    if (!l || !r)
      return std::nullopt;
    switch (e.op) {
    case BinaryOp::Add: return *l + *r;
    case BinaryOp::Sub: return *l - *r;
    case BinaryOp::Mul: return *l * *r;
    case BinaryOp::Div: return *r < 1 ? std::nullopt : std::optional<std::int64_t>(*l / *r);
    case BinaryOp::Mod: return *r < 1 ? std::nullopt : std::optional<std::int64_t>(*l % *r);
    }
  }
  }
  return std::nullopt;
}

} // namespace scuba::test
