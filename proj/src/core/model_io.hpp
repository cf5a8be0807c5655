#pragma once

#include <string>
#include <string_view>

#include "core/behavior.hpp"
#include "core/lm.hpp"

namespace beb {

// A loaded model file: vocabulary, behavior table and the two-component mixture.
struct ModelBundle {
  Vocabulary vocab;
  BehaviorScore behavior;
  SentenceLM model;
};

ModelBundle parse_model(std::string_view json_text);
ModelBundle load_model(const std::string& path);

// Shortest round-trip decimal doubles, so a reload is bit-identical.
std::string dump_model(const ModelBundle& bundle);
void save_model(const std::string& path, const ModelBundle& bundle);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view text);

}  // namespace beb
