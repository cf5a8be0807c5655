#include "core/model_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "core/error.hpp"

namespace beb {

using nlohmann::json;

namespace {

std::vector<double> read_row(const json& j, std::size_t m, const std::string& name) {
  if (!j.is_array()) throw Error(ErrorCode::kInvalidModel, name + ": expected an array");
  std::vector<double> row;
  row.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number()) throw Error(ErrorCode::kInvalidModel, name + ": non-numeric entry");
    row.push_back(v.get<double>());
  }
  check_row(row, m, name);
  return row;
}

std::string key_of(const SentenceSeq& ctx) {
  if (ctx.size() == 1) return std::to_string(ctx[0]);
  return std::to_string(ctx[0]) + "|" + std::to_string(ctx[1]);
}

SentenceLM read_component(const json& j, std::size_t m, const std::string& name) {
  if (!j.is_object()) throw Error(ErrorCode::kInvalidModel, name + ": expected an object");
  const std::string type = j.value("type", "");
  int order = 0;
  if (type == "categorical") {
    order = j.value("order", 0);
    if (order != 0) throw Error(ErrorCode::kInvalidModel, name + ": categorical needs order 0");
  } else if (type == "markov") {
    if (!j.contains("order") || !j["order"].is_number_integer()) {
      throw Error(ErrorCode::kInvalidModel, name + ": markov needs an integer order");
    }
    order = j["order"].get<int>();
    if (order != 1 && order != 2) {
      throw Error(ErrorCode::kInvalidModel, name + ": markov order must be 1 or 2");
    }
  } else {
    throw Error(ErrorCode::kInvalidModel, name + ".type: expected \"categorical\" or \"markov\"");
  }
  if (!j.contains("initial")) throw Error(ErrorCode::kInvalidModel, name + ".initial: missing");
  std::vector<std::vector<double>> rows;
  rows.push_back(read_row(j["initial"], m, name + ".initial"));
  if (order == 0) {
    if (j.contains("transitions") && !j["transitions"].empty()) {
      throw Error(ErrorCode::kInvalidModel, name + ".transitions: categorical has no transitions");
    }
    return SentenceLM::categorical(std::move(rows[0]));
  }
  const json empty = json::object();
  const json& tr = j.contains("transitions") ? j["transitions"] : empty;
  if (!tr.is_object()) throw Error(ErrorCode::kInvalidModel, name + ".transitions: expected object");
  const std::size_t states = state_count_for(order, m);
  for (std::size_t st = 1; st < states; ++st) {
    SentenceSeq ctx = st <= m ? SentenceSeq{static_cast<Sentence>(st - 1)}
                              : SentenceSeq{static_cast<Sentence>((st - 1 - m) / m),
                                            static_cast<Sentence>((st - 1 - m) % m)};
    const std::string key = key_of(ctx);
    const std::string row_name = name + ".transitions[\"" + key + "\"]";
    if (!tr.contains(key)) throw Error(ErrorCode::kInvalidModel, row_name + ": missing row");
    rows.push_back(read_row(tr[key], m, row_name));
  }
  if (tr.size() != states - 1) {
    throw Error(ErrorCode::kInvalidModel, name + ".transitions: unexpected state keys");
  }
  return SentenceLM::markov(order, std::move(rows));
}

json write_row(std::span<const double> row) { return json(std::vector<double>(row.begin(), row.end())); }

json write_component(const SentenceLM& c) {
  json j;
  j["type"] = c.order() == 0 ? "categorical" : "markov";
  j["order"] = c.order();
  j["initial"] = write_row(c.row_probs(0));
  json tr = json::object();
  for (std::size_t st = 1; st < c.state_count(); ++st) {
    tr[key_of(c.state_context(st))] = write_row(c.row_probs(st));
  }
  j["transitions"] = tr;
  return j;
}

}  // namespace

ModelBundle parse_model(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, std::string("model file is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::kInvalidModel, "model file: expected an object");
  if (!j.contains("vocab") || !j["vocab"].is_array()) {
    throw Error(ErrorCode::kInvalidModel, "vocab: expected an array of strings");
  }
  std::vector<std::string> symbols;
  for (const auto& v : j["vocab"]) {
    if (!v.is_string()) throw Error(ErrorCode::kInvalidModel, "vocab: expected strings");
    symbols.push_back(v.get<std::string>());
  }
  ModelBundle out;
  out.vocab = Vocabulary(std::move(symbols));
  const std::size_t m = out.vocab.size();

  if (!j.contains("behavior") || !j["behavior"].is_object()) {
    throw Error(ErrorCode::kInvalidModel, "behavior: expected an object");
  }
  std::vector<double> table(m, 0.0);
  std::vector<bool> seen(m, false);
  for (const auto& [sym, v] : j["behavior"].items()) {
    const auto idx = out.vocab.index_of(sym);
    if (!idx) throw Error(ErrorCode::kInvalidModel, "behavior[\"" + sym + "\"]: unknown symbol");
    if (!v.is_number()) throw Error(ErrorCode::kInvalidModel, "behavior[\"" + sym + "\"]: not a number");
    table[*idx] = v.get<double>();
    seen[*idx] = true;
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (!seen[i]) {
      throw Error(ErrorCode::kInvalidModel,
                  "behavior: no score for symbol \"" + out.vocab.symbol(static_cast<Sentence>(i)) + "\"");
    }
  }
  out.behavior = BehaviorScore(std::move(table));

  if (!j.contains("alpha") || !j["alpha"].is_number()) {
    throw Error(ErrorCode::kInvalidModel, "alpha: expected a number");
  }
  if (!j.contains("negative")) throw Error(ErrorCode::kInvalidModel, "negative: missing");
  if (!j.contains("positive")) throw Error(ErrorCode::kInvalidModel, "positive: missing");
  SentenceLM neg = read_component(j["negative"], m, "negative");
  SentenceLM pos = read_component(j["positive"], m, "positive");
  out.model = SentenceLM::mixture(j["alpha"].get<double>(), std::move(neg), std::move(pos));
  return out;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path);
}

ModelBundle load_model(const std::string& path) { return parse_model(read_text_file(path)); }

std::string dump_model(const ModelBundle& bundle) {
  json j = json::object();
  j["vocab"] = std::vector<std::string>(bundle.vocab.symbols().begin(), bundle.vocab.symbols().end());
  json beh = json::object();
  for (std::size_t i = 0; i < bundle.vocab.size(); ++i) {
    beh[bundle.vocab.symbol(static_cast<Sentence>(i))] = bundle.behavior[static_cast<Sentence>(i)];
  }
  j["behavior"] = beh;
  j["alpha"] = bundle.model.alpha();
  j["negative"] = write_component(bundle.model.negative());
  j["positive"] = write_component(bundle.model.positive());
  return j.dump(2) + "\n";
}

void save_model(const std::string& path, const ModelBundle& bundle) {
  write_text_file(path, dump_model(bundle));
}

}  // namespace beb
