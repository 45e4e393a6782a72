#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <string>
#include <vector>

#include "tabgraph/error.hpp"

namespace tabgraph {

struct MacroF1Result {
  double macro_f1 = 0.0;
  std::map<std::string, double> per_class_f1;  // classes present in gold only
};

// Unweighted mean of per-class F1. Classes absent from gold are excluded;
// a class never predicted scores F1 = 0.
template <typename Label>
MacroF1Result macro_f1(const std::vector<Label>& predictions, const std::vector<Label>& gold) {
  if (predictions.size() != gold.size())
    throw Error(Errc::alignment_error, "prediction/gold length mismatch");
  if (gold.empty()) throw Error(Errc::alignment_error, "empty evaluation set");

  auto to_key = [](const Label& l) {
    if constexpr (std::is_same_v<Label, std::string>) return l;
    else return std::to_string(l);
  };

  std::map<std::string, int> tp, fp, fn;
  std::vector<std::string> classes;
  for (const Label& g : gold) {
    std::string k = to_key(g);
    if (!tp.count(k)) {
      tp[k] = fp[k] = fn[k] = 0;
      classes.push_back(k);
    }
  }
  std::sort(classes.begin(), classes.end());
  for (std::size_t i = 0; i < gold.size(); ++i) {
    std::string g = to_key(gold[i]);
    std::string p = to_key(predictions[i]);
    if (p == g) {
      ++tp[g];
    } else {
      ++fn[g];
      if (tp.count(p)) ++fp[p];  // predicted-only classes are not scored
    }
  }

  MacroF1Result res;
  double sum = 0.0;
  for (const std::string& c : classes) {
    double precision = (tp[c] + fp[c]) > 0 ? static_cast<double>(tp[c]) / (tp[c] + fp[c]) : 0.0;
    double recall = (tp[c] + fn[c]) > 0 ? static_cast<double>(tp[c]) / (tp[c] + fn[c]) : 0.0;
    double f1 = (precision + recall) > 0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    res.per_class_f1[c] = f1;
    sum += f1;
  }
  res.macro_f1 = sum / static_cast<double>(classes.size());
  return res;
}

// Answer normalization used for QA exact match: lowercase, strip surrounding
// whitespace and trailing punctuation.
inline std::string normalize_answer(std::string_view s) {
  std::size_t begin = 0, end = s.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
  static const std::string punct = ".,;:!?";
  while (end > begin && punct.find(s[end - 1]) != std::string::npos) --end;
  while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
  std::string out(s.substr(begin, end - begin));
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline bool answers_match(std::string_view predicted, std::string_view gold) {
  return normalize_answer(predicted) == normalize_answer(gold);
}

inline double exact_match_rate(const std::vector<std::string>& predictions,
                               const std::vector<std::string>& gold) {
  if (predictions.size() != gold.size())
    throw Error(Errc::alignment_error, "prediction/gold length mismatch");
  if (gold.empty()) throw Error(Errc::alignment_error, "empty evaluation set");
  int hits = 0;
  for (std::size_t i = 0; i < gold.size(); ++i)
    if (answers_match(predictions[i], gold[i])) ++hits;
  return static_cast<double>(hits) / static_cast<double>(gold.size());
}

}  // namespace tabgraph
