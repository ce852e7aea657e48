#pragma once

// Dataset manifest: one CSV row per utterance with a required header.
// Canonical columns are path, speaker_id, gender, emotion, sentence_id,
// session, split; unknown columns are ignored on read. Rows whose split
// is neither "train" nor "test" are carried but skipped by consumers.

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace emorec {

struct ManifestRow {
  std::string path;
  std::string speaker_id;
  std::string gender;   // "female" | "male"
  std::string emotion;
  std::string sentence_id;
  std::string session;
  std::string split;    // "train" | "test" | other (ignored downstream)
};

struct DatasetManifest {
  std::vector<ManifestRow> rows;

  std::vector<ManifestRow> select(const std::string& split) const {
    std::vector<ManifestRow> out;
    for (const auto& r : rows)
      if (r.split == split) out.push_back(r);
    return out;
  }

  std::size_t count(const std::string& split, const std::string& gender = "",
                    const std::string& emotion = "") const {
    std::size_t c = 0;
    for (const auto& r : rows)
      if (r.split == split && (gender.empty() || r.gender == gender) &&
          (emotion.empty() || r.emotion == emotion))
        ++c;
    return c;
  }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace detail

inline DatasetManifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_manifest: cannot open: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("read_manifest: empty file: " + path);
  const auto header = detail::split_csv_line(line);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* required :
       {"path", "speaker_id", "gender", "emotion", "sentence_id", "session", "split"})
    if (!col.count(required))
      throw std::runtime_error(std::string("read_manifest: missing required column '") + required +
                               "' in " + path);

  DatasetManifest manifest;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() < header.size())
      throw std::runtime_error("read_manifest: short row at line " + std::to_string(line_no));
    ManifestRow r;
    r.path = cells[col["path"]];
    r.speaker_id = cells[col["speaker_id"]];
    r.gender = cells[col["gender"]];
    r.emotion = cells[col["emotion"]];
    r.sentence_id = cells[col["sentence_id"]];
    r.session = cells[col["session"]];
    r.split = cells[col["split"]];
    manifest.rows.push_back(std::move(r));
  }
  return manifest;
}

inline void write_manifest(const std::string& path, const DatasetManifest& manifest) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_manifest: cannot open for writing: " + path);
  out << "path,speaker_id,gender,emotion,sentence_id,session,split\n";
  for (const auto& r : manifest.rows)
    out << r.path << "," << r.speaker_id << "," << r.gender << "," << r.emotion << ","
        << r.sentence_id << "," << r.session << "," << r.split << "\n";
  if (!out) throw std::runtime_error("write_manifest: write failed: " + path);
}

struct SplitValidation {
  bool ok = true;
  std::string message;
};

// Speaker-independent, text-independent protocol: the train and test
// splits must be disjoint in both speakers and sentences.
inline SplitValidation validate_split_disjoint(const DatasetManifest& manifest) {
  std::set<std::string> train_speakers, test_speakers, train_sentences, test_sentences;
  for (const auto& r : manifest.rows) {
    if (r.split == "train") {
      train_speakers.insert(r.speaker_id);
      train_sentences.insert(r.sentence_id);
    } else if (r.split == "test") {
      test_speakers.insert(r.speaker_id);
      test_sentences.insert(r.sentence_id);
    }
  }
  std::vector<std::string> speaker_overlap, sentence_overlap;
  std::set_intersection(train_speakers.begin(), train_speakers.end(), test_speakers.begin(),
                        test_speakers.end(), std::back_inserter(speaker_overlap));
  std::set_intersection(train_sentences.begin(), train_sentences.end(), test_sentences.begin(),
                        test_sentences.end(), std::back_inserter(sentence_overlap));
  SplitValidation v;
  if (!speaker_overlap.empty()) {
    v.ok = false;
    v.message += "speakers in both splits:";
    for (const auto& s : speaker_overlap) v.message += " " + s;
  }
  if (!sentence_overlap.empty()) {
    v.ok = false;
    if (!v.message.empty()) v.message += "; ";
    v.message += "sentences in both splits:";
    for (const auto& s : sentence_overlap) v.message += " " + s;
  }
  return v;
}

}  // namespace emorec
