#ifndef BYTESING_PIPELINE_PREPARE_H_
#define BYTESING_PIPELINE_PREPARE_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "bytesing/common/matrix.h"
#include "bytesing/frontend/features.h"
#include "bytesing/frontend/score.h"
#include "bytesing/pipeline/toy_corpus.h"

namespace bytesing::pipeline {

inline constexpr const char* kStatusOk = "ok";
inline constexpr const char* kStatusFlagged = "flagged";

struct ManifestRow {
  std::string id;
  std::string song;
  long start_sample = 0;
  long num_samples = 0;
  int num_phonemes = 0;
  int label_frames = 0;  // sum of phoneme frames after truncation
  int mel_frames = 0;    // frames of the extracted mel before truncation
  std::string status = kStatusOk;
  bool operator==(const ManifestRow&) const = default;
};

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestRow>& rows);
std::vector<ManifestRow> read_manifest(const std::filesystem::path& path);

std::string utterance_to_json(const frontend::UtteranceScore& utt);
frontend::UtteranceScore utterance_from_json(const std::string& text);

// Segments `score` and fills allocated_frames / allocated_sec of every
// phoneme from the song's labels. Frame boundaries are rounded relative to
// the utterance start so frames sum to the rounded span. Throws
// ValidationError when labels and phonemes disagree.
std::vector<frontend::UtteranceScore> label_utterances(const frontend::MusicScore& score,
                                                       const std::vector<LabelSpan>& labels,
                                                       double rest_threshold_sec,
                                                       const std::string& id_prefix);

struct PrepareReport {
  std::vector<ManifestRow> rows;
  std::vector<std::string> failures;  // one human-readable line each
};

// Reads <song>.xml/.wav/.lab triples from `corpus_dir` and writes features
// under `work_dir`/features, `work_dir`/manifest.tsv and
// `work_dir`/prepare_failures.txt. Incomplete triples and utterances whose
// labels disagree with the score are reported and skipped; utterances whose
// mel and label frame counts differ by 2 or more are kept but flagged.
PrepareReport prepare_corpus(const std::filesystem::path& corpus_dir,
                             const std::filesystem::path& work_dir,
                             double rest_threshold_sec);

// Everything one utterance contributes to training.
struct PreparedUtterance {
  ManifestRow row;
  frontend::UtteranceScore score;  // with label frames
  frontend::AcousticInput input;
  Matrix mel;
  std::vector<std::int16_t> pcm;
};

PreparedUtterance load_prepared(const std::filesystem::path& work_dir, const ManifestRow& row);
// All manifest rows with status ok.
std::vector<PreparedUtterance> load_prepared_corpus(const std::filesystem::path& work_dir);

}  // namespace bytesing::pipeline

#endif  // BYTESING_PIPELINE_PREPARE_H_
