#ifndef BYTESING_TESTS_SUPPORT_PIPELINE_FIXTURE_H_
#define BYTESING_TESTS_SUPPORT_PIPELINE_FIXTURE_H_

#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "bytesing/common/config.h"
#include "bytesing/frontend/lexicon.h"
#include "bytesing/frontend/musicxml.h"
#include "bytesing/frontend/pitch.h"

namespace bytesing::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("bytesing_" + tag + "_" + std::to_string(rd()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// Tiny models and a two-song corpus; every stage trains in well under a second.
inline KeyValueConfig tiny_pipeline_config(const std::filesystem::path& root) {
  KeyValueConfig c = KeyValueConfig::parse(R"(
toy.num_songs = 2
toy.notes_per_song = 4
duration.num_layers = 1
duration.hidden_size = 4
duration.max_epochs = 3
duration.batch_size = 2
acoustic.ph_embed_dim = 4
acoustic.pi_embed_dim = 4
acoustic.prenet_kernels = 3
acoustic.prenet_channels = 4
acoustic.cbhg_bank_size = 2
acoustic.cbhg_bank_channels = 4
acoustic.cbhg_highway_layers = 1
acoustic.cbhg_highway_size = 4
acoustic.cbhg_gru_size = 4
acoustic.num_mixtures = 2
acoustic.decoder_prenet = 8
acoustic.attention_rnn_size = 8
acoustic.decoder_rnn_size = 8
acoustic.postnet_layers = 1
acoustic.postnet_channels = 4
acoustic.max_epochs = 1
acoustic.batch_size = 4
vocoder.gru_size = 8
vocoder.num_conv_blocks = 1
vocoder.condition_channels = 4
vocoder.head_size = 8
vocoder.coarse_embed_dim = 2
vocoder.batch_size = 2
vocoder.window_frames = 1
vocoder.train_steps = 3
)");
  c.set("paths.corpus", (root / "corpus").string());
  c.set("paths.workdir", (root / "work").string());
  return c;
}

// (midi or kRestMidi, quarter beats, lyric) -> parsed score.
inline frontend::MusicScore make_score(double tempo,
                                       const std::vector<std::tuple<int, double, std::string>>& notes) {
  frontend::MusicScore s;
  s.title = "test";
  s.tempo_bpm = tempo;
  for (const auto& [midi, beats, lyric] : notes) {
    frontend::NoteEvent n;
    n.is_rest = midi == frontend::kRestMidi;
    n.midi_number = midi;
    n.pitch_name = n.is_rest ? std::string(frontend::kRestName) : frontend::pitch_name(midi);
    n.beats = frontend::Beats{static_cast<std::int64_t>(beats * 16 + 0.5), 16};
    n.duration_sec = frontend::seconds_from_beats(n.beats, tempo);
    n.lyric = lyric;
    s.notes.push_back(n);
  }
  return frontend::parse_musicxml(frontend::write_musicxml(s), frontend::Lexicon::builtin());
}

}  // namespace bytesing::testing

#endif  // BYTESING_TESTS_SUPPORT_PIPELINE_FIXTURE_H_
