#include "bytesing/pipeline/toy_corpus.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include <spdlog/fmt/fmt.h>

#include "bytesing/common/audio_params.h"
#include "bytesing/common/error.h"
#include "bytesing/common/wav.h"
#include "bytesing/frontend/lexicon.h"
#include "bytesing/frontend/musicxml.h"
#include "bytesing/frontend/pitch.h"

namespace bytesing::pipeline {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

const std::vector<std::string>& toy_lyrics() {
  static const std::vector<std::string> lyrics = {
      "ba1",   "ma3",  "la4",   "da2",  "pa1",    "ta4",  "ka3",   "ga1",   "na2",
      "sha1",  "si4",  "xi1",   "hu2",  "fei1",   "zhong1", "chang4", "qing1", "jing1",
      "yue4",  "ni3",  "wo3",   "ai4",  "ge1",    "he2",  "li3",   "mei3",  "hua1",
      "shui3", "yun2", "feng1", "yu3",  "tian1",  "yi1",  "shan3", "liang4", "man3",
      "ren2",  "xin1", "lu4",   "ri4",  "zi4",    "ci2",  "zhi1",  "chi1",  "shi2",
      "an1",   "ou3",  "e2",    "wen4", "bo1",    "duo3", "guo2",  "kou3",  "tou2",
      "mu4",   "zou3", "cong2"};
  return lyrics;
}

// Note lengths in quarter beats; all multiples of a sixteenth.
constexpr double kNoteBeats[] = {0.5, 1.0, 1.0, 1.0, 1.5, 2.0};

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

bool is_voiced_initial(std::string_view ph) {
  return ph == "m" || ph == "n" || ph == "l" || ph == "r";
}

// Spectral envelope: a floor plus three resonance bumps.
double envelope(double f, const std::array<double, 3>& formants) {
  constexpr double kGain[] = {1.0, 0.6, 0.3};
  constexpr double kWidth[] = {90.0, 120.0, 180.0};
  double e = 0.02;
  for (int i = 0; i < 3; ++i) {
    const double x = (f - formants[static_cast<std::size_t>(i)]) / kWidth[i];
    e += kGain[i] / (1.0 + x * x);
  }
  return e;
}

// Harmonic source with continuous phase. Harmonic amplitudes follow the
// formant envelope at the note's base pitch over a 1/k^2 source tilt and
// are normalised to `rms`.
void render_voiced(std::vector<double>& out, long start, long end, long note_start,
                   double note_sec, double f0, const std::array<double, 3>& formants,
                   double rms, double& phase, const ToyCorpusSpec& spec) {
  const int harmonics = std::max(1, static_cast<int>(10000.0 / f0));
  std::vector<double> amp(static_cast<std::size_t>(harmonics));
  double power = 0.0;
  for (int k = 1; k <= harmonics; ++k) {
    const double a = envelope(k * f0, formants) / (static_cast<double>(k) * k);
    amp[static_cast<std::size_t>(k - 1)] = a;
    power += 0.5 * a * a;
  }
  const double gain = rms / std::sqrt(power);
  for (long n = start; n < end; ++n) {
    const double t = static_cast<double>(n - note_start) / kSampleRate;
    double v = 0.0;
    for (int k = 1; k <= harmonics; ++k) v += amp[static_cast<std::size_t>(k - 1)] * std::sin(k * phase);
    out[static_cast<std::size_t>(n)] += gain * v;
    phase += kTwoPi * toy_vibrato_hz(f0, t, note_sec, spec) / kSampleRate;
    if (phase > kTwoPi * 1e6) phase = std::fmod(phase, kTwoPi);
  }
}

// Filtered noise with a consonant-dependent colour and envelope.
void render_noise(std::vector<double>& out, long start, long end, std::string_view ph,
                  std::mt19937_64& rng) {
  const bool stop = ph == "b" || ph == "d" || ph == "g";
  const bool aspirated = ph == "p" || ph == "t" || ph == "k";
  const bool soft = ph == "f" || ph == "h";
  const bool hiss = ph == "s" || ph == "x" || ph == "c" || ph == "z" || ph == "q" || ph == "j";
  double prev = 0.0;
  double prev2 = 0.0;
  double low = 0.0;
  const double len = static_cast<double>(end - start);
  for (long n = start; n < end; ++n) {
    const double w = 2.0 * uniform01(rng) - 1.0;
    double v;
    if (hiss) {
      v = 0.5 * (w - 2.0 * prev + prev2);
    } else if (soft) {
      low = 0.6 * low + 0.4 * w;
      v = low;
    } else {
      v = 0.7 * (w - prev);
    }
    prev2 = prev;
    prev = w;
    const double pos = static_cast<double>(n - start) / len;
    double env = 1.0;
    if (stop) env = std::exp(-pos * 12.0);
    if (aspirated) env = std::exp(-pos * 3.0);
    const double fade = std::min(1.0, std::min(pos, 1.0 - pos) * 10.0);
    out[static_cast<std::size_t>(n)] += (soft ? 0.05 : 0.08) * env * fade * v;
  }
}

// Raised-cosine fades of `width` samples at both ends of [start, end).
void fade_edges(std::vector<double>& out, long start, long end, long width) {
  width = std::min(width, (end - start) / 2);
  for (long i = 0; i < width; ++i) {
    const double g = 0.5 - 0.5 * std::cos(std::numbers::pi * (i + 0.5) / width);
    out[static_cast<std::size_t>(start + i)] *= g;
    out[static_cast<std::size_t>(end - 1 - i)] *= g;
  }
}

frontend::NoteEvent make_note(int midi, double beats, double tempo, std::string lyric) {
  frontend::NoteEvent n;
  n.is_rest = midi == frontend::kRestMidi;
  n.pitch_name = n.is_rest ? std::string(frontend::kRestName) : frontend::pitch_name(midi);
  n.midi_number = midi;
  n.beats = frontend::Beats{static_cast<std::int64_t>(std::lround(beats * 16)), 16};
  const std::int64_t g = std::gcd(n.beats.num, n.beats.den);
  n.beats.num /= g;
  n.beats.den /= g;
  n.duration_sec = frontend::seconds_from_beats(n.beats, tempo);
  n.lyric = std::move(lyric);
  return n;
}

}  // namespace

ToyCorpusSpec ToyCorpusSpec::from_config(const KeyValueConfig& cfg) {
  ToyCorpusSpec s;
  s.num_songs = cfg.get_int("toy.num_songs", s.num_songs);
  s.notes_per_song = cfg.get_int("toy.notes_per_song", s.notes_per_song);
  s.tempos = cfg.get_int_list("toy.tempos", s.tempos);
  s.min_midi = cfg.get_int("toy.min_midi", s.min_midi);
  s.max_midi = cfg.get_int("toy.max_midi", s.max_midi);
  s.vibrato_cents = cfg.get_double("toy.vibrato_cents", s.vibrato_cents);
  s.vibrato_hz = cfg.get_double("toy.vibrato_hz", s.vibrato_hz);
  s.seed = static_cast<std::uint64_t>(cfg.get_int("toy.seed", static_cast<int>(s.seed)));
  s.validate();
  return s;
}

KeyValueConfig ToyCorpusSpec::to_config() const {
  KeyValueConfig c;
  c.set("toy.num_songs", std::to_string(num_songs));
  c.set("toy.notes_per_song", std::to_string(notes_per_song));
  c.set("toy.tempos", join_ints(tempos));
  c.set("toy.min_midi", std::to_string(min_midi));
  c.set("toy.max_midi", std::to_string(max_midi));
  c.set("toy.vibrato_cents", fmt::format("{}", vibrato_cents));
  c.set("toy.vibrato_hz", fmt::format("{}", vibrato_hz));
  c.set("toy.seed", std::to_string(seed));
  return c;
}

void ToyCorpusSpec::validate() const {
  if (num_songs < 1) throw ConfigError("toy.num_songs must be >= 1");
  if (notes_per_song < 2) throw ConfigError("toy.notes_per_song must be >= 2");
  if (tempos.empty()) throw ConfigError("toy.tempos is empty");
  for (int t : tempos) {
    // A sixteenth note must span whole hops.
    if (t <= 0 || (15L * kSampleRate) % (static_cast<long>(t) * kHopSamples) != 0) {
      throw ConfigError("toy tempo " + std::to_string(t) +
                        " does not put sixteenth notes on the hop grid");
    }
  }
  if (min_midi < frontend::kMinMidi || max_midi > frontend::kMaxMidi || min_midi > max_midi) {
    throw ConfigError("toy pitch range is invalid");
  }
  if (vibrato_cents < 0.0 || vibrato_hz < 0.0) throw ConfigError("toy vibrato must be >= 0");
}

void write_labels(const std::filesystem::path& path, const std::vector<LabelSpan>& labels) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  for (const auto& l : labels) out << l.start << '\t' << l.end << '\t' << l.ph << '\n';
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::vector<LabelSpan> read_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::vector<LabelSpan> labels;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    LabelSpan l;
    if (!(fields >> l.start >> l.end >> l.ph) || l.end <= l.start ||
        (!labels.empty() && l.start != labels.back().end)) {
      throw ParseError(path.string() + ": bad label line", line_no);
    }
    labels.push_back(std::move(l));
  }
  return labels;
}

int toy_initial_frames(std::string_view initial) {
  if (initial == "b" || initial == "d" || initial == "g") return 3;
  if (initial == "p" || initial == "t" || initial == "k") return 6;
  if (is_voiced_initial(initial)) return 5;
  if (initial == "f" || initial == "h") return 7;
  if (initial == "s" || initial == "x" || initial == "sh") return 9;
  if (initial == "z" || initial == "zh" || initial == "j") return 6;
  return 8;  // c, ch, q
}

std::array<double, 3> toy_formants(std::string_view ph) {
  if (is_voiced_initial(ph)) return {250.0, 1200.0, 2500.0};
  if (ph == "ii") return {350.0, 1400.0, 2600.0};
  if (ph == "iii") return {350.0, 1600.0, 2000.0};
  if (ph.find('a') != std::string_view::npos) return {750.0, 1250.0, 2600.0};
  if (ph.find('o') != std::string_view::npos) return {500.0, 900.0, 2500.0};
  if (ph == "ei") return {450.0, 1900.0, 2600.0};
  if (ph == "ve") return {400.0, 1800.0, 2500.0};
  if (ph.find('e') != std::string_view::npos) return {500.0, 1400.0, 2500.0};
  if (ph.find('v') != std::string_view::npos) return {300.0, 1900.0, 2400.0};
  if (ph.find('i') != std::string_view::npos) return {300.0, 2300.0, 3000.0};
  return {320.0, 800.0, 2300.0};  // u
}

double toy_vibrato_rate(double note_sec, const ToyCorpusSpec& spec) {
  const double cycles = std::max(1.0, std::round(spec.vibrato_hz * note_sec));
  return cycles / note_sec;
}

double toy_vibrato_hz(double f0, double t, double note_sec, const ToyCorpusSpec& spec) {
  const double rate = toy_vibrato_rate(note_sec, spec);
  return f0 * std::pow(2.0, spec.vibrato_cents / 1200.0 * std::sin(kTwoPi * rate * t));
}

ToySong generate_toy_song(const ToyCorpusSpec& spec, int index) {
  spec.validate();
  std::mt19937_64 rng(spec.seed * 1000003ULL + static_cast<std::uint64_t>(index));
  const double tempo = spec.tempos[rng() % spec.tempos.size()];
  const auto& lyrics = toy_lyrics();

  frontend::MusicScore score;
  score.title = "toy song " + std::to_string(index);
  score.tempo_bpm = tempo;
  score.notes.push_back(make_note(frontend::kRestMidi, 0.5, tempo, ""));
  const int split = spec.notes_per_song / 2;
  const int short_rest_at =
      spec.notes_per_song - split >= 3 && uniform01(rng) < 0.5
          ? uniform_int(rng, split + 1, spec.notes_per_song - 1)
          : -1;
  int midi = uniform_int(rng, spec.min_midi, spec.max_midi);
  for (int i = 0; i < spec.notes_per_song; ++i) {
    if (i == split) score.notes.push_back(make_note(frontend::kRestMidi, 2.0, tempo, ""));
    if (i == short_rest_at) score.notes.push_back(make_note(frontend::kRestMidi, 0.25, tempo, ""));
    midi = std::clamp(midi + uniform_int(rng, -4, 4), spec.min_midi, spec.max_midi);
    const double beats = kNoteBeats[rng() % std::size(kNoteBeats)];
    score.notes.push_back(make_note(midi, beats, tempo, lyrics[rng() % lyrics.size()]));
  }
  score.notes.push_back(make_note(frontend::kRestMidi, 0.5, tempo, ""));

  ToySong song;
  char name[32];
  std::snprintf(name, sizeof(name), "song%02d", index);
  song.name = name;
  song.musicxml = frontend::write_musicxml(score);
  // Re-read so the syllables come from the same parser the pipeline uses.
  song.score = frontend::parse_musicxml(song.musicxml, frontend::Lexicon::builtin());

  long total = 0;
  for (const auto& n : song.score.notes) total += std::lround(n.duration_sec * kSampleRate);
  song.audio.assign(static_cast<std::size_t>(total), 0.0);

  double phase = 0.0;
  long cursor = 0;
  std::size_t next_syllable = 0;
  for (const auto& note : song.score.notes) {
    const long len = std::lround(note.duration_sec * kSampleRate);
    const long note_start = cursor;
    const long note_end = cursor + len;
    cursor = note_end;
    if (note.is_rest) {
      song.labels.push_back(LabelSpan{note_start, note_end, std::string(frontend::kRest)});
      continue;
    }
    const auto& syl = song.score.syllables.at(next_syllable++);
    const double f0 = frontend::midi_to_hz(note.midi_number);
    const long note_frames = len / kHopSamples;
    long boundary = note_start;
    if (syl.phonemes.size() == 2) {
      const std::string& initial = syl.phonemes[0].ph;
      const long frames = std::clamp<long>(toy_initial_frames(initial), 1, note_frames / 2);
      boundary = note_start + frames * kHopSamples;
      song.labels.push_back(LabelSpan{note_start, boundary, initial});
      if (is_voiced_initial(initial)) {
        render_voiced(song.audio, note_start, boundary, note_start, note.duration_sec, f0,
                      toy_formants(initial), 0.08, phase, spec);
      } else {
        render_noise(song.audio, note_start, boundary, initial, rng);
      }
    }
    const std::string& final_ph = syl.phonemes.back().ph;
    song.labels.push_back(LabelSpan{boundary, note_end, final_ph});
    render_voiced(song.audio, boundary, note_end, note_start, note.duration_sec, f0,
                  toy_formants(final_ph), 0.15, phase, spec);
    fade_edges(song.audio, note_start, note_end, 120);
  }
  return song;
}

std::vector<std::string> write_toy_corpus(const ToyCorpusSpec& spec,
                                          const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> names;
  for (int i = 0; i < spec.num_songs; ++i) {
    const ToySong song = generate_toy_song(spec, i);
    {
      std::ofstream xml(dir / (song.name + ".xml"));
      if (!xml) throw IoError("cannot write '" + (dir / (song.name + ".xml")).string() + "'");
      xml << song.musicxml;
    }
    write_wav(dir / (song.name + ".wav"), Waveform{kSampleRate, song.audio});
    write_labels(dir / (song.name + ".lab"), song.labels);
    names.push_back(song.name);
  }
  return names;
}

}  // namespace bytesing::pipeline
