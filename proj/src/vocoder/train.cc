#include "bytesing/vocoder/train.h"

#include <algorithm>
#include <cmath>

#include <spdlog/spdlog.h>

#include "bytesing/common/error.h"
#include "bytesing/nn/optimizer.h"

namespace bytesing::vocoder {

using nn::Tape;
using nn::Var;

VocoderExample make_example(std::string id, const Matrix& mel,
                            const std::vector<std::int16_t>& pcm, int hop) {
  const auto audio_frames = static_cast<Index>((pcm.size() + hop - 1) / hop);
  if (std::abs(audio_frames - mel.rows()) > 1) {
    throw ValidationError("'" + id + "': " + std::to_string(mel.rows()) + " mel frames vs " +
                          std::to_string(audio_frames) + " audio frames");
  }
  const Index frames = std::min(audio_frames, mel.rows());
  if (frames < 1) throw ValidationError("'" + id + "' is empty");
  VocoderExample ex{std::move(id), mel.topRows(frames), pcm};
  ex.pcm.resize(static_cast<std::size_t>(frames * hop), 0);
  return ex;
}

std::vector<Window> tile_windows(const std::vector<VocoderExample>& data, int frames) {
  std::vector<Window> out;
  for (std::size_t e = 0; e < data.size(); ++e) {
    const auto total = static_cast<int>(data[e].mel.rows());
    for (int s = 0; s + frames <= total; s += frames) out.push_back(Window{e, s, frames});
  }
  return out;
}

std::vector<Window> sample_windows(const std::vector<VocoderExample>& data, int count,
                                   int frames, nn::Rng& rng) {
  std::vector<double> weights;
  for (const auto& ex : data) {
    weights.push_back(std::max(0.0, static_cast<double>(ex.mel.rows() - frames + 1)));
  }
  double total = 0.0;
  for (double w : weights) total += w;
  if (total <= 0.0) {
    throw ValidationError("no clip is as long as a " + std::to_string(frames) +
                          "-frame training window");
  }
  std::vector<Window> out;
  for (int i = 0; i < count; ++i) {
    double u = static_cast<double>(rng() >> 11) * 0x1.0p-53 * total;
    std::size_t e = 0;
    while (e + 1 < weights.size() && u >= weights[e]) u -= weights[e++];
    const auto span = static_cast<std::uint64_t>(weights[e]);
    out.push_back(Window{e, static_cast<int>(rng() % span), frames});
  }
  return out;
}

Var window_loss(Tape& tape, const WaveRnn& model, const std::vector<VocoderExample>& data,
                const std::vector<Window>& windows, const Matrix* initial_hidden,
                Matrix* final_hidden) {
  if (windows.empty()) throw ValidationError("no training windows");
  const VocoderConfig& cfg = model.config();
  const int hop = cfg.hop;
  const int frames = windows.front().frames;
  const auto batch = static_cast<Index>(windows.size());
  const Index steps = static_cast<Index>(frames) * hop;
  const int radius = cfg.receptive_field();

  // Condition bias rows for a margin-extended crop around each window.
  std::vector<Var> biases;
  std::vector<int> first_row(windows.size());
  int offset = 0;
  for (std::size_t w = 0; w < windows.size(); ++w) {
    const Window& win = windows[w];
    if (win.frames != frames) throw ShapeError("windows in a batch must have equal length");
    const Matrix& mel = data.at(win.example).mel;
    const int lo = std::max(0, win.start_frame - radius);
    const int hi = std::min(static_cast<int>(mel.rows()), win.start_frame + frames + radius);
    if (win.start_frame < 0 || win.start_frame + frames > mel.rows()) {
      throw ShapeError("window exceeds its clip");
    }
    biases.push_back(model.condition_bias(tape, model.encode_condition(tape, mel.middleRows(lo, hi - lo))));
    first_row[w] = offset + (win.start_frame - lo);
    offset += hi - lo;
  }
  const Var all_bias = nn::concat_rows(biases);

  // Step-major rows: row n * batch + w.
  Matrix prev(steps * batch, 2);
  std::vector<int> bias_rows(static_cast<std::size_t>(steps * batch));
  std::vector<int> coarse(static_cast<std::size_t>(steps * batch));
  std::vector<int> fine(static_cast<std::size_t>(steps * batch));
  for (std::size_t w = 0; w < windows.size(); ++w) {
    const Window& win = windows[w];
    const auto& pcm = data[win.example].pcm;
    const Index base = static_cast<Index>(win.start_frame) * hop;
    for (Index n = 0; n < steps; ++n) {
      const Index row = n * batch + static_cast<Index>(w);
      const CoarseFine before =
          base + n > 0 ? split_sample(to_unsigned(pcm[static_cast<std::size_t>(base + n - 1)]))
                       : CoarseFine{128, 0};
      const CoarseFine now = split_sample(to_unsigned(pcm[static_cast<std::size_t>(base + n)]));
      prev(row, 0) = scale_class(before.coarse);
      prev(row, 1) = scale_class(before.fine);
      bias_rows[static_cast<std::size_t>(row)] = first_row[w] + static_cast<int>(n / hop);
      coarse[static_cast<std::size_t>(row)] = now.coarse;
      fine[static_cast<std::size_t>(row)] = now.fine;
    }
  }

  const WaveRnn::Bound b = model.bind(tape);
  const Var xp = nn::add(nn::add(nn::matmul(tape.constant(std::move(prev)), b.w_ih), b.b_ih),
                         nn::gather_rows(all_bias, bias_rows));
  Var h = tape.constant(Matrix::Zero(batch, cfg.gru_size));
  if (initial_hidden != nullptr) {
    if (initial_hidden->rows() != batch || initial_hidden->cols() != cfg.gru_size) {
      throw ShapeError("initial hidden state must be batch x gru_size");
    }
    h = tape.constant(*initial_hidden);
  }
  std::vector<Var> hidden;
  hidden.reserve(static_cast<std::size_t>(steps));
  for (Index n = 0; n < steps; ++n) {
    h = nn::gru_cell(nn::slice_rows(xp, n * batch, batch), h, b.w_hh, b.b_hh);
    hidden.push_back(h);
  }
  if (final_hidden != nullptr) *final_hidden = h.value();
  const Var all_h = nn::concat_rows(hidden);
  return nn::add(nn::softmax_cross_entropy(model.coarse_logits(b, all_h), coarse),
                 nn::softmax_cross_entropy(model.fine_logits(b, all_h, coarse), fine));
}

VocoderTrainResult train_vocoder(WaveRnn& model, const std::vector<VocoderExample>& data,
                                 const VocoderStepCallback& on_step) {
  if (data.empty()) throw ValidationError("vocoder training set is empty");
  const VocoderConfig& cfg = model.config();

  Index rows = 0;
  RowVector sum = RowVector::Zero(cfg.mel_dim);
  RowVector sum_sq = RowVector::Zero(cfg.mel_dim);
  for (const auto& ex : data) {
    if (ex.mel.cols() != cfg.mel_dim) throw ShapeError("'" + ex.id + "' has the wrong mel width");
    if (static_cast<Index>(ex.pcm.size()) != ex.mel.rows() * cfg.hop) {
      throw ShapeError("'" + ex.id + "' is not frame aligned; use make_example");
    }
    sum += ex.mel.colwise().sum();
    sum_sq += ex.mel.array().square().matrix().colwise().sum();
    rows += ex.mel.rows();
  }
  const RowVector mean = sum / static_cast<double>(rows);
  const RowVector var = sum_sq / static_cast<double>(rows) - mean.cwiseProduct(mean);
  model.set_mel_stats(mean, var.unaryExpr([](double v) { return v > 1e-6 ? std::sqrt(v) : 1.0; }));

  int window = cfg.window_frames;
  Index longest = 0;
  for (const auto& ex : data) longest = std::max(longest, ex.mel.rows());
  if (window > longest) {
    spdlog::warn("vocoder window of {} frames exceeds the longest clip; using {}", window, longest);
    window = static_cast<int>(longest);
  }

  nn::Adam adam(model.parameters(), nn::AdamConfig{.learning_rate = cfg.learning_rate});
  nn::Rng rng(cfg.seed + 15485863);
  VocoderTrainResult result;
  std::vector<Window> streams = sample_windows(data, cfg.batch_size, window, rng);
  Matrix hidden = Matrix::Zero(cfg.batch_size, cfg.gru_size);
  for (int step = 0; step < cfg.train_steps; ++step) {
    for (std::size_t s = 0; s < streams.size(); ++s) {
      if (streams[s].start_frame + window > data[streams[s].example].mel.rows()) {
        streams[s] = sample_windows(data, 1, window, rng).front();
        streams[s].start_frame = 0;
        hidden.row(static_cast<Index>(s)).setZero();
      }
    }
    Tape tape;
    const Var loss = window_loss(tape, model, data, streams, &hidden, &hidden);
    if (!std::isfinite(loss.scalar())) {
      throw NumericError("non-finite vocoder loss at step " + std::to_string(step), step);
    }
    tape.backward(loss);
    adam.step();
    for (auto& w : streams) w.start_frame += window;
    result.step_losses.push_back(loss.scalar());
    if (on_step) on_step(step, loss.scalar());
    if ((step + 1) % 100 == 0) {
      spdlog::debug("vocoder step {} loss {:.4f} nats/sample", step + 1, loss.scalar());
    }
  }
  for (const auto& ex : data) {
    result.final_loss += model.clip_loss(ex.mel, ex.pcm) / static_cast<double>(data.size());
  }
  spdlog::info("vocoder training done: {} steps, {:.4f} nats/sample ({:.3f} bits)",
               cfg.train_steps, result.final_loss, result.final_loss / std::log(2.0));
  return result;
}

}  // namespace bytesing::vocoder
