#include "ecas/srlstm.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "ecas/autodiff.hpp"
#include "ecas/dataset.hpp"
#include "ecas/errors.hpp"
#include "ecas/rng.hpp"
#include "ecas/text_io.hpp"

namespace ecas {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd uniform_matrix(SeededRng& rng, Eigen::Index rows, Eigen::Index cols, double bound) {
  MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(r, c) = rng.uniform(-bound, bound);
    }
  }
  return m;
}

void check_state_dims(const SrLstmModel& model, const RecurrentState& state) {
  const int H = model.hyper.hidden;
  if (state.h.size() != H || state.c.size() != H) {
    throw std::invalid_argument("recurrent state dimension does not match the model");
  }
}

VectorXd sigmoid(const VectorXd& x) {
  return x.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

// Neighbors of pedestrian i within the model radius, in index order.
std::vector<std::size_t> in_radius_neighbors(const std::vector<Point2>& positions, std::size_t i,
                                             double radius) {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < positions.size(); ++j) {
    if (j == i) continue;
    if ((positions[j] - positions[i]).norm() <= radius) out.push_back(j);
  }
  return out;
}

void check_alignment(const std::vector<PedestrianTrack>& histories) {
  for (const auto& track : histories) {
    if (track.frames.size() < 2) {
      throw std::invalid_argument("every history needs at least 2 frames");
    }
  }
  for (std::size_t i = 1; i < histories.size(); ++i) {
    if (histories[i].frames.size() != histories[0].frames.size()) {
      throw std::invalid_argument("histories have misaligned frames (length mismatch)");
    }
    for (std::size_t t = 0; t < histories[i].frames.size(); ++t) {
      if (histories[i].frames[t].frame != histories[0].frames[t].frame) {
        throw std::invalid_argument("histories have misaligned frames");
      }
    }
  }
}

}  // namespace

SrLstmModel init_srlstm(const SrLstmHyper& hyper, std::uint64_t seed) {
  if (hyper.hidden < 1 || hyper.embed < 1) {
    throw std::invalid_argument("hidden and embed sizes must be positive");
  }
  if (!(hyper.neighbor_radius > 0.0)) {
    throw std::invalid_argument("neighbor_radius must be positive");
  }
  if (hyper.refinement_layers < 1) {
    throw std::invalid_argument("refinement_layers must be at least 1");
  }
  const int H = hyper.hidden;
  const int E = hyper.embed;
  SeededRng rng(seed);
  SrLstmModel m;
  m.hyper = hyper;
  m.embed_w = uniform_matrix(rng, E, 2, 0.1);
  m.embed_b = VectorXd::Zero(E);
  m.lstm_w = uniform_matrix(rng, 4 * H, E + H, 0.1);
  m.lstm_b = VectorXd::Zero(4 * H);
  m.lstm_b.segment(H, H).setOnes();  // forget-gate bias
  m.msg_w = uniform_matrix(rng, H, H + 2, 0.1);
  m.msg_b = VectorXd::Zero(H);
  m.attn_w = uniform_matrix(rng, H + 2, 1, 0.1).col(0);
  m.attn_b = 0.0;
  m.decode_w = uniform_matrix(rng, 2, H, 0.1);
  m.decode_b = VectorXd::Zero(2);
  return m;
}

RecurrentState zero_state(const SrLstmModel& model) {
  return {VectorXd::Zero(model.hyper.hidden), VectorXd::Zero(model.hyper.hidden)};
}

RecurrentState lstm_step(const SrLstmModel& model, const Point2& displacement,
                         const RecurrentState& state) {
  check_state_dims(model, state);
  const int H = model.hyper.hidden;

  const VectorXd embedded = model.embed_w * displacement + model.embed_b;
  VectorXd joint(embedded.size() + H);
  joint << embedded, state.h;
  const VectorXd z = model.lstm_w * joint + model.lstm_b;

  const VectorXd gate_in = sigmoid(z.segment(0, H));
  const VectorXd gate_forget = sigmoid(z.segment(H, H));
  const VectorXd candidate = z.segment(2 * H, H).array().tanh().matrix();
  const VectorXd gate_out = sigmoid(z.segment(3 * H, H));

  RecurrentState next;
  next.c = gate_forget.cwiseProduct(state.c) + gate_in.cwiseProduct(candidate);
  next.h = gate_out.cwiseProduct(next.c.array().tanh().matrix());
  return next;
}

std::vector<VectorXd> refine_states(const SrLstmModel& model,
                                    const std::vector<RecurrentState>& states,
                                    const std::vector<Point2>& positions) {
  if (states.size() != positions.size()) {
    throw std::invalid_argument("refine_states: states and positions length mismatch");
  }
  for (const auto& s : states) check_state_dims(model, s);

  std::vector<VectorXd> refined;
  refined.reserve(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto neighbors = in_radius_neighbors(positions, i, model.hyper.neighbor_radius);
    if (neighbors.empty()) {
      refined.push_back(states[i].c);
      continue;
    }
    VectorXd scores(static_cast<Eigen::Index>(neighbors.size()));
    std::vector<VectorXd> messages;
    messages.reserve(neighbors.size());
    for (std::size_t k = 0; k < neighbors.size(); ++k) {
      const std::size_t j = neighbors[k];
      VectorXd features(model.hyper.hidden + 2);
      features << states[j].h, positions[j] - positions[i];
      scores(static_cast<Eigen::Index>(k)) = model.attn_w.dot(features) + model.attn_b;
      messages.push_back(model.msg_w * features + model.msg_b);
    }
    const VectorXd shifted = (scores.array() - scores.maxCoeff()).exp().matrix();
    const VectorXd attention = shifted / shifted.sum();

    VectorXd cell = states[i].c;
    for (std::size_t k = 0; k < neighbors.size(); ++k) {
      cell += attention(static_cast<Eigen::Index>(k)) * messages[k];
    }
    refined.push_back(std::move(cell));
  }
  return refined;
}

std::vector<PredictedTrajectory> predict_srlstm(const SrLstmModel& model,
                                                const std::vector<PedestrianTrack>& histories,
                                                int pred_len) {
  if (histories.empty()) return {};
  if (pred_len < 1) throw std::invalid_argument("pred_len must be positive");
  check_alignment(histories);

  const std::size_t n = histories.size();
  const std::size_t T = histories[0].frames.size();
  std::vector<RecurrentState> states(n, zero_state(model));
  std::vector<Point2> positions(n);

  auto refine_rounds = [&]() {
    for (int l = 0; l < model.hyper.refinement_layers; ++l) {
      auto cells = refine_states(model, states, positions);
      for (std::size_t i = 0; i < n; ++i) states[i].c = std::move(cells[i]);
    }
  };

  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      const Point2 disp =
          histories[i].frames[t].position - histories[i].frames[t - 1].position;
      states[i] = lstm_step(model, disp, states[i]);
      positions[i] = histories[i].frames[t].position;
    }
    refine_rounds();
  }

  std::vector<PredictedTrajectory> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].ped_id = histories[i].ped_id;
    positions[i] = histories[i].frames.back().position;
  }

  for (int k = 1; k <= pred_len; ++k) {
    std::vector<Point2> decoded(n);
    for (std::size_t i = 0; i < n; ++i) {
      decoded[i] = model.decode_w * states[i].h + model.decode_b;
      positions[i] += decoded[i];
      out[i].waypoints.push_back({k * histories[i].frame_interval, positions[i]});
    }
    if (k < pred_len) {
      for (std::size_t i = 0; i < n; ++i) {
        states[i] = lstm_step(model, decoded[i], states[i]);
      }
      refine_rounds();
    }
  }
  return out;
}

namespace {

struct TapeParams {
  int embed_w, embed_b, lstm_w, lstm_b, msg_w, msg_b, attn_w, attn_b, decode_w, decode_b;
};

TapeParams insert_params(ad::Tape& tape, const SrLstmModel& m) {
  TapeParams p;
  p.embed_w = tape.input(m.embed_w);
  p.embed_b = tape.input(m.embed_b);
  p.lstm_w = tape.input(m.lstm_w);
  p.lstm_b = tape.input(m.lstm_b);
  p.msg_w = tape.input(m.msg_w);
  p.msg_b = tape.input(m.msg_b);
  p.attn_w = tape.input(m.attn_w.transpose());  // 1 x (H+2)
  p.attn_b = tape.input(MatrixXd::Constant(1, 1, m.attn_b));
  p.decode_w = tape.input(m.decode_w);
  p.decode_b = tape.input(m.decode_b);
  return p;
}

struct TapeState {
  int h;
  int c;
};

TapeState lstm_step_tape(ad::Tape& tape, const TapeParams& p, int H, int input,
                         const TapeState& state) {
  const int embedded = tape.add(tape.matmul(p.embed_w, input), p.embed_b);
  const int joint = tape.vcat(embedded, state.h);
  const int z = tape.add(tape.matmul(p.lstm_w, joint), p.lstm_b);
  const int gate_in = tape.sigmoid(tape.rows(z, 0, H));
  const int gate_forget = tape.sigmoid(tape.rows(z, H, H));
  const int candidate = tape.tanh_op(tape.rows(z, 2 * H, H));
  const int gate_out = tape.sigmoid(tape.rows(z, 3 * H, H));
  TapeState next;
  next.c = tape.add(tape.cwise_mul(gate_forget, state.c), tape.cwise_mul(gate_in, candidate));
  next.h = tape.cwise_mul(gate_out, tape.tanh_op(next.c));
  return next;
}

// Mirrors refine_states over tape nodes; the radius gate reads forward values.
void refine_states_tape(ad::Tape& tape, const TapeParams& p, const SrLstmHyper& hyper,
                        std::vector<TapeState>& states, const std::vector<int>& pos_nodes) {
  const std::size_t n = states.size();
  for (int l = 0; l < hyper.refinement_layers; ++l) {
    std::vector<Point2> positions(n);
    for (std::size_t i = 0; i < n; ++i) positions[i] = tape.value(pos_nodes[i]).col(0);
    std::vector<int> refined(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto neighbors = in_radius_neighbors(positions, i, hyper.neighbor_radius);
      if (neighbors.empty()) {
        refined[i] = states[i].c;
        continue;
      }
      int scores = -1;
      std::vector<int> messages;
      messages.reserve(neighbors.size());
      for (const std::size_t j : neighbors) {
        const int features =
            tape.vcat(states[j].h, tape.sub(pos_nodes[j], pos_nodes[i]));
        const int score = tape.add(tape.matmul(p.attn_w, features), p.attn_b);
        scores = (scores < 0) ? score : tape.vcat(scores, score);
        messages.push_back(tape.add(tape.matmul(p.msg_w, features), p.msg_b));
      }
      const int attention = tape.softmax_col(scores);
      int cell = states[i].c;
      for (std::size_t k = 0; k < neighbors.size(); ++k) {
        cell = tape.add(cell, tape.scalar_mul(tape.rows(attention, static_cast<int>(k), 1),
                                              messages[k]));
      }
      refined[i] = cell;
    }
    for (std::size_t i = 0; i < n; ++i) states[i].c = refined[i];
  }
}

}  // namespace

SceneForward srlstm_scene_forward(const SrLstmModel& model,
                                  const std::vector<PedestrianTrack>& histories,
                                  const std::vector<PedestrianTrack>& truths,
                                  bool want_gradients) {
  if (histories.empty()) throw std::invalid_argument("scene has no histories");
  if (histories.size() != truths.size()) {
    throw std::invalid_argument("scene histories and truths length mismatch");
  }
  check_alignment(histories);
  const int pred_len = static_cast<int>(truths[0].frames.size());
  if (pred_len < 1) throw std::invalid_argument("truths must have at least one frame");
  for (const auto& t : truths) {
    if (static_cast<int>(t.frames.size()) != pred_len) {
      throw std::invalid_argument("truth tracks have mismatched lengths");
    }
  }

  const int H = model.hyper.hidden;
  const std::size_t n = histories.size();
  const std::size_t T = histories[0].frames.size();

  ad::Tape tape;
  const TapeParams params = insert_params(tape, model);

  std::vector<TapeState> states(n);
  std::vector<int> pos_nodes(n);
  for (std::size_t i = 0; i < n; ++i) {
    states[i].h = tape.input(MatrixXd::Zero(H, 1));
    states[i].c = tape.input(MatrixXd::Zero(H, 1));
  }

  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      const Point2 disp =
          histories[i].frames[t].position - histories[i].frames[t - 1].position;
      const int input = tape.input(disp);
      states[i] = lstm_step_tape(tape, params, H, input, states[i]);
      pos_nodes[i] = tape.input(histories[i].frames[t].position);
    }
    refine_states_tape(tape, params, model.hyper, states, pos_nodes);
  }

  SceneForward out;
  out.predictions.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.predictions[i].ped_id = histories[i].ped_id;
    pos_nodes[i] = tape.input(histories[i].frames.back().position);
  }

  int loss_acc = -1;
  for (int k = 1; k <= pred_len; ++k) {
    std::vector<int> decoded(n);
    for (std::size_t i = 0; i < n; ++i) {
      decoded[i] = tape.add(tape.matmul(params.decode_w, states[i].h), params.decode_b);
      pos_nodes[i] = tape.add(pos_nodes[i], decoded[i]);
      out.predictions[i].waypoints.push_back(
          {k * histories[i].frame_interval, tape.value(pos_nodes[i]).col(0)});
      const int target =
          tape.input(truths[i].frames[static_cast<std::size_t>(k - 1)].position);
      const int term = tape.squared_norm(tape.sub(pos_nodes[i], target));
      loss_acc = (loss_acc < 0) ? term : tape.add(loss_acc, term);
    }
    if (k < pred_len) {
      for (std::size_t i = 0; i < n; ++i) {
        states[i] = lstm_step_tape(tape, params, H, decoded[i], states[i]);
      }
      refine_states_tape(tape, params, model.hyper, states, pos_nodes);
    }
  }

  const int loss = tape.scale(loss_acc, 1.0 / (static_cast<double>(n) * pred_len));
  out.loss = tape.value(loss)(0, 0);

  if (want_gradients) {
    tape.backward(loss);
    out.gradients.embed_w = tape.gradient(params.embed_w);
    out.gradients.embed_b = tape.gradient(params.embed_b);
    out.gradients.lstm_w = tape.gradient(params.lstm_w);
    out.gradients.lstm_b = tape.gradient(params.lstm_b);
    out.gradients.msg_w = tape.gradient(params.msg_w);
    out.gradients.msg_b = tape.gradient(params.msg_b);
    out.gradients.attn_w = tape.gradient(params.attn_w).transpose();
    out.gradients.attn_b = tape.gradient(params.attn_b)(0, 0);
    out.gradients.decode_w = tape.gradient(params.decode_w);
    out.gradients.decode_b = tape.gradient(params.decode_b);
  }
  return out;
}

namespace {

void apply_update(SrLstmModel& model, const SrLstmGradients& g, double lr) {
  model.embed_w -= lr * g.embed_w;
  model.embed_b -= lr * g.embed_b;
  model.lstm_w -= lr * g.lstm_w;
  model.lstm_b -= lr * g.lstm_b;
  model.msg_w -= lr * g.msg_w;
  model.msg_b -= lr * g.msg_b;
  model.attn_w -= lr * g.attn_w;
  model.attn_b -= lr * g.attn_b;
  model.decode_w -= lr * g.decode_w;
  model.decode_b -= lr * g.decode_b;
}

struct Scene {
  std::vector<PedestrianTrack> histories;
  std::vector<PedestrianTrack> truths;
};

}  // namespace

TrainResult train_desk_scale(const SrLstmModel& model,
                             const std::vector<PedestrianTrack>& tracks, int epochs, int batch,
                             double lr, int obs_len, int pred_len) {
  if (tracks.empty()) throw ValidationError("training requires a non-empty track list");
  if (epochs < 0) throw std::invalid_argument("epochs must be non-negative");
  if (batch < 1) throw std::invalid_argument("batch must be positive");

  // Scenes group tracks that share an identical evaluation window, chunked to
  // at most `batch` pedestrians per gradient step.
  std::map<std::vector<std::int64_t>, Scene> groups;
  for (const auto& track : tracks) {
    const auto split = split_obs_pred(track, obs_len, pred_len);
    if (!split.ok) continue;
    std::vector<std::int64_t> key;
    for (const auto& tp : split.history.frames) key.push_back(tp.frame);
    for (const auto& tp : split.ground_truth.frames) key.push_back(tp.frame);
    auto& scene = groups[key];
    scene.histories.push_back(split.history);
    scene.truths.push_back(split.ground_truth);
  }
  std::vector<Scene> scenes;
  for (auto& [key, group] : groups) {
    for (std::size_t first = 0; first < group.histories.size();
         first += static_cast<std::size_t>(batch)) {
      const std::size_t last =
          std::min(group.histories.size(), first + static_cast<std::size_t>(batch));
      Scene scene;
      scene.histories.assign(group.histories.begin() + static_cast<std::ptrdiff_t>(first),
                             group.histories.begin() + static_cast<std::ptrdiff_t>(last));
      scene.truths.assign(group.truths.begin() + static_cast<std::ptrdiff_t>(first),
                          group.truths.begin() + static_cast<std::ptrdiff_t>(last));
      scenes.push_back(std::move(scene));
    }
  }
  if (scenes.empty()) {
    throw ValidationError("no track is long enough for the requested obs/pred split");
  }

  TrainResult out;
  out.model = model;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    double loss_sum = 0.0;
    for (const auto& scene : scenes) {
      const auto fwd =
          srlstm_scene_forward(out.model, scene.histories, scene.truths, lr != 0.0);
      loss_sum += fwd.loss;
      if (lr != 0.0) apply_update(out.model, fwd.gradients, lr);
    }
    out.loss_trace.push_back(loss_sum / static_cast<double>(scenes.size()));
  }
  return out;
}

namespace {

using nlohmann::json;

json matrix_to_json(const MatrixXd& m) {
  json data = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  }
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

MatrixXd matrix_from_json(const json& j, const char* name) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto& data = j.at("data");
  if (rows < 1 || cols < 1 || data.size() != static_cast<std::size_t>(rows * cols)) {
    throw ParseError(std::string("checkpoint array `") + name + "` has inconsistent dimensions");
  }
  MatrixXd m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data.at(k++).get<double>();
  }
  return m;
}

}  // namespace

std::string checkpoint_to_json(const SrLstmModel& m) {
  json doc;
  doc["schema"] = "ecas-srlstm-v1";
  doc["hyper"] = {{"hidden", m.hyper.hidden},
                  {"embed", m.hyper.embed},
                  {"neighbor_radius", m.hyper.neighbor_radius},
                  {"refinement_layers", m.hyper.refinement_layers}};
  doc["weights"] = {{"embed_w", matrix_to_json(m.embed_w)},
                    {"embed_b", matrix_to_json(m.embed_b)},
                    {"lstm_w", matrix_to_json(m.lstm_w)},
                    {"lstm_b", matrix_to_json(m.lstm_b)},
                    {"msg_w", matrix_to_json(m.msg_w)},
                    {"msg_b", matrix_to_json(m.msg_b)},
                    {"attn_w", matrix_to_json(m.attn_w)},
                    {"attn_b", m.attn_b},
                    {"decode_w", matrix_to_json(m.decode_w)},
                    {"decode_b", matrix_to_json(m.decode_b)}};
  return doc.dump(2) + "\n";
}

SrLstmModel checkpoint_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("checkpoint syntax error: ") + e.what());
  }
  try {
    if (doc.at("schema").get<std::string>() != "ecas-srlstm-v1") {
      throw ParseError("unsupported checkpoint schema");
    }
    SrLstmModel m;
    const auto& hyper = doc.at("hyper");
    m.hyper.hidden = hyper.at("hidden").get<int>();
    m.hyper.embed = hyper.at("embed").get<int>();
    m.hyper.neighbor_radius = hyper.at("neighbor_radius").get<double>();
    m.hyper.refinement_layers = hyper.at("refinement_layers").get<int>();

    const auto& w = doc.at("weights");
    m.embed_w = matrix_from_json(w.at("embed_w"), "embed_w");
    m.embed_b = matrix_from_json(w.at("embed_b"), "embed_b").col(0);
    m.lstm_w = matrix_from_json(w.at("lstm_w"), "lstm_w");
    m.lstm_b = matrix_from_json(w.at("lstm_b"), "lstm_b").col(0);
    m.msg_w = matrix_from_json(w.at("msg_w"), "msg_w");
    m.msg_b = matrix_from_json(w.at("msg_b"), "msg_b").col(0);
    m.attn_w = matrix_from_json(w.at("attn_w"), "attn_w").col(0);
    m.attn_b = w.at("attn_b").get<double>();
    m.decode_w = matrix_from_json(w.at("decode_w"), "decode_w");
    m.decode_b = matrix_from_json(w.at("decode_b"), "decode_b").col(0);

    const int H = m.hyper.hidden;
    const int E = m.hyper.embed;
    if (m.embed_w.rows() != E || m.embed_w.cols() != 2 || m.embed_b.size() != E ||
        m.lstm_w.rows() != 4 * H || m.lstm_w.cols() != E + H || m.lstm_b.size() != 4 * H ||
        m.msg_w.rows() != H || m.msg_w.cols() != H + 2 || m.msg_b.size() != H ||
        m.attn_w.size() != H + 2 || m.decode_w.rows() != 2 || m.decode_w.cols() != H ||
        m.decode_b.size() != 2) {
      throw ParseError("checkpoint weight dimensions do not match the hyperparameters");
    }
    if (m.hyper.refinement_layers < 1 || !(m.hyper.neighbor_radius > 0.0)) {
      throw ParseError("checkpoint hyperparameters out of range");
    }
    return m;
  } catch (const json::exception& e) {
    throw ParseError(std::string("checkpoint structure error: ") + e.what());
  }
}

void save_checkpoint(const SrLstmModel& model, const std::string& path) {
  write_text_file(path, checkpoint_to_json(model));
}

SrLstmModel load_checkpoint(const std::string& path) {
  return checkpoint_from_json(read_text_file(path));
}

}  // namespace ecas
