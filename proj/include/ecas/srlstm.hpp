#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

#include "ecas/prediction.hpp"
#include "ecas/scenario.hpp"

namespace ecas {

struct SrLstmHyper {
  int hidden = 8;              // H
  int embed = 8;               // E
  double neighbor_radius = 2.0;
  int refinement_layers = 1;
};

// Recurrent trajectory predictor: embedded frame-to-frame displacements drive
// a single LSTM layer per pedestrian; after every step the cell states are
// refined with attention-weighted messages from in-radius neighbors; a linear
// decoder turns hidden states back into displacements for autoregressive
// rollout. Consuming displacements rather than coordinates makes predictions
// translation-invariant.
struct SrLstmModel {
  SrLstmHyper hyper;
  Eigen::MatrixXd embed_w;   // E x 2
  Eigen::VectorXd embed_b;   // E
  Eigen::MatrixXd lstm_w;    // 4H x (E+H), gate rows ordered [input|forget|candidate|output]
  Eigen::VectorXd lstm_b;    // 4H
  Eigen::MatrixXd msg_w;     // H x (H+2), message map over [h_j; p_j - p_i]
  Eigen::VectorXd msg_b;     // H
  Eigen::VectorXd attn_w;    // H+2, scalar attention score over the same features
  double attn_b = 0.0;
  Eigen::MatrixXd decode_w;  // 2 x H
  Eigen::VectorXd decode_b;  // 2
};

struct RecurrentState {
  Eigen::VectorXd h;
  Eigen::VectorXd c;
};

// Uniform [-0.1, 0.1] weights from the seed, zero biases, +1 forget-gate bias.
SrLstmModel init_srlstm(const SrLstmHyper& hyper, std::uint64_t seed);

RecurrentState zero_state(const SrLstmModel& model);

// One gated recurrence update for a single pedestrian displacement.
RecurrentState lstm_step(const SrLstmModel& model, const Point2& displacement,
                         const RecurrentState& state);

// Neighbor refinement of cell states. Pedestrians with no neighbor within
// hyper.neighbor_radius keep their cell state bit-for-bit.
std::vector<Eigen::VectorXd> refine_states(const SrLstmModel& model,
                                           const std::vector<RecurrentState>& states,
                                           const std::vector<Point2>& positions);

// Full rollout over a scene of frame-aligned histories.
std::vector<PredictedTrajectory> predict_srlstm(const SrLstmModel& model,
                                                const std::vector<PedestrianTrack>& histories,
                                                int pred_len);

struct SrLstmGradients {
  Eigen::MatrixXd embed_w;
  Eigen::VectorXd embed_b;
  Eigen::MatrixXd lstm_w;
  Eigen::VectorXd lstm_b;
  Eigen::MatrixXd msg_w;
  Eigen::VectorXd msg_b;
  Eigen::VectorXd attn_w;
  double attn_b = 0.0;
  Eigen::MatrixXd decode_w;
  Eigen::VectorXd decode_b;
};

struct SceneForward {
  double loss = 0.0;  // mean squared position error over pedestrians and steps
  std::vector<PredictedTrajectory> predictions;
  SrLstmGradients gradients;
};

// Differentiable rollout of one scene: histories drive the recurrence, the
// loss compares predicted positions against the aligned ground-truth tracks.
// Gradients are computed by reverse-mode accumulation when requested.
SceneForward srlstm_scene_forward(const SrLstmModel& model,
                                  const std::vector<PedestrianTrack>& histories,
                                  const std::vector<PedestrianTrack>& truths,
                                  bool want_gradients);

struct TrainResult {
  SrLstmModel model;
  std::vector<double> loss_trace;  // per-epoch mean scene loss
};

// Plain fixed-rate gradient descent on the scene loss. Tracks are grouped
// into scenes by identical frame sequences and chunked to at most `batch`
// pedestrians per update. Tracks shorter than obs_len + pred_len are skipped.
TrainResult train_desk_scale(const SrLstmModel& model,
                             const std::vector<PedestrianTrack>& tracks, int epochs, int batch,
                             double lr, int obs_len = 8, int pred_len = 12);

// Versioned checkpoint of named weight arrays with explicit dimensions.
std::string checkpoint_to_json(const SrLstmModel& model);
SrLstmModel checkpoint_from_json(const std::string& text);
void save_checkpoint(const SrLstmModel& model, const std::string& path);
SrLstmModel load_checkpoint(const std::string& path);

}  // namespace ecas
