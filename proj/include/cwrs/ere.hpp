#pragma once
#include <optional>
#include <string>

#include "cwrs/autodiff.hpp"
#include "cwrs/params.hpp"

namespace cwrs {

enum class EreMode { krl_only, attn, invo, conv, invo_then_attn, attn_then_invo };

std::string to_text(EreMode m);
std::optional<EreMode> ere_mode_from(const std::string& s);

struct EreConfig {
  int K = 5;          // kernel size, odd
  int G = 1;          // kernel groups
  int hidden = 0;     // width of the kernel generator's middle layer; 0 -> K*C
  double leaky_slope = 0.01;
  int heads = 3;
  bool scale_by_sqrt_d = false;  // the reference formulation has no 1/sqrt(d)
};

// T[k,g,c] = A[k,g] * B[k,c]
Tensor expansion_product(const Tensor& A, const Tensor& B);

// kernel = reshape(FC2(LeakyReLU(FC1(x_flat))), (K, G)); x_flat is the
// row-major flattened K x C window
Var involution_kernel(const Var& x_flat, const Var& w1, const Var& b1, const Var& w2,
                      const Var& b2, double slope, int K, int G);

// one zero-padded K-window along the embedding axis per (row, position);
// windows never cross rows. Output (N*n_emb, K*C), entry [p, k*C+c].
Var im2row(const Var& block, int K);

// Position-specific, channel-shared dynamic filtering: the kernel at each
// position is generated from that position's own window, then applied across
// all channels. Shape-preserving on (N, n_emb, C) blocks.
Var involution1d(const Var& block, const EreConfig& cfg, ParamStore& ps,
                 const std::string& side_tag);

// static comparison baseline: shared spatial kernel, per-channel filters
Var conv1d_baseline(const Var& block, const EreConfig& cfg, ParamStore& ps,
                    const std::string& side_tag);

// softmax(Q K^T) V with row-wise softmax; Q/K/V are linear maps of X
Var self_attention(const Var& X, const Var& wq, const Var& wk, const Var& wv,
                   bool scale_by_sqrt_d);

// H independent heads (each d_model -> d_model), concatenated, then a learned
// map back to d_model
Var multi_head(const Var& X, int H, const EreConfig& cfg, ParamStore& ps,
               const std::string& side_tag);

// Full enhancement cascade. Channels are flattened into the feature axis
// before any attention stage; the final representation flattens rows too.
// Every mode maps an (N, n_emb, C) block to a vector of length N*n_emb*C.
Var enhance(const Var& block, EreMode mode, const EreConfig& cfg, ParamStore& ps,
            const std::string& side_tag);

inline int enhanced_length(int rows, int n_emb, int channels) {
  return rows * n_emb * channels;
}

}  // namespace cwrs
