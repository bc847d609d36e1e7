#pragma once
// Value-Advantage Decomposition Network: per-candidate shared encoder with
// LayerNorm, a mean-pooled value stream with a residual input, a two-layer
// advantage stream applied per candidate, and the Q assembly
//
//   Q(s,a) = V(s) + A(s,a) - (alpha/k) * sum_a' A(s,a')
//
// with a learnable scaling alpha. Forward, analytic gradients, Adam for the
// network, plain SGD for alpha, and a versioned JSON checkpoint format.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "multicod/core.hpp"
#include "multicod/metrics.hpp"

namespace multicod {

struct NonFiniteInput : std::runtime_error {
    NonFiniteInput() : std::runtime_error("state contains non-finite features") {}
};
struct NonFiniteOutput : std::runtime_error {
    NonFiniteOutput() : std::runtime_error("network produced non-finite output") {}
};
struct NonFiniteGradient : std::runtime_error {
    NonFiniteGradient() : std::runtime_error("gradient contains non-finite values") {}
};
struct EmptyBatch : std::runtime_error {
    EmptyBatch() : std::runtime_error("training batch is empty") {}
};
struct CheckpointMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct VadnConfig {
    int input_dim = kFeatureCount;
    int encoder_dim = 128;
    int value_hidden = 64;
    int adv_hidden = 64;
    double ln_eps = 1e-5;
};

struct VadnParams {
    VadnConfig config;
    std::vector<double> w_f, b_f;        // encoder: input_dim -> encoder_dim
    std::vector<double> ln_gain, ln_bias;
    std::vector<double> w_v1, b_v1;      // value: encoder_dim -> value_hidden
    std::vector<double> w_v2, b_v2;      // value: value_hidden -> 1
    std::vector<double> w_a1, b_a1;      // advantage: encoder_dim -> adv_hidden
    std::vector<double> w_a2, b_a2;      // advantage: adv_hidden -> 1
    std::vector<double> alpha{1.0};      // learnable mean-advantage scaling

    double alpha_value() const { return alpha[0]; }
};

// Applies fn(name, vector) to every parameter block, alpha last.
template <typename Params, typename Fn>
void visit_params(Params& p, Fn&& fn) {
    fn("w_f", p.w_f);
    fn("b_f", p.b_f);
    fn("ln_gain", p.ln_gain);
    fn("ln_bias", p.ln_bias);
    fn("w_v1", p.w_v1);
    fn("b_v1", p.b_v1);
    fn("w_v2", p.w_v2);
    fn("b_v2", p.b_v2);
    fn("w_a1", p.w_a1);
    fn("b_a1", p.b_a1);
    fn("w_a2", p.w_a2);
    fn("b_a2", p.b_a2);
    fn("alpha", p.alpha);
}

namespace detail {

inline void he_uniform(std::vector<double>& w, int fan_in, std::mt19937_64& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (auto& x : w) x = dist(rng);
}

inline bool all_finite(const std::vector<double>& v) {
    for (double x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

}  // namespace detail

inline VadnParams init_params(const VadnConfig& config, std::uint64_t seed) {
    VadnParams p;
    p.config = config;
    const auto H = static_cast<std::size_t>(config.encoder_dim);
    const auto I = static_cast<std::size_t>(config.input_dim);
    const auto Dv = static_cast<std::size_t>(config.value_hidden);
    const auto Da = static_cast<std::size_t>(config.adv_hidden);
    p.w_f.resize(H * I);
    p.b_f.assign(H, 0.0);
    p.ln_gain.assign(H, 1.0);
    p.ln_bias.assign(H, 0.0);
    p.w_v1.resize(Dv * H);
    p.b_v1.assign(Dv, 0.0);
    p.w_v2.resize(Dv);
    p.b_v2.assign(1, 0.0);
    p.w_a1.resize(Da * H);
    p.b_a1.assign(Da, 0.0);
    p.w_a2.resize(Da);
    p.b_a2.assign(1, 0.0);
    std::mt19937_64 rng(seed);
    detail::he_uniform(p.w_f, config.input_dim, rng);
    detail::he_uniform(p.w_v1, config.encoder_dim, rng);
    detail::he_uniform(p.w_v2, config.value_hidden, rng);
    detail::he_uniform(p.w_a1, config.encoder_dim, rng);
    detail::he_uniform(p.w_a2, config.adv_hidden, rng);
    return p;
}

inline VadnParams zeros_like(const VadnParams& p) {
    VadnParams z = p;
    visit_params(z, [](const char*, std::vector<double>& v) {
        std::fill(v.begin(), v.end(), 0.0);
    });
    return z;
}

struct QOutput {
    std::vector<double> q;
    double v = 0.0;
    std::vector<double> advantages;
};

namespace detail {

// Cached activations for one state's forward pass.
struct ForwardCache {
    int k = 0;
    std::vector<std::vector<double>> z;   // encoder pre-activation, per candidate
    std::vector<std::vector<double>> u;   // relu(z)
    std::vector<double> mu, sigma;        // LayerNorm statistics, per candidate
    std::vector<std::vector<double>> n;   // normalized u
    std::vector<std::vector<double>> h;   // LN output
    std::vector<double> h_mean;           // mean-pooled encoding
    std::vector<double> x;                // relu(h_mean) + h_mean
    std::vector<double> y_v;              // value hidden pre-activation
    std::vector<double> p_v;              // relu(y_v)
    std::vector<std::vector<double>> y_a; // advantage hidden pre-activation
    std::vector<std::vector<double>> t_a; // relu(y_a)
    QOutput out;
};

inline void matvec(const std::vector<double>& w, const std::vector<double>& x,
                   const std::vector<double>& b, std::vector<double>& out) {
    const std::size_t rows = b.size();
    const std::size_t cols = x.size();
    out.resize(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        double acc = b[r];
        const double* wr = w.data() + r * cols;
        for (std::size_t c = 0; c < cols; ++c) acc += wr[c] * x[c];
        out[r] = acc;
    }
}

inline ForwardCache forward_cached(const VadnParams& p, const BanditState& state) {
    const int k = state.k();
    if (k < 1) throw std::invalid_argument("state has no candidates");
    const auto H = static_cast<std::size_t>(p.config.encoder_dim);

    ForwardCache c;
    c.k = k;
    c.z.resize(static_cast<std::size_t>(k));
    c.u.resize(static_cast<std::size_t>(k));
    c.n.resize(static_cast<std::size_t>(k));
    c.h.resize(static_cast<std::size_t>(k));
    c.mu.resize(static_cast<std::size_t>(k));
    c.sigma.resize(static_cast<std::size_t>(k));
    c.y_a.resize(static_cast<std::size_t>(k));
    c.t_a.resize(static_cast<std::size_t>(k));
    c.h_mean.assign(H, 0.0);
    c.out.advantages.resize(static_cast<std::size_t>(k));
    c.out.q.resize(static_cast<std::size_t>(k));

    for (int i = 0; i < k; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        const auto& fv = state.candidates[idx].values;
        for (double x : fv) {
            if (!std::isfinite(x)) throw NonFiniteInput{};
        }
        std::vector<double> input(fv.begin(), fv.end());
        matvec(p.w_f, input, p.b_f, c.z[idx]);
        c.u[idx].resize(H);
        for (std::size_t d = 0; d < H; ++d) c.u[idx][d] = std::max(c.z[idx][d], 0.0);

        double mu = 0.0;
        for (double v : c.u[idx]) mu += v;
        mu /= static_cast<double>(H);
        double var = 0.0;
        for (double v : c.u[idx]) var += (v - mu) * (v - mu);
        var /= static_cast<double>(H);
        const double sigma = std::sqrt(var + p.config.ln_eps);
        c.mu[idx] = mu;
        c.sigma[idx] = sigma;
        c.n[idx].resize(H);
        c.h[idx].resize(H);
        for (std::size_t d = 0; d < H; ++d) {
            c.n[idx][d] = (c.u[idx][d] - mu) / sigma;
            c.h[idx][d] = p.ln_gain[d] * c.n[idx][d] + p.ln_bias[d];
            c.h_mean[d] += c.h[idx][d] / static_cast<double>(k);
        }
    }

    c.x.resize(H);
    for (std::size_t d = 0; d < H; ++d) c.x[d] = std::max(c.h_mean[d], 0.0) + c.h_mean[d];
    matvec(p.w_v1, c.x, p.b_v1, c.y_v);
    c.p_v.resize(c.y_v.size());
    for (std::size_t d = 0; d < c.y_v.size(); ++d) c.p_v[d] = std::max(c.y_v[d], 0.0);
    double v = p.b_v2[0];
    for (std::size_t d = 0; d < c.p_v.size(); ++d) v += p.w_v2[d] * c.p_v[d];
    c.out.v = v;

    double adv_sum = 0.0;
    for (int i = 0; i < k; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        matvec(p.w_a1, c.h[idx], p.b_a1, c.y_a[idx]);
        c.t_a[idx].resize(c.y_a[idx].size());
        for (std::size_t d = 0; d < c.y_a[idx].size(); ++d) {
            c.t_a[idx][d] = std::max(c.y_a[idx][d], 0.0);
        }
        double a = p.b_a2[0];
        for (std::size_t d = 0; d < c.t_a[idx].size(); ++d) a += p.w_a2[d] * c.t_a[idx][d];
        c.out.advantages[idx] = a;
        adv_sum += a;
    }
    const double correction = p.alpha_value() * adv_sum / static_cast<double>(k);
    for (int i = 0; i < k; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        c.out.q[idx] = v + c.out.advantages[idx] - correction;
        if (!std::isfinite(c.out.q[idx])) throw NonFiniteOutput{};
    }
    return c;
}

// Accumulates gradients for one state given dL/dQ(s, action).
inline void backward(const VadnParams& p, const BanditState& state, const ForwardCache& c,
                     int action, double dq, VadnParams& g) {
    const int k = c.k;
    const auto H = static_cast<std::size_t>(p.config.encoder_dim);
    const double kd = static_cast<double>(k);

    double adv_sum = 0.0;
    for (double a : c.out.advantages) adv_sum += a;

    // Q(s,a) = V + A_a - (alpha/k) sum A
    const double dV = dq;
    std::vector<double> dA(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        dA[static_cast<std::size_t>(i)] =
            dq * ((i == action ? 1.0 : 0.0) - p.alpha_value() / kd);
    }
    g.alpha[0] += dq * (-adv_sum / kd);

    std::vector<std::vector<double>> dh(static_cast<std::size_t>(k),
                                        std::vector<double>(H, 0.0));

    // value stream
    {
        const std::size_t Dv = c.p_v.size();
        std::vector<double> dy(Dv);
        for (std::size_t d = 0; d < Dv; ++d) {
            g.w_v2[d] += dV * c.p_v[d];
            const double dp = dV * p.w_v2[d];
            dy[d] = c.y_v[d] > 0.0 ? dp : 0.0;
        }
        g.b_v2[0] += dV;
        std::vector<double> dx(H, 0.0);
        for (std::size_t d = 0; d < Dv; ++d) {
            g.b_v1[d] += dy[d];
            double* wr = g.w_v1.data() + d * H;
            const double* pr = p.w_v1.data() + d * H;
            for (std::size_t e = 0; e < H; ++e) {
                wr[e] += dy[d] * c.x[e];
                dx[e] += pr[e] * dy[d];
            }
        }
        for (std::size_t e = 0; e < H; ++e) {
            const double dhm = dx[e] * ((c.h_mean[e] > 0.0 ? 1.0 : 0.0) + 1.0);
            for (int i = 0; i < k; ++i) {
                dh[static_cast<std::size_t>(i)][e] += dhm / kd;
            }
        }
    }

    // advantage stream, per candidate
    {
        const std::size_t Da = p.w_a2.size();
        for (int i = 0; i < k; ++i) {
            const auto idx = static_cast<std::size_t>(i);
            const double dAi = dA[idx];
            if (dAi == 0.0) continue;
            g.b_a2[0] += dAi;
            for (std::size_t d = 0; d < Da; ++d) {
                g.w_a2[d] += dAi * c.t_a[idx][d];
                const double dt = dAi * p.w_a2[d];
                const double dy = c.y_a[idx][d] > 0.0 ? dt : 0.0;
                if (dy == 0.0) continue;
                g.b_a1[d] += dy;
                double* wr = g.w_a1.data() + d * H;
                const double* pr = p.w_a1.data() + d * H;
                for (std::size_t e = 0; e < H; ++e) {
                    wr[e] += dy * c.h[idx][e];
                    dh[idx][e] += pr[e] * dy;
                }
            }
        }
    }

    // LayerNorm + encoder, per candidate
    const std::size_t I = static_cast<std::size_t>(p.config.input_dim);
    for (int i = 0; i < k; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        std::vector<double> dn(H);
        double dn_mean = 0.0, dnn_mean = 0.0;
        for (std::size_t d = 0; d < H; ++d) {
            g.ln_gain[d] += dh[idx][d] * c.n[idx][d];
            g.ln_bias[d] += dh[idx][d];
            dn[d] = dh[idx][d] * p.ln_gain[d];
            dn_mean += dn[d];
            dnn_mean += dn[d] * c.n[idx][d];
        }
        dn_mean /= static_cast<double>(H);
        dnn_mean /= static_cast<double>(H);
        const auto& fv = state.candidates[idx].values;
        for (std::size_t d = 0; d < H; ++d) {
            const double du = (dn[d] - dn_mean - c.n[idx][d] * dnn_mean) / c.sigma[idx];
            const double dz = c.z[idx][d] > 0.0 ? du : 0.0;
            if (dz == 0.0) continue;
            g.b_f[d] += dz;
            double* wr = g.w_f.data() + d * I;
            for (std::size_t e = 0; e < I; ++e) wr[e] += dz * fv[e];
        }
    }
}

}  // namespace detail

inline QOutput forward(const VadnParams& params, const BanditState& state) {
    return detail::forward_cached(params, state).out;
}

// Lowest index attaining the maximal Q-value.
inline int select_action(const VadnParams& params, const BanditState& state) {
    const QOutput out = forward(params, state);
    int best = 0;
    for (int i = 1; i < state.k(); ++i) {
        if (out.q[static_cast<std::size_t>(i)] > out.q[static_cast<std::size_t>(best)]) best = i;
    }
    return best;
}

inline VadnParams sync_target(const VadnParams& params) { return params; }

struct WeightedExperience {
    const Experience* exp = nullptr;
    double is_weight = 1.0;
};

struct TdLossResult {
    double loss = 0.0;
    VadnParams gradients;
    std::vector<double> td_errors;  // absolute, for priority updates
};

// Mean weighted squared TD error plus L2 over the network parameters.
// Terminal transitions (the bandit case) drop the bootstrap term. Alpha is
// excluded from the L2 penalty; it has its own optimizer.
inline TdLossResult td_loss(const VadnParams& params, const VadnParams& target,
                            const std::vector<WeightedExperience>& batch, double gamma,
                            double lambda_l2) {
    if (batch.empty()) throw EmptyBatch{};
    if (gamma < 0.0 || gamma >= 1.0) throw std::invalid_argument("gamma must be in [0,1)");

    TdLossResult result;
    result.gradients = zeros_like(params);
    result.td_errors.reserve(batch.size());

    const double inv_b = 1.0 / static_cast<double>(batch.size());
    double loss = 0.0;
    for (const auto& we : batch) {
        const Experience& exp = *we.exp;
        const auto cache = detail::forward_cached(params, exp.state);
        double target_value = exp.reward;
        if (!exp.terminal && gamma > 0.0) {
            const QOutput tq = forward(target, exp.state);
            target_value += gamma * *std::max_element(tq.q.begin(), tq.q.end());
        }
        const double q_sa = cache.out.q[static_cast<std::size_t>(exp.action)];
        const double delta = target_value - q_sa;
        result.td_errors.push_back(std::abs(delta));
        loss += we.is_weight * delta * delta * inv_b;
        const double dq = -2.0 * we.is_weight * delta * inv_b;
        detail::backward(params, exp.state, cache, exp.action, dq, result.gradients);
    }

    if (lambda_l2 > 0.0) {
        VadnParams& g = result.gradients;
        const VadnParams& p = params;
        double sq = 0.0;
        visit_params(g, [&](const char* name, std::vector<double>& gv) {
            if (std::string_view(name) == "alpha") return;
            const std::vector<double>* pv = nullptr;
            visit_params(const_cast<VadnParams&>(p), [&](const char* n2, std::vector<double>& v2) {
                if (std::string_view(n2) == name) pv = &v2;
            });
            for (std::size_t i = 0; i < gv.size(); ++i) {
                sq += (*pv)[i] * (*pv)[i];
                gv[i] += 2.0 * lambda_l2 * (*pv)[i];
            }
        });
        loss += lambda_l2 * sq;
    }
    result.loss = loss;
    return result;
}

// ---------------------------------------------------------------------------
// Optimizer

struct AdamState {
    VadnParams m;  // first moments, same shapes as the parameters
    VadnParams v;  // second moments
    std::int64_t step = 0;

    static AdamState for_params(const VadnParams& p) {
        AdamState s;
        s.m = zeros_like(p);
        s.v = zeros_like(p);
        return s;
    }
};

struct AdamHyper {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Adam step for the network, plain gradient descent for alpha. Functional:
// returns the updated parameters and mutates only the optimizer state.
inline VadnParams apply_update(const VadnParams& params, const VadnParams& gradients,
                               AdamState& opt, double lr_network, double lr_alpha,
                               const AdamHyper& hyper = {}) {
    visit_params(const_cast<VadnParams&>(gradients), [](const char*, std::vector<double>& v) {
        if (!detail::all_finite(v)) throw NonFiniteGradient{};
    });

    VadnParams out = params;
    ++opt.step;
    const double bc1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(opt.step));
    const double bc2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(opt.step));

    auto adam_block = [&](std::vector<double>& w, const std::vector<double>& g,
                          std::vector<double>& m, std::vector<double>& v) {
        for (std::size_t i = 0; i < w.size(); ++i) {
            m[i] = hyper.beta1 * m[i] + (1.0 - hyper.beta1) * g[i];
            v[i] = hyper.beta2 * v[i] + (1.0 - hyper.beta2) * g[i] * g[i];
            const double m_hat = m[i] / bc1;
            const double v_hat = v[i] / bc2;
            w[i] -= lr_network * m_hat / (std::sqrt(v_hat) + hyper.eps);
        }
    };

    adam_block(out.w_f, gradients.w_f, opt.m.w_f, opt.v.w_f);
    adam_block(out.b_f, gradients.b_f, opt.m.b_f, opt.v.b_f);
    adam_block(out.ln_gain, gradients.ln_gain, opt.m.ln_gain, opt.v.ln_gain);
    adam_block(out.ln_bias, gradients.ln_bias, opt.m.ln_bias, opt.v.ln_bias);
    adam_block(out.w_v1, gradients.w_v1, opt.m.w_v1, opt.v.w_v1);
    adam_block(out.b_v1, gradients.b_v1, opt.m.b_v1, opt.v.b_v1);
    adam_block(out.w_v2, gradients.w_v2, opt.m.w_v2, opt.v.w_v2);
    adam_block(out.b_v2, gradients.b_v2, opt.m.b_v2, opt.v.b_v2);
    adam_block(out.w_a1, gradients.w_a1, opt.m.w_a1, opt.v.w_a1);
    adam_block(out.b_a1, gradients.b_a1, opt.m.b_a1, opt.v.b_a1);
    adam_block(out.w_a2, gradients.w_a2, opt.m.w_a2, opt.v.w_a2);
    adam_block(out.b_a2, gradients.b_a2, opt.m.b_a2, opt.v.b_a2);

    out.alpha[0] -= lr_alpha * gradients.alpha[0];

    visit_params(out, [](const char*, std::vector<double>& v) {
        if (!detail::all_finite(v)) throw NonFiniteOutput{};
    });
    return out;
}

// ---------------------------------------------------------------------------
// Checkpoint format

inline constexpr int kCheckpointVersion = 1;

inline void to_json(json& j, const VadnConfig& c) {
    j = json{{"input_dim", c.input_dim},
             {"encoder_dim", c.encoder_dim},
             {"value_hidden", c.value_hidden},
             {"adv_hidden", c.adv_hidden},
             {"ln_eps", c.ln_eps}};
}
inline void from_json(const json& j, VadnConfig& c) {
    j.at("input_dim").get_to(c.input_dim);
    j.at("encoder_dim").get_to(c.encoder_dim);
    j.at("value_hidden").get_to(c.value_hidden);
    j.at("adv_hidden").get_to(c.adv_hidden);
    c.ln_eps = j.value("ln_eps", 1e-5);
}

namespace detail {

inline std::uint64_t content_hash(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline json params_to_json(const VadnParams& p) {
    json j;
    j["config"] = p.config;
    visit_params(const_cast<VadnParams&>(p), [&](const char* name, std::vector<double>& v) {
        j[name] = v;
    });
    return j;
}

inline VadnParams params_from_json(const json& j) {
    VadnParams p;
    j.at("config").get_to(p.config);
    visit_params(p, [&](const char* name, std::vector<double>& v) {
        j.at(name).get_to(v);
    });
    return p;
}

}  // namespace detail

struct Checkpoint {
    VadnParams params;
    AdamState opt;
    RunningStats feature_stats;
    NormalizeOptions normalize;
};

inline json checkpoint_to_json(const Checkpoint& ckpt) {
    json body;
    body["version"] = kCheckpointVersion;
    body["params"] = detail::params_to_json(ckpt.params);
    body["adam_m"] = detail::params_to_json(ckpt.opt.m);
    body["adam_v"] = detail::params_to_json(ckpt.opt.v);
    body["adam_step"] = ckpt.opt.step;
    body["feature_stats"] = ckpt.feature_stats;
    body["zscore_meta"] = ckpt.normalize.zscore_meta;
    body["content_hash"] = detail::content_hash(body["params"].dump());
    return body;
}

inline Checkpoint checkpoint_from_json(const json& j, const VadnConfig* expected = nullptr) {
    if (j.value("version", -1) != kCheckpointVersion) {
        throw CheckpointMismatch("unsupported checkpoint version");
    }
    Checkpoint ckpt;
    ckpt.params = detail::params_from_json(j.at("params"));
    const auto hash = detail::content_hash(j.at("params").dump());
    if (j.contains("content_hash") && j["content_hash"].get<std::uint64_t>() != hash) {
        throw CheckpointMismatch("checkpoint content hash does not match");
    }
    if (expected != nullptr) {
        const auto& c = ckpt.params.config;
        if (c.input_dim != expected->input_dim || c.encoder_dim != expected->encoder_dim ||
            c.value_hidden != expected->value_hidden || c.adv_hidden != expected->adv_hidden) {
            throw CheckpointMismatch("checkpoint dimensions do not match expectation");
        }
    }
    ckpt.opt.m = detail::params_from_json(j.at("adam_m"));
    ckpt.opt.v = detail::params_from_json(j.at("adam_v"));
    ckpt.opt.step = j.at("adam_step").get<std::int64_t>();
    j.at("feature_stats").get_to(ckpt.feature_stats);
    ckpt.normalize.zscore_meta = j.value("zscore_meta", true);
    return ckpt;
}

}  // namespace multicod
