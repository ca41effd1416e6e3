#include "memfir/binary_bank.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "memfir/errors.hpp"

namespace memfir {

ConductanceBank build_binary_bank(std::span<const double> weights, const FilterConfig& cfg, double v_ref,
                                  double v_threshold) {
    if (weights.size() != cfg.n_taps) throw ParameterError("build_binary_bank: weight count differs from n_taps");
    if (!(v_ref > 0.0 && v_ref <= v_threshold)) throw ParameterError("build_binary_bank: v_ref must be in (0, v_threshold]");
    ConductanceBank bank;
    bank.n_taps = cfg.n_taps;
    bank.k_d = cfg.k_d;
    bank.v_ref = v_ref;
    bank.sign_compensated = cfg.sign_compensated;
    bank.g.resize(cfg.n_taps * static_cast<std::size_t>(cfg.k_d));
    const double scale = cfg.adc_fullscale / (cfg.r_f * v_ref * std::ldexp(1.0, cfg.k_d - 1));
    for (std::size_t i = 0; i < cfg.n_taps; ++i) {
        if (weights[i] < 0.0) {
            throw ParameterError("build_binary_bank: negative weight at tap " + std::to_string(i) +
                                 " is not representable with single-polarity conductances");
        }
        const double unit = weights[i] * scale;
        for (int b = 0; b < cfg.k_d; ++b) {
            bank.g[i * static_cast<std::size_t>(cfg.k_d) + static_cast<std::size_t>(b)] = std::ldexp(unit, b);
        }
    }
    return bank;
}

double step_binary(const ConductanceBank& bank, std::span<const int> codes, double r_f) {
    if (codes.size() != bank.n_taps) throw ParameterError("step_binary: code count differs from n_taps");
    const int lo = -(1 << (bank.k_d - 1));
    const int hi = (1 << (bank.k_d - 1)) - 1;
    const int sign_bit = bank.k_d - 1;
    double current = 0.0;
    for (std::size_t i = 0; i < bank.n_taps; ++i) {
        const int code = codes[i];
        if (code < lo || code > hi) throw ParameterError("step_binary: code " + std::to_string(code) + " out of range");
        const auto pattern = static_cast<unsigned>(code) & ((1u << bank.k_d) - 1u);
        for (int b = 0; b < bank.k_d; ++b) {
            if (((pattern >> b) & 1u) == 0u) continue;
            const double drive = b == sign_bit ? -bank.v_ref : bank.v_ref;
            current += drive * bank.at(i, b);
        }
    }
    const double y_raw = -r_f * current;
    return bank.sign_compensated ? -y_raw : y_raw;
}

BinaryBankFilter::BinaryBankFilter(const FilterConfig& cfg, ConductanceBank bank)
    : cfg_(cfg), bank_(std::move(bank)), shift_reg_(cfg.n_taps, 0) {
    if (bank_.n_taps != cfg_.n_taps || bank_.k_d != cfg_.k_d) {
        throw ParameterError("BinaryBankFilter: bank shape does not match filter config");
    }
}

double BinaryBankFilter::step(double v_in) {
    std::shift_right(shift_reg_.begin(), shift_reg_.end(), 1);
    shift_reg_[0] = adc_quantize(v_in, cfg_);
    return step_binary(bank_, shift_reg_, cfg_.r_f);
}

Signal BinaryBankFilter::run(const Signal& input) {
    if (input.f_s != cfg_.f_s) throw ConfigError("BinaryBankFilter: sample-rate mismatch");
    Signal out{std::vector<double>(input.size()), input.f_s};
    for (std::size_t n = 0; n < input.size(); ++n) out.samples[n] = step(input.samples[n]);
    return out;
}

} // namespace memfir
