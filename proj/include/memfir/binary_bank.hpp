#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "memfir/filter.hpp"

namespace memfir {

/// DAC-merged tap array: each tap owns k_d devices whose conductances are
/// binary-weighted, g[i][b] = 2^b * g[i][0]. A code is applied in two's
/// complement: bit b < k_d-1 drives its device with +v_ref, the sign bit
/// drives its device with -v_ref, and every other device sits at 0 V.
struct ConductanceBank {
    std::size_t n_taps = 0;
    int k_d = 0;
    double v_ref = 0.0;
    bool sign_compensated = true;
    std::vector<double> g; // siemens, row-major n_taps x k_d

    double at(std::size_t tap, int bit) const { return g[tap * static_cast<std::size_t>(k_d) + static_cast<std::size_t>(bit)]; }
    std::size_t device_count() const { return g.size(); }
};

// Unit conductance per tap: w * adc_fullscale / (r_f * v_ref * 2^(k_d-1)).
// Throws ParameterError for negative weights or v_ref above threshold.
ConductanceBank build_binary_bank(std::span<const double> weights, const FilterConfig& cfg, double v_ref,
                                  double v_threshold);

// Adder output for the register content codes (codes[0] newest).
double step_binary(const ConductanceBank& bank, std::span<const int> codes, double r_f);

/// Shift-register front end feeding a ConductanceBank.
class BinaryBankFilter {
  public:
    BinaryBankFilter(const FilterConfig& cfg, ConductanceBank bank);

    double step(double v_in);
    Signal run(const Signal& input);

    const ConductanceBank& bank() const { return bank_; }

  private:
    FilterConfig cfg_;
    ConductanceBank bank_;
    std::vector<int> shift_reg_;
};

} // namespace memfir
