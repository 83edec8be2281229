#include "dpcm/credit/formulas.hpp"

#include <algorithm>
#include <cmath>

#include "dpcm/errors.hpp"

namespace dpcm {

double ccf(Cents total_funded_amount, Cents total_recovered_principal) {
  if (total_funded_amount <= 0)
    throw InvalidAmounts("ccf: total_funded_amount must be positive");
  if (total_recovered_principal < 0 ||
      total_recovered_principal > total_funded_amount)
    throw InvalidAmounts("ccf: recovered principal must lie in [0, funded]");
  return static_cast<double>(total_funded_amount - total_recovered_principal) /
         static_cast<double>(total_funded_amount);
}

Cents predicted_ead(Cents total_funded_amount, double predicted_ccf) {
  if (total_funded_amount <= 0)
    throw InvalidAmounts("predicted_ead: total_funded_amount must be positive");
  const double clipped = std::clamp(predicted_ccf, 0.0, 1.0);
  return static_cast<Cents>(
      std::llround(static_cast<double>(total_funded_amount) * clipped));
}

double recovery_rate(Cents recoveries, Cents ead) {
  if (recoveries < 0) throw InvalidAmounts("recovery_rate: recoveries < 0");
  if (ead < 0) throw InvalidAmounts("recovery_rate: ead < 0");
  if (ead == 0) return 0.0;
  return std::clamp(static_cast<double>(recoveries) / static_cast<double>(ead),
                    0.0, 1.0);
}

double lgd(double recovery_rate) {
  if (!(recovery_rate >= 0.0) || !(recovery_rate <= 1.0))
    throw OutOfRange("lgd: recovery_rate must lie in [0, 1]");
  return 1.0 - recovery_rate;
}

Cents actual_loss(const LoanRecord& record) {
  if (!is_defaulted(record)) return 0;
  const Cents loss = record.total_funded_amount -
                     record.total_recovered_principal - record.recoveries;
  return std::max<Cents>(0, loss);
}

}  // namespace dpcm
