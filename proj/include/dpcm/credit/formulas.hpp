#pragma once

#include "dpcm/data/loan.hpp"
#include "dpcm/money.hpp"

namespace dpcm {

/// Credit conversion factor: the proportion of the originally funded amount
/// still owed at default, (funded - recovered_principal) / funded, in [0, 1].
double ccf(Cents total_funded_amount, Cents total_recovered_principal);

/// Predicted exposure at default: funded amount times the predicted CCF,
/// with the CCF clipped to [0, 1] first. Never exceeds the funded amount.
Cents predicted_ead(Cents total_funded_amount, double predicted_ccf);

/// Fraction of the defaulted exposure recouped, recoveries / ead clipped to
/// [0, 1]; defined as 0 when the exposure is 0.
double recovery_rate(Cents recoveries, Cents ead);

/// Loss given default = 1 - recovery_rate. recovery_rate must be in [0, 1].
double lgd(double recovery_rate);

/// Realized loss: 0 for non-defaulted records; otherwise funded amount minus
/// recovered principal minus post-default recoveries, floored at 0.
Cents actual_loss(const LoanRecord& record);

}  // namespace dpcm
