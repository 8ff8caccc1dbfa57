#include "gradest/estimators.hpp"

namespace gradest {

const char* estimator_name(EstimatorKind k) {
    switch (k) {
    case EstimatorKind::ld: return "ld";
    case EstimatorKind::ld_baseline: return "ld_b";
    case EstimatorKind::reparam: return "reparam";
    case EstimatorKind::ft_single: return "ftu";
    case EstimatorKind::ft_sym: return "ft";
    case EstimatorKind::rt_real: return "rt_real";
    case EstimatorKind::rt_interval: return "rt";
    case EstimatorKind::rt_nd: return "rt_nd";
    case EstimatorKind::hsl: return "hsl";
    }
    return "?";
}

} // namespace gradest
