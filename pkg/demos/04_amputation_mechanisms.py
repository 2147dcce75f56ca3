"""
Four ways to lose data
======================

The same fully observed sample amputated under each mechanism, showing
how the missingness pattern relates to the control column.  MCAR ignores
the data; the three MAR variants tie missingness to the complete column
in different ways.
"""

import numpy as np

from mcartest import (
    ColumnRoles,
    DistributionSpec,
    apply_mar_1_to_x,
    apply_mar_mean,
    apply_mar_rank,
    apply_mcar,
    gen_clayton,
    gen_std_normal,
    pattern_names,
    rng_stream,
)

n = 4000
roles = ColumnRoles((0,), (1,))
full = gen_std_normal(n, 2, rng_stream(7, 0), pattern_names(1, 1))
control = full.values[:, 0]


def report(name, ds):
    missing = ~ds.mask[:, 1]
    frac = missing.mean()
    # where do the missing cells sit relative to the control median?
    above = (control > np.median(control))[missing].mean() if missing.any() else 0.0
    print(f"{name:12s} missing {frac:6.3f}   of which above median {above:5.2f}")


# MCAR: every cell equally likely to vanish, half the holes above median
report("mcar", apply_mcar(full, roles, 0.15, rng_stream(7, 1)))

# MAR 1-to-9: high-control rows lose their pair nine times more often
report("mar_1_to_x", apply_mar_1_to_x(full, roles, 0.15, 9.0, rng_stream(7, 2)))

# MAR rank: selection weight proportional to the control's rank, and the
# number of missing cells is exactly round(n * p) every time
report("mar_rank", apply_mar_rank(full, roles, 0.15, rng_stream(7, 3)))

# MAR mean: two flat rates split at the control mean
report("mar_mean", apply_mar_mean(full, roles, [(1, 0, 0.25, 0.05)], rng_stream(7, 4)))

# generators are not limited to normal data: a Clayton copula with
# exponential margins gives dependent, heavy-tailed columns
spec = DistributionSpec(kind="clayton", dim=2, theta=1.0, margins=("exp1", "exp1"))
clay = gen_clayton(n, spec, rng_stream(7, 5), pattern_names(1, 1))
print(f"clayton sample means {clay.values.mean(axis=0).round(3)} (Exp(1) margins)")
