"""
Running MCAR tests on a CSV file
================================

A minimal end-to-end session: write a small CSV with missing cells,
load it, and run every applicable test.
"""

from pathlib import Path

from mcartest import (
    bivariate_mcar_test,
    little_mcar_univariate,
    load_csv,
    ustat_mcar_test,
)

out_dir = Path("demo_output")
out_dir.mkdir(exist_ok=True)

# a tiny dataset: income is always recorded, satisfaction sometimes is not;
# the NA rows cluster at high incomes, which an MCAR test should notice
# given enough data (three rows is obviously just a demonstration)
csv_path = out_dir / "survey.csv"
csv_path.write_text(
    "income,satisfaction\n"
    "1.0,6.0\n"
    "2.0,7.0\n"
    "3.0,NA\n"
)

# load_csv infers roles: columns with missing cells become "incomplete"
ds, roles = load_csv(csv_path)
print(f"{ds.n} rows; complete columns {roles.complete}, incomplete {roles.incomplete}")

# the quadratic-form test works for any (p, q)
result = ustat_mcar_test(ds, roles)
print(f"quadratic form : statistic={result.statistic:.4f} "
      f"df={result.df} p={result.p_value:.4f}")

# with a single (complete, incomplete) pair the studentized statistic
# applies as well, and its square equals the quadratic form
d = bivariate_mcar_test(ds, roles)
print(f"studentized    : statistic={d.statistic:.4f} squared={d.statistic**2:.4f}")

# Little's d2 in closed form; for one incomplete column it coincides
# with the quadratic form exactly
l = little_mcar_univariate(ds, roles)
print(f"Little d2      : statistic={l.statistic:.4f} df={l.df}")

decision = "reject MCAR" if result.reject else "no evidence against MCAR"
print(f"decision at alpha={result.alpha}: {decision}")
