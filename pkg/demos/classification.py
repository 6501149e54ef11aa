"""Limit point, completely indeterminate and intermediate reference families.

The free model has square-summable solutions only in one direction, the
geometric model with growing off-diagonal blocks has all solutions
square-summable, and block_mixed couples one channel of each kind.
"""
from blockweyl import block_mixed_model, free_model, geometric_model, limit_disc, limit_form

models = {"free": free_model(), "geometric(2)": geometric_model(2.0), "block_mixed(2)": block_mixed_model(2.0)}

for name, model in models.items():
    lim = limit_disc(model, 1j)
    form = limit_form(model, 1j, limit=lim)
    print(f"{name:15s} {lim.classification:25s} n=({lim.n_z},{lim.n_zbar})  "
          f"converged at N={lim.N_used:<4d} form dims {form.dims()}  Witt index {form.witt_index}")

print("\nconvergence of ||R_N|| for geometric(2):")
for row in limit_disc(models["geometric(2)"], 1j).convergence_report:
    print(f"  N={row['N']:4d}  ||R_N||={row['norm_R']:.10f}  increment={row.get('increment_R', float('nan')):.2e}")
