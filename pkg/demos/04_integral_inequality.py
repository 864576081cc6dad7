"""The integral inequality and its equality-case classification.

Runs the verifier on three qualitatively different cases: an equality case
(the flat-space sphere family), a parallel case (the torus), and a strict
case (a Hamiltonian deformation).  The defect is the gap between the
scaled integral of |nabla h|^2 and the Ricci-direction integral.
"""

from whitneygeo import make_spec, run_case

print(f"{'case':<28} {'classification':<16} {'defect/vol':>12} "
      f"{'divergence id':>14}")
for kind, kw, res in [
    ("whitney_c0", dict(r=1.0), 48),
    ("whitney_cp", dict(theta=0.5), 48),
    ("product_torus", dict(), 24),
    ("perturbed", dict(epsilon=0.02, seed=3), 48),
    ("perturbed", dict(epsilon=0.05, seed=3), 48),
]:
    spec = make_spec(kind, 2, **kw)
    rep = run_case(spec, resolution=res, seed=3)
    label = f"{kind}({', '.join(f'{k}={v}' for k, v in kw.items())})"
    print(
        f"{label:<28} {rep.classification:<16} "
        f"{rep.integrals['defect_normalized']:>+12.3e} "
        f"{rep.yano['main']:>+14.1e}"
    )

print()
print("The defect vanishes exactly on the distinguished families and on")
print("parallel submanifolds, and grows quadratically with the size of a")
print("generic Hamiltonian deformation, which the classifier reports as")
print("STRICT once it clears the strictness threshold.")
