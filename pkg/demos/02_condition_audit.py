"""Monte Carlo audit of the smoothness conditions on three systems.

Quicksort satisfies everything the audit can check.  A perpetuity
(a single coefficient term) violates the multi-term requirement.  The 2D
split-tree system with a deterministic split vector has solutions living on
a line, which the support audit detects from the solved pool.
"""
from stochfix import audit_coefficients, audit_support, build, degenerate_variant, solve
from stochfix.core import EquationSystem, finite_law_sampler

rep = audit_coefficients(build({"model": "quicksort"}), 0, 100_000, seed=0)
print(f"quicksort: a_hat = {rep.a_hat:.5f}, lambda_hat = {rep.lambda_hat:.3f}, nu_hat = {rep.nu_hat:.3f}")
for name, entry in rep.entries.items():
    print(f"  {name:3s} {entry.verdict:13s} {entry.note}")

sampler = finite_law_sampler([0.5, 0.5], [[[[0.5]]], [[[0.3]]]], [[1.0], [0.0]])
perpetuity = EquationSystem(1, 1, ((0,),), (sampler,), name="perpetuity")
rep = audit_coefficients(perpetuity, 0, 5_000)
print("\nperpetuity X = A X + b: failed conditions", rep.failed())

generic, _ = solve(build({"model": "split2d", "b": 2, "law": "bst"}), 20_000, seed=0)
cfg = {"model": "split2d", "b": 2, "law": {"kind": "deterministic", "v": [0.5, 0.5]}}
degenerate, _ = solve(degenerate_variant(cfg), 20_000, seed=0)
for label, pools in (("random split", generic), ("deterministic split", degenerate)):
    v = audit_support(pools[0])
    print(f"split2d, {label:19s}: support {v.verdict:5s} normalized min eigenvalue {v.normalized_min_eig:.2e}")
