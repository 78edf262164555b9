"""Where does the momentum spread of a state come from?

Split the momentum into a classical part, set by the phase gradient, and a
nonclassical part, set by the shape of the density.  The nonclassicality J_nc
compares the two; J_r = 1 / J_nc is the matching robustness.
"""
from fisherq import (
    GridSpec,
    commutator_bound,
    fisher_heisenberg_chain,
    gaussian,
    ho_eigenstate,
    joint_nonclassicality,
    quantum_potential,
    squeezed,
    superposition,
    variance_split_momentum,
)

grid = GridSpec.centered(14.0, 2048)

cases = {
    "chirped gaussian": gaussian(grid, sigma=1.2, chirp=0.4),
    "squeezed r=0.6": squeezed(grid, 0.6),
    "oscillator n=3": ho_eigenstate(grid, 3),
    "cat-like n=0 + n=4": superposition([1, 1j], [ho_eigenstate(grid, 0), ho_eigenstate(grid, 4)]),
}

print(f"{'state':<22}{'J_nc':>10}{'J_r':>10}{'dX':>10}{'dP':>10}")
for name, psi in cases.items():
    r = joint_nonclassicality(psi)
    print(f"{name:<22}{r.j_nc:>10.5f}{r.j_r:>10.5f}{r.delta_x:>10.5f}{r.delta_p:>10.5f}")

# A chirp adds classical momentum spread but leaves the nonclassical part alone.
psi = cases["chirped gaussian"]
split = variance_split_momentum(psi)
print(f"\nVar P = {split.var_total:.6f} = classical {split.var_classical:.6f}"
      f" + nonclassical {split.var_nonclassical:.6f}")

# The Fisher length times the nonclassical spread is always hbar/2.
chain = fisher_heisenberg_chain(ho_eigenstate(grid, 2))
print(f"Delta X Delta P = {chain.spread_product:.6f} >= delta X Delta P = {chain.fisher_spread:.6f}"
      f" >= {chain.fisher_nonclassical:.6f}")

bound = commutator_bound(cases["cat-like n=0 + n=4"])
print(f"J_nc = {bound.j_nc:.6f} stays above the commutator bound {bound.rhs:.6f}")

q = quantum_potential(ho_eigenstate(grid, 1))
print(f"<Q> = {q.mean:.8f}, hbar^2 F / 8m = {q.fisher_energy:.8f}")
