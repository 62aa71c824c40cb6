"""Built-in potentials, the admissibility check and the barrier criterion."""
import numpy as np

from parabolic import potential as pot

for name, make in pot.NAMED.items():
    u = make()
    rep = pot.validate_class_S(u)
    print(f"{name:10s} dim={u.dim} U_min={u.v_min:.4f} U_max={u.v_max:.4f} admissible={rep.passed}")
    for f in rep.failures:
        print("    ", f)

# O = {|sin theta| > 1/2} separates the two minima of 1 + 50 sin^2
rep = pot.sigma_criterion(pot.barrier50(), lambda s: np.abs(s[..., 1]) > 0.5)
print(f"barrier criterion on barrier50: {rep.lhs:.4f} > {rep.rhs:.4f} -> {rep.holds}")

p = pot.HomogeneousPotential(pot.devaney(), 0.7)
x = np.array([0.3, -1.2])
print("Euler identity grad V . x + alpha V =", p.gradient(x) @ x + 0.7 * p.value(x))
