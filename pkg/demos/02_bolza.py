"""Obstacle-constrained free-time minimisers and their jumps.

Three regimes: an arc along the obstacle (position jump), a radial
reflection (velocity jump), and a homothetic path bouncing straight back.
"""
import math

import numpy as np

from parabolic import action as act
from parabolic import bolza as bz
from parabolic import potential as pot

kepler = pot.HomogeneousPotential(pot.isotropic(), 1.0)
sol = bz.minimize_bolza(bz.BolzaProblem(kepler, [1, 0], [-1, 0], 1.0))
print(f"arc on the unit circle: action {sol.action:.6f} (pi sqrt 2 = {math.pi * math.sqrt(2):.6f}), {sol.kind}")

sol = bz.minimize_bolza(bz.BolzaProblem(kepler, [1, 0], [-1, 0], 0.1))
print(f"isotropic, eps=0.1: action {sol.action:.5f}, dvel {sol.delta_vel:.3f}, dpos {sol.delta_pos:.1e}, {sol.kind}")
rep = bz.kelvin_regularity_check(sol)
print(f"  inverted path: tangential defect {rep.tangential_defect:.1e}, radial antisymmetry {rep.radial_antisymmetry_defect:.1e}")

dev = pot.HomogeneousPotential(pot.devaney(), 1.0)
xi = dev.angular.xi_minus
sol = bz.minimize_bolza(bz.BolzaProblem(dev, xi, 0.1 * xi, 0.1))
print(f"radial drop to the obstacle: {sol.action:.6f} vs closed form {act.homothetic_action(0.1, 1, 1, 1):.6f}")

big = bz.rescale_solution(sol, 4.0)
print(f"rescaled by 4: action {big.action:.6f} = {sol.action:.6f} * 4^(1/2)")
print("residuals:", {k: f"{v:.2e}" for k, v in sol.residuals.items() if isinstance(v, float)})
