"""Zero-energy Kepler orbits are parabolas: rebuild one from the planar system."""
import math

from parabolic import planar as pl

U = pl.PlanarPotential.from_fourier(1.0, name="kepler")
orb = pl.reconstruct_physical(U, 1.0, pl.PhasePoint(0.3, 2.3))
keep = orb.r < 50
fit = pl.fit_conic(orb.x[keep], orb.p[keep])
print(f"conic eccentricity {fit.eccentricity:.12f}, Laplace-Runge-Lenz {fit.lrl_eccentricity:.12f}")
print(f"z - sqrt(2U) drift {orb.z_defect:.1e}")
for a in (0.5, 1.0, 1.5):
    s = pl.dv_dtheta_sweep(U, a).sweep
    print(f"alpha={a}: apsidal sweep {s:.8f}, 2pi/(2-alpha) = {2 * math.pi / (2 - a):.8f}")
