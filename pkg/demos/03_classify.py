"""In/Out classification by the excess level and by the velocity jump."""
from parabolic import morse
from parabolic import potential as pot

for name, alpha in [("isotropic", 1.0), ("devaney", 0.5), ("devaney", 1.0), ("barrier50", 0.2)]:
    c = morse.classify(pot.HomogeneousPotential(pot.NAMED[name](), alpha))
    curve = " ".join(f"{g:+.4f}" for _, g in c.gamma_curve)
    print(f"{name:9s} alpha={alpha}: {c.verdict:12s} gamma(eps) {curve}  dvel {c.delta_vel_V:.4f}")
    for f in c.flags:
        print("    flag:", f)
