"""Invariant cones, stability witnesses and structured Lyapunov certificates for ``x' = Ax``."""
__version__ = "0.1.0"

from .cones import DirectSum, Ellipsoidal, IceCream, Orthant
from .invariance import cross_positivity_falsifier, decompose, hom_test, in_end, in_M
from .lyapunov import LyapunovCertificate, solve_P_target, synth_lyapunov, verify_lyapunov
from .simulate import integrate, monitor_invariance, monitor_lyapunov
from .stability import certify_stability, d_stability
from .verdict import MembershipVerdict, Verdict

__all__ = [
    "DirectSum", "Ellipsoidal", "IceCream", "Orthant",
    "cross_positivity_falsifier", "decompose", "hom_test", "in_end", "in_M",
    "LyapunovCertificate", "solve_P_target", "synth_lyapunov", "verify_lyapunov",
    "integrate", "monitor_invariance", "monitor_lyapunov",
    "certify_stability", "d_stability", "MembershipVerdict", "Verdict",
]
