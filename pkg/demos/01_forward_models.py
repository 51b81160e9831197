"""Forward magnetoconductance models for one reference layer.

Prints the characteristic fields, then tabulates the three corrections
(perpendicular WL, in-plane orbital, Zeeman interaction term) across field.
"""

import numpy as np

from deltamag import (
    AaParams,
    G0,
    InPlaneParams,
    REFERENCE_LAYERS,
    WlParams,
    elastic_field,
    gamma_param,
    phase_breaking_field,
    reduced_field,
    wl_inplane,
    wl_perp,
    zeeman_aa,
)

rec = REFERENCE_LAYERS[0]
n = rec.si("n_2d")
l_phi = rec.si("l_phi")
l_mfp = rec.si("l_mfp")
delta = rec.si("delta")
T = 0.6  # K

wl = WlParams(l_phi=l_phi, l_mfp=l_mfp)
ip = InPlaneParams(gamma_param(delta, n, l_phi, l_mfp))
aa = AaParams(F=0.5)

print(f"layer {rec.label} ({rec.dopant}), n = {n:.3e} m^-2")
print(f"l_phi = {l_phi * 1e9:.1f} nm  ->  B_phi = {phase_breaking_field(l_phi):.4f} T")
print(f"l     = {l_mfp * 1e9:.1f} nm  ->  B_l   = {elastic_field(l_mfp):.2f} T")
print(f"gamma = {ip.gamma:.4f} T^-2 (layer thickness {delta * 1e9:.1f} nm)")
print()

B = np.array([0.01, 0.05, 0.2, 0.5, 1.0, 2.0])
perp = wl_perp(B, wl)
inpl = wl_inplane(B, ip)
zee = zeeman_aa(B, T, aa)

print(f"corrections at T = {T} K, in units of G0 = e^2/h")
print(f"{'B (T)':>7} {'h':>7} {'WL perp':>10} {'in-plane':>10} {'Zeeman':>10}")
for i, b in enumerate(B):
    print(
        f"{b:7.2f} {reduced_field(b, T):7.2f} {perp[i] / G0:10.4f} "
        f"{inpl[i] / G0:10.4f} {zee[i] / G0:10.4f}"
    )
print()
print("the WL terms are even in B and vanish at B = 0; the Zeeman term is")
print("isotropic, so it drops out of the perpendicular-minus-in-plane difference")
