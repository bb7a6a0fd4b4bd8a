"""Smoke test for the pygl1n extension.

Build and install first:
    pip install --no-build-isolation -e crates/python
then run:
    python python/smoke_test.py
"""

import math
import sys

import numpy as np

import pygl1n


def check(cond, what):
    if not cond:
        print(f"FAIL  {what}")
        sys.exit(1)
    print(f"ok    {what}")


def main():
    hw = pygl1n.HighestWeight("4,2,1,0")
    check(hw.n == 3 and hw.unitarity == "typical", "parse typical highest weight")
    check(hw.dim() == 64, "dimension of [4,2,1,0] is 64")
    check(sum(c["dim"] for c in hw.branch()) == 64, "branching dimensions add up")

    check(pygl1n.HighestWeight.ladder(2, 2).dim() == 5, "ladder V(2), n=2 has dimension 5")
    check(pygl1n.HighestWeight(["1/2", 3, 0]).labels == ["1/2", "3", "0"], "rational labels")

    try:
        pygl1n.Module(pygl1n.HighestWeight("1/4,1,0"))
    except ValueError:
        check(True, "non-unitary weight raises ValueError")
    else:
        check(False, "non-unitary weight raises ValueError")

    module = pygl1n.Module(hw)
    e01 = np.array(module.generator(0, 1))
    e10 = np.array(module.generator(1, 0))
    e11 = np.array(module.generator(1, 1))
    e00 = np.array(module.generator(0, 0))
    check(np.allclose(e01.conj().T, e10), "star condition for e_01")
    check(np.allclose(e01 @ e10 + e10 @ e01, e00 + e11), "{e_01, e_10} = e_00 + e_11")

    alpha = [1.0 + 0.5j, -0.3j, 0.7]
    m = np.array(module.odd_element(alpha))
    scale, levels = hw.spectrum(alpha)
    dense = np.sort(np.linalg.eigvalsh(m))
    predicted = np.sort([v for v, k in levels for _ in range(k)])
    check(np.allclose(dense, predicted, atol=1e-8 * scale), "branching spectrum matches numpy")
    _, oracle = module.oracle_spectrum(alpha)
    check(
        [k for _, k in oracle] == [k for _, k in levels]
        and all(abs(a - b) <= 1e-8 * scale for (a, _), (b, _) in zip(oracle, levels)),
        "dense oracle agrees with the branching spectrum",
    )

    vecs = module.eigenvectors(alpha)
    v = np.array([c for _, c in vecs]).T
    lam = np.array([e for e, _ in vecs])
    check(np.allclose(m @ v, v * lam, atol=1e-10), "eigenvector residuals")
    check(np.allclose(v.conj().T @ v, np.eye(module.dim), atol=1e-10), "eigenvectors are orthonormal")

    chain = pygl1n.Chain(3, c=0.2)
    modes = chain.modes()
    check(math.isclose(modes["gamma"], sum(g * g for g in modes["gamma_j"])), "gamma = sum gamma_j^2")
    fock = pygl1n.HighestWeight.fock(3, 5)
    coeffs, q_scale = chain.operator(1, fock)
    check(math.isclose(math.sqrt(sum(abs(a) ** 2 for a in coeffs)), q_scale), "|alpha| equals the q scale")
    _, fock_levels = fock.spectrum(coeffs)
    check([k for _, k in fock_levels] == [1, 2, 1, 1, 2, 1], "W(5), n=3 multiplicities")
    law = chain.fock_probabilities(5, [1, 0, 1])
    check(math.isclose(sum(p for _, p in law), 1.0), "Fock probabilities sum to 1")
    check(chain.triple_relation_defect(pygl1n.Module(fock)) < 1e-10, "triple relations")

    check(all(r[1] for r in module.verify(seed=7, alphas=2)), "verify suite passes")
    check(pygl1n.telescoping_identity(["1/2", "3"], ["0", "1", "-2"], 2), "telescoping identity")
    check(all(isinstance(a, complex) for a in coeffs), "coefficients are Python complex numbers")
    print("all smoke checks passed")


if __name__ == "__main__":
    main()
