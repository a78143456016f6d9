"""Tour of the elementary-symmetric-function calculus.

Run:  python demos/symmetric_functions.py
"""

import numpy as np

from prescurv.symmfunc import (
    OperatorSpec,
    in_gamma_k,
    operator_value_grad,
    sigma,
    sigma_grad,
    sigma_hess_dir,
    sigma_subset_oracle,
)

print("=== values ===")
lam = np.array([1.0, 2.0, 3.0])
for l in range(4):
    print(f"sigma_{l}(1,2,3) = {sigma(lam, l):g}   "
          f"(enumeration oracle: {sigma_subset_oracle(lam, l):g})")

print("\n=== cone membership ===")
for spec in ([1.0, 1.0, 1.0], [1.0, 1.0, -0.1], [1.0, -0.5, -0.5]):
    for k in (1, 2, 3):
        ok, margin = in_gamma_k(np.array(spec), k)
        print(f"lambda={spec} in Gamma_{k}: {ok} (margin {margin:+.3f})")
    print()

print("=== gradients and Euler's identity ===")
g = sigma_grad(lam, 2)
print(f"grad sigma_2(1,2,3) = {g}  (delete-one values)")
print(f"lambda . grad = {lam @ g:g} = 2 * sigma_2 = {2 * sigma(lam, 2):g}")

print("\n=== second directional derivative ===")
A, B = np.eye(3), np.eye(3)
print(f"d^2/dt^2 sigma_2(I + tI) = {sigma_hess_dir(A, B, 2):g}  "
      "(sigma_2 of (1+t)I is 3(1+t)^2, so 6)")

print("\n=== matrix operators ===")
for op in (OperatorSpec("sigma_k", k=2), OperatorSpec("quotient", k=2, l=1)):
    value, grad = operator_value_grad(np.diag([0.5, 0.8, 1.1]), op)
    print(f"{op.label()}(diag(0.5,0.8,1.1)) = {value:.6f}; grad diagonal = "
          f"{np.diag(grad).round(6)}")
