"""prescurv: solvers and a verification lab for prescribed-curvature equations.

Subpackages
-----------
symmfunc        elementary symmetric function calculus and cone membership
sphere_geometry radial graphs over the sphere: grids, derivatives, curvature
measure_solver  Newton + continuation solver for sigma_k(A) = <X,nu>^p phi(X)
graph_solver    Dirichlet solver for sigma_k(lambda) = H(x,g) w^{-q}
inequality_lab  randomized checks of the symmetric-function inequalities
cli             JSON-config command line front end and report emission
"""

__version__ = "0.1.0"

from . import symmfunc  # noqa: F401
from .symmfunc import OperatorSpec, in_gamma_k, sigma, sigma_grad, sigma_hess_dir  # noqa: F401
