"""Adaptive CPT magnetometry simulator: Ramsey measurement model, grid
Bayesian estimator, information-gain phase policy, lock baseline and the
scenario runners, bound from the C++ core."""

try:
    # Installed layout: the extension lives inside the package.
    from ._cptmag import *  # noqa: F401,F403
except ImportError:
    # Build-tree layout: the extension sits next to the package on sys.path.
    from _cptmag import *  # noqa: F401,F403
