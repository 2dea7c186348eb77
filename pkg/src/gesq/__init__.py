"""Genuinely entangled subspaces: constructions, entanglement measures, and bounds.

The package is organised around a small set of dense linear-algebra
primitives (`gesq.tensor_core`), constructors for the subspace families it
studies (`gesq.subspaces`), and three complementary ways of quantifying how
entangled a subspace or a state supported on it is:

* closed-form values and analytic bounds (`gesq.exact`),
* alternating variational maximisation over product vectors
  (`gesq.variational`),
* semidefinite-programming relaxations solved by a built-in dense
  interior-point solver (`gesq.sdp`).

`gesq.noise` adds white-noise robustness thresholds for states built from a
subspace, and `gesq.cli` exposes everything as a command line tool that can
regenerate the bundled reference tables and figures.
"""

__version__ = "0.1.0"
