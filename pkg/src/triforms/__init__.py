"""triforms: exact expansions for hyperbolic triangle groups.

Subpackage map:

* core_series: exact scalars and tagged truncated Laurent series
* triangle: type classification, group data, arithmeticity
* schwarz: hauptmodul expansions from the third-order Schwarzian ODE
* halphen: the associated quadratic first-order system and its q-solution
* forms: rings of modular forms, discriminant package, Serre derivative
* special_functions: digamma, 2F1 with connection formulas, moduli, maps
* classical: Eisenstein / theta / eta cross-engines and integrality checks
* arithmetic_scan: denominator statistics and conjecture reports
* calabi_yau: fourth-order hypergeometric mirror computations
* cli: command-line interface
"""

from __future__ import annotations

__version__ = "0.1.0"

__all__ = [
    "core_series",
    "triangle",
    "schwarz",
    "halphen",
    "forms",
    "special_functions",
    "classical",
    "arithmetic_scan",
    "calabi_yau",
    "cli",
]
