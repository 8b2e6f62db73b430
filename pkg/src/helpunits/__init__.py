"""HeLP (Luthar-Passi) computations for torsion units of integral group rings.

Modules: ``arith`` (exact cyclotomics), ``tables`` (character table data),
``constraints`` (the mu_l forms), ``solver`` (integer feasibility),
``orchestrator`` (all orders of a group) and ``cli``.
"""

__version__ = "0.1.0"
