"""Model of an erbium-doped microwave-to-optical photon converter.

Submodules: ``config`` (device description), ``adiabatic`` (effective
coupling), ``scattering`` (two-port efficiency), ``broadening`` (alpha),
``geometry`` (filling factor), ``design`` (matching ratio R), ``oracle``
(exact single-excitation check) and ``cli``.
"""

__version__ = "0.1.0"
