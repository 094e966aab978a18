"""Regenerate the figure analogues from glatom CSV output files.

This package reads only the serialized CSVs (plus their JSON sidecars);
it never links against the simulator.
"""

__version__ = "0.1.0"
