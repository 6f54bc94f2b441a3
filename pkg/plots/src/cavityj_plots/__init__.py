"""Figure regeneration from cavityj CSV outputs.

Pure file-to-file: each run reads a JSON recipe, renders one image, and
writes a deterministic caption JSON with the quantitative annotations
(power-law fits, peak positions) next to it.
"""

__version__ = "0.1.0"
